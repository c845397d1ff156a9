"""Schmidt spectra across ``A | BC``, cut-offs, projected states and tail grouping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from alaw.errors import DomainError, PreconditionError
from alaw.qstate import ChainState, DensityOperator, Partition, Region, as_region, merge, split

RANK_TOL = 1e-12
MASS_FLOOR = 1e-12


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Descending Schmidt coefficients ``p`` (numerical rank ``M``) across a cut."""

    p: np.ndarray
    M: int
    cut_region: Region

    def window_mass(self, m: int, n: int) -> float:
        """``Q_mn``, one-based and inclusive."""
        return float(self.p[m - 1:n].sum())


@dataclass(frozen=True)
class SchmidtBasis:
    """Spectrum together with the region-side vectors ``|i>`` (columns of ``u``)."""

    spectrum: SchmidtSpectrum
    u: np.ndarray
    vh: np.ndarray


@dataclass(frozen=True)
class Cutoff:
    alpha: float
    threshold: float
    q: int
    Q: float


@dataclass(frozen=True)
class TailGrouping:
    """Group masses ``R_m``: ``head_count`` singletons, then tail groups.

    ``bounds`` holds the one-based inclusive index range of every group.
    """

    group_masses: np.ndarray
    head_count: int
    bounds: tuple[tuple[int, int], ...]
    threshold: float

    @property
    def tail_masses(self) -> np.ndarray:
        return self.group_masses[self.head_count:]


def schmidt_basis(state: ChainState, region_a: Region) -> SchmidtBasis:
    """Thin SVD of the amplitude matrix rows-on-``region_a``; memoized on the state."""
    region_a = as_region(region_a)
    key = ("schmidt", region_a.sites)
    if key in state._cache:
        return state._cache[key]
    region_a.check(state.num_sites)
    if len(region_a) >= state.num_sites:
        raise DomainError("Schmidt cut needs a proper subregion")
    u, s, vh = np.linalg.svd(state.matrix(region_a), full_matrices=False)
    p = s ** 2
    order = np.argsort(-p, kind="stable")
    p, u, vh = p[order], u[:, order], vh[order]
    M = int(np.count_nonzero(p > RANK_TOL))
    p = p[:M] / p[:M].sum()
    basis = SchmidtBasis(SchmidtSpectrum(p, M, region_a), u[:, :M], vh[:M])
    state._cache[key] = basis
    return basis


def schmidt_cut(state: ChainState, region_a: Region) -> SchmidtSpectrum:
    return schmidt_basis(state, region_a).spectrum


def dual_schmidt_cut(state: ChainState, region_b1: Region) -> SchmidtSpectrum:
    """Spectrum across ``B1 | A B2 C``; its cut-off uses ``l_A`` in the exponent."""
    return schmidt_cut(state, region_b1)


def cutoff(spectrum: SchmidtSpectrum, alpha: float, l_b: float, xi: float) -> Cutoff:
    """Count ``q`` of coefficients at or above ``2^{-alpha l_b / xi}`` and the mass ``Q`` below it."""
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    threshold = 2.0 ** (-alpha * l_b / xi)
    head = spectrum.p >= threshold
    q = int(np.count_nonzero(head))
    Q = float(spectrum.p[~head].sum()) if q < spectrum.M else 0.0
    if q == 0:
        Q = 1.0
    return Cutoff(alpha, threshold, q, Q)


def group_tail(spectrum: SchmidtSpectrum, alpha: float, l_b: float, xi: float) -> TailGrouping:
    """Pack the sub-threshold tail into groups of mass in ``[t, 2t)``.

    Greedy left to right: a group closes as soon as it reaches ``t``.  A
    final remainder below ``t`` is merged into the previous group when the
    merged mass stays at most ``2t``; otherwise it stays a group of its own.
    Every group is then at most ``2t``, which is what the entropy bound
    uses, and at most the last one falls below ``t``.
    """
    cut = cutoff(spectrum, alpha, l_b, xi)
    t = cut.threshold
    if cut.Q < t:
        raise PreconditionError(f"tail mass {cut.Q:.4g} below threshold {t:.4g}")
    p = spectrum.p
    bounds: list[tuple[int, int]] = [(i, i) for i in range(1, cut.q + 1)]
    tail: list[list[int]] = []
    current: list[int] = []
    mass = 0.0
    for i in range(cut.q, spectrum.M):
        current.append(i)
        mass += p[i]
        if mass >= t:
            tail.append(current)
            current, mass = [], 0.0
    if current:
        if tail and p[tail[-1] + current].sum() <= 2 * t:
            tail[-1] = tail[-1] + current
        else:
            tail.append(current)
    bounds += [(g[0] + 1, g[-1] + 1) for g in tail]
    masses = np.array([p[a - 1:b].sum() for a, b in bounds])
    return TailGrouping(masses, cut.q, tuple(bounds), t)


def projected_vector(state: ChainState, region_a: Region, m: int, n: int) -> tuple[np.ndarray, float]:
    """``P_mn |Psi> / sqrt(Q_mn)`` as a full vector, plus ``Q_mn``."""
    basis = schmidt_basis(state, region_a)
    M = basis.spectrum.M
    if not 1 <= m <= n <= M:
        raise DomainError(f"window ({m}, {n}) outside 1..{M}")
    qmn = basis.spectrum.window_mass(m, n)
    if qmn <= MASS_FLOOR:
        raise DomainError("window carries no Schmidt mass")
    uw = basis.u[:, m - 1:n]
    mat = uw @ (uw.conj().T @ state.matrix(region_a))
    vec = merge(mat, state.num_sites, as_region(region_a).sites) / np.sqrt(qmn)
    return vec, qmn


def project_tail_state(state: ChainState, partition: Partition, m: int, n: int) -> DensityOperator:
    """``rho_mn^C``: the state of ``C`` after projecting ``A`` onto Schmidt window ``m..n``."""
    vec, _ = projected_vector(state, partition.a, m, n)
    c = partition.c
    return DensityOperator(factor=split(vec, state.num_sites, c.sites), basis_region=c)
