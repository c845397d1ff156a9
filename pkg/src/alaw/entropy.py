"""Entropies, distances and Fannes-type continuity bounds (all in bits)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from alaw.errors import DomainError, NumericError, PreconditionError
from alaw.qstate import (
    ChainState,
    DensityOperator,
    Partition,
    Region,
    as_region,
    reduce,
    split,
)

EIG_FLOOR = 1e-14
MI_FLOOR = 1e-9
TRACE_CHECK = 1e-8

#: max over p in [0, 1] of -p log2 p, attained at p = 1/e.
EPS_H = math.log2(math.e) / math.e


@dataclass(frozen=True)
class EntropyReport:
    value: float
    spectrum_used: np.ndarray
    clip_count: int


@dataclass(frozen=True)
class FannesParams:
    """Arguments of the continuity correction ``eps(L, l_b, alpha)``."""

    L: float
    l_b: int
    alpha: float
    xi: float = 1.0

    def __post_init__(self) -> None:
        if not 0 < self.alpha < 1:
            raise DomainError("alpha must lie in (0, 1)")
        if self.xi < 1:
            raise DomainError("xi must be at least 1")

    @property
    def hypothesis_met(self) -> bool:
        return (1 - self.alpha) * self.l_b >= self.xi


def eps_h() -> float:
    return EPS_H


def _entropy_from_probs(p: np.ndarray) -> float:
    p = p[p > EIG_FLOOR]
    return float(-np.sum(p * np.log2(p))) if p.size else 0.0


def shannon(p: Iterable[float]) -> float:
    """Base-2 Shannon entropy of a probability vector."""
    p = np.asarray(list(p) if not isinstance(p, np.ndarray) else p, dtype=float)
    if p.size and p.min() < -1e-12:
        raise DomainError(f"negative probability {p.min()!r}")
    if abs(p.sum() - 1.0) > 1e-10:
        raise DomainError(f"probabilities sum to {p.sum()!r}")
    return _entropy_from_probs(np.clip(p, 0.0, None))


def binary_entropy(x: float) -> float:
    return shannon([x, 1.0 - x])


def _as_density(rho) -> DensityOperator:
    return rho if isinstance(rho, DensityOperator) else DensityOperator.from_matrix(rho)


def von_neumann(rho: DensityOperator | np.ndarray) -> EntropyReport:
    rho = _as_density(rho)
    tr = rho.trace()
    if abs(tr - 1.0) > TRACE_CHECK:
        raise NumericError(f"trace {tr!r} deviates from 1 by more than {TRACE_CHECK}")
    spectrum, clipped = rho.spectrum()
    value = max(0.0, _entropy_from_probs(spectrum))
    return EntropyReport(value, spectrum, clipped)


def vector_entropy(psi: np.ndarray, num_sites: int, sites: Iterable[int]) -> float:
    """Entanglement entropy of ``sites`` for an arbitrary normalized vector."""
    sites = sorted(set(sites))
    if not sites or len(sites) == num_sites:
        return 0.0
    if 2 * len(sites) > num_sites:
        sites = [s for s in range(num_sites) if s not in sites]
    f = split(psi, num_sites, sites)
    gram = f @ f.conj().T
    ev = np.clip(np.linalg.eigvalsh(gram), 0.0, None)
    return _entropy_from_probs(ev / ev.sum())


def entropy_of(state: ChainState, region: Region | Iterable[int]) -> float:
    """``S(region)`` for a pure chain state, memoized on the state.

    Uses the smaller of the region and its complement; the empty region and
    the whole chain both have zero entropy.
    """
    key = ("S", as_region(region).sites)
    cache = state._cache
    if key not in cache:
        cache[key] = vector_entropy(state.amplitudes, state.num_sites, key[1])
    return cache[key]


def mutual_information(state: ChainState, r1: Region | Iterable[int],
                       r2: Region | Iterable[int]) -> float:
    """``I(r1:r2) = S(r1) + S(r2) - S(r1 r2)``, clamped at 0 within ``MI_FLOOR``."""
    r1, r2 = as_region(r1), as_region(r2)
    if not r1.isdisjoint(r2):
        raise DomainError("regions overlap")
    value = entropy_of(state, r1) + entropy_of(state, r2) - entropy_of(state, r1 | r2)
    if -MI_FLOOR <= value < 0:
        return 0.0
    return value


def raw_mutual_information(state: ChainState, r1, r2) -> float:
    """Mutual information without the small-negative clamp (for exact identities)."""
    r1, r2 = as_region(r1), as_region(r2)
    return entropy_of(state, r1) + entropy_of(state, r2) - entropy_of(state, r1 | r2)


def _difference_eigenvalues(rho: DensityOperator, sigma: DensityOperator) -> np.ndarray:
    fr, fs = rho.factor, sigma.factor
    if fr is not None and fs is not None and fr.shape[1] + fs.shape[1] < fr.shape[0]:
        # rho - sigma = K J K^dagger with K = [fr, fs], J = diag(1, -1); only
        # the (r1 + r2)-dimensional column space of K carries spectrum.
        k = np.hstack([fr, fs])
        _, r = np.linalg.qr(k)
        j = np.concatenate([np.ones(fr.shape[1]), -np.ones(fs.shape[1])])
        core = (r * j) @ r.conj().T
        return np.linalg.eigvalsh((core + core.conj().T) / 2)
    return np.linalg.eigvalsh(rho.matrix - sigma.matrix)


def trace_distance(rho: DensityOperator | np.ndarray, sigma: DensityOperator | np.ndarray) -> float:
    """``(1/2) ||rho - sigma||_1``."""
    rho, sigma = _as_density(rho), _as_density(sigma)
    if rho.dim != sigma.dim:
        raise DomainError(f"dimension mismatch {rho.dim} vs {sigma.dim}")
    return 0.5 * float(np.sum(np.abs(_difference_eigenvalues(rho, sigma))))


def fannes_eps(L: float, l_b: float, alpha: float, xi: float = 1.0, prefactor: float = 1.0) -> float:
    """``{L + 2(1 - alpha) l_b} 2^{-(1 - alpha) l_b / xi}``.

    ``prefactor >= 1`` multiplies the result; that is how a correlation
    bound of the form ``P * 2^{-l/xi}`` enters the continuity correction.
    """
    x = (1 - alpha) * l_b
    return prefactor * (L + 2 * x) * 2.0 ** (-x / xi)


def fannes_params_eps(params: FannesParams) -> float:
    return fannes_eps(params.L, params.l_b, params.alpha, params.xi)


def fannes_rhs(distance: float, dim: int) -> float:
    """Right side ``e (log d - 2 log e)`` of the modified Fannes inequality."""
    if distance <= 0:
        return 0.0
    return distance * (math.log2(dim) - 2 * math.log2(distance))


def modified_fannes_sides(rho, sigma) -> tuple[float, float, float]:
    """Return ``(|S(rho) - S(sigma)|, bound, trace distance)``."""
    rho, sigma = _as_density(rho), _as_density(sigma)
    dist = trace_distance(rho, sigma)
    if dist > 0.5:
        raise PreconditionError(f"trace distance {dist:.4g} exceeds 1/2")
    lhs = abs(von_neumann(rho).value - von_neumann(sigma).value)
    return lhs, fannes_rhs(dist, rho.dim), dist


def modified_fannes_check(rho, sigma, tol: float = 1e-9) -> bool:
    lhs, rhs, _ = modified_fannes_sides(rho, sigma)
    return lhs <= rhs + tol


def f_deficit(state: ChainState, partition: Partition) -> float:
    """``f(B1:A:B2) = I(A:C) - I(B1:B2)``, unclamped."""
    return (raw_mutual_information(state, partition.a, partition.c)
            - raw_mutual_information(state, partition.b1, partition.b2))


def partition_identity_residual(state: ChainState, partition: Partition) -> float:
    """``S(B1 A B2) - [S(B1) - S(A) + S(B2) + f]``; zero for every pure state."""
    p = partition
    lhs = entropy_of(state, p.b1 | p.a | p.b2)
    rhs = (entropy_of(state, p.b1) - entropy_of(state, p.a) + entropy_of(state, p.b2)
           + f_deficit(state, p))
    return lhs - rhs


def reduced_entropy(state: ChainState, region) -> EntropyReport:
    """Entropy report computed from the explicit reduced operator."""
    return von_neumann(reduce(state, region))
