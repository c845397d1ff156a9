"""Dense pure states of qubit chains.

Basis convention: site 0 is the least significant bit of the basis index, so
amplitude ``psi[b]`` belongs to the configuration with site ``k`` in state
``(b >> k) & 1``.  Reduced operators on a region use the same little-endian
convention restricted to the region's sorted sites.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as sla

from alaw.errors import DomainError, NumericError

MAX_SITES = 20
NORM_TOL = 1e-12
TRACE_TOL = 1e-10
HERMITIAN_TOL = 1e-12
CLIP_TOL = 1e-10

# Matrices up to this size are materialized; beyond it only factors are kept.
MATERIALIZE_DIM = 4096

STATE_MAGIC = b"ALAWSTAT"
_HEADER = struct.Struct("<8sII")


# ---------------------------------------------------------------------------
# Regions and partitions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Region:
    """A set of chain sites, stored sorted."""

    sites: tuple[int, ...]

    def __post_init__(self) -> None:
        sites = tuple(sorted({int(s) for s in self.sites}))
        object.__setattr__(self, "sites", sites)

    @classmethod
    def block(cls, start: int, length: int) -> Region:
        return cls(tuple(range(start, start + length)))

    def __len__(self) -> int:
        return len(self.sites)

    def __iter__(self) -> Iterator[int]:
        return iter(self.sites)

    def __contains__(self, site: object) -> bool:
        return site in self.sites

    def __or__(self, other: Region) -> Region:
        return Region(self.sites + tuple(other))

    @property
    def is_contiguous(self) -> bool:
        return not self.sites or self.sites[-1] - self.sites[0] + 1 == len(self.sites)

    def isdisjoint(self, other: Iterable[int]) -> bool:
        return set(self.sites).isdisjoint(other)

    def complement(self, num_sites: int) -> Region:
        return Region(tuple(s for s in range(num_sites) if s not in self.sites))

    def check(self, num_sites: int) -> None:
        if not self.sites:
            raise DomainError("region is empty")
        if self.sites[0] < 0 or self.sites[-1] >= num_sites:
            raise DomainError(f"region {self.sites} outside chain of {num_sites} sites")


def as_region(region: Region | Iterable[int]) -> Region:
    return region if isinstance(region, Region) else Region(tuple(region))


@dataclass(frozen=True)
class Partition:
    """Adjacent blocks ``left | A | right`` with ``C`` the rest of the chain.

    The smaller of the two flanking blocks is ``B1`` (ties go to the left
    block), so ``l_b1 <= l_b2`` holds by construction whichever side it sits
    on.  ``l_C`` is the effective size ``l_A + l_B``, not the physical size
    of ``C``.
    """

    num_sites: int
    left: Region
    a: Region
    right: Region

    def __post_init__(self) -> None:
        for block in (self.left, self.a, self.right):
            block.check(self.num_sites)
            if not block.is_contiguous:
                raise DomainError("partition blocks must be contiguous")
        if not (self.left.sites[-1] + 1 == self.a.sites[0]
                and self.a.sites[-1] + 1 == self.right.sites[0]):
            raise DomainError("partition blocks must be adjacent in order left, A, right")
        if len(self.left) + len(self.a) + len(self.right) >= self.num_sites:
            raise DomainError("partition leaves no room for region C")

    @classmethod
    def place(cls, num_sites: int, start: int, l_left: int, l_a: int, l_right: int) -> Partition:
        return cls(
            num_sites,
            Region.block(start, l_left),
            Region.block(start + l_left, l_a),
            Region.block(start + l_left + l_a, l_right),
        )

    @property
    def b1(self) -> Region:
        return self.left if len(self.left) <= len(self.right) else self.right

    @property
    def b2(self) -> Region:
        return self.right if len(self.left) <= len(self.right) else self.left

    @property
    def b(self) -> Region:
        return self.left | self.right

    @property
    def c(self) -> Region:
        return (self.left | self.a | self.right).complement(self.num_sites)

    @property
    def l_a(self) -> int:
        return len(self.a)

    @property
    def l_b1(self) -> int:
        return len(self.b1)

    @property
    def l_b2(self) -> int:
        return len(self.b2)

    @property
    def l_b(self) -> int:
        return self.l_b1

    @property
    def l_B(self) -> int:  # noqa: N802
        return self.l_b1 + self.l_b2

    @property
    def l_C(self) -> int:  # noqa: N802
        return self.l_a + self.l_B

    def describe(self) -> dict:
        return {
            "num_sites": self.num_sites,
            "left": list(self.left.sites),
            "a": list(self.a.sites),
            "right": list(self.right.sites),
            "l_b1": self.l_b1,
            "l_a": self.l_a,
            "l_b2": self.l_b2,
        }


def placements(num_sites: int, max_b: int, max_a: int, min_b: int = 1) -> Iterator[Partition]:
    """Every partition with flanking blocks in ``[min_b, max_b]`` and ``1 <= l_A <= max_a``."""
    for l_left in range(min_b, max_b + 1):
        for l_a in range(1, max_a + 1):
            for l_right in range(min_b, max_b + 1):
                total = l_left + l_a + l_right
                if total >= num_sites:
                    continue
                for start in range(0, num_sites - total + 1):
                    yield Partition.place(num_sites, start, l_left, l_a, l_right)


# ---------------------------------------------------------------------------
# Index gymnastics
# ---------------------------------------------------------------------------


def _axes(num_sites: int, sites: Sequence[int]) -> list[int]:
    # C-order reshape puts the most significant bit (highest site) on axis 0.
    return [num_sites - 1 - s for s in sorted(sites, reverse=True)]


def split(psi: np.ndarray, num_sites: int, sites: Sequence[int]) -> np.ndarray:
    """Reshape a state vector into a ``(2^|R|, 2^(N-|R|))`` matrix.

    Rows index the region ``sites`` and columns its complement, both in
    little-endian order.
    """
    sites = sorted(sites)
    rest = [s for s in range(num_sites) if s not in sites]
    perm = _axes(num_sites, sites) + _axes(num_sites, rest)
    tensor = np.asarray(psi).reshape((2,) * num_sites)
    return np.transpose(tensor, perm).reshape(1 << len(sites), -1)


def merge(matrix: np.ndarray, num_sites: int, sites: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`split`."""
    sites = sorted(sites)
    rest = [s for s in range(num_sites) if s not in sites]
    perm = _axes(num_sites, sites) + _axes(num_sites, rest)
    tensor = np.asarray(matrix).reshape((2,) * num_sites)
    return np.transpose(tensor, np.argsort(perm)).reshape(-1)


# ---------------------------------------------------------------------------
# States and density operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ChainState:
    """Normalized pure state of ``num_sites`` qubits on a line."""

    num_sites: int
    amplitudes: np.ndarray
    label: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        n = int(self.num_sites)
        if not 2 <= n <= MAX_SITES:
            raise DomainError(f"num_sites must lie in [2, {MAX_SITES}], got {n}")
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != 1 << n:
            raise DomainError(f"expected {1 << n} amplitudes, got {amps.size}")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise DomainError(f"state is not normalized (|psi|^2 = {norm2!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "num_sites", n)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return 1 << self.num_sites

    def matrix(self, region: Region | Iterable[int]) -> np.ndarray:
        """The amplitude matrix with rows on ``region`` (see :func:`split`)."""
        return split(self.amplitudes, self.num_sites, as_region(region).sites)


class DensityOperator:
    """A positive operator of unit trace on a region.

    Operators coming from pure states are stored as a factor ``F`` with
    ``rho = F F^dagger``; the full matrix is only formed on request, which
    keeps large complementary regions cheap.
    """

    def __init__(self, matrix: np.ndarray | None = None, *, factor: np.ndarray | None = None,
                 basis_region: Region | None = None, validate: bool = True) -> None:
        if (matrix is None) == (factor is None):
            raise ValueError("give exactly one of matrix or factor")
        self._matrix = None if matrix is None else np.asarray(matrix, dtype=np.complex128)
        self._factor = None if factor is None else np.asarray(factor, dtype=np.complex128)
        self.basis_region = basis_region
        if validate:
            self._validate()

    @classmethod
    def from_matrix(cls, matrix, basis_region: Region | None = None) -> DensityOperator:
        return cls(np.asarray(matrix, dtype=np.complex128), basis_region=basis_region)

    @property
    def dim(self) -> int:
        src = self._matrix if self._matrix is not None else self._factor
        return src.shape[0]

    @property
    def factor(self) -> np.ndarray | None:
        return self._factor

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            if self.dim > MATERIALIZE_DIM:
                raise DomainError(f"refusing to materialize a {self.dim}-dimensional operator")
            self._matrix = self._factor @ self._factor.conj().T
        return self._matrix

    def trace(self) -> float:
        if self._factor is not None:
            return float(np.vdot(self._factor, self._factor).real)
        return float(np.trace(self._matrix).real)

    def raw_eigenvalues(self) -> np.ndarray:
        """Eigenvalues (without clipping), nonzero part only when factored."""
        if self._factor is not None:
            f = self._factor
            gram = f.conj().T @ f if f.shape[1] <= f.shape[0] else f @ f.conj().T
            return np.linalg.eigvalsh(gram)
        return np.linalg.eigvalsh(self._matrix)

    def spectrum(self) -> tuple[np.ndarray, int]:
        """Clipped, renormalized eigenvalues and the number of clipped entries."""
        ev = self.raw_eigenvalues()
        if ev.min(initial=0.0) < -CLIP_TOL:
            raise NumericError(f"eigenvalue {ev.min()!r} below clip threshold {-CLIP_TOL}")
        clipped = int(np.count_nonzero(ev < 0))
        ev = np.clip(ev, 0.0, None)
        total = ev.sum()
        if total <= 0:
            raise NumericError("operator has vanishing trace")
        return ev / total, clipped

    def _validate(self) -> None:
        tr = self.trace()
        if abs(tr - 1.0) > TRACE_TOL:
            raise NumericError(f"trace {tr!r} deviates from 1")
        if self._matrix is not None:
            m = self._matrix
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise DomainError("density matrix must be square")
            if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
                raise NumericError("density matrix is not Hermitian")

    def __repr__(self) -> str:
        kind = "factored" if self._factor is not None else "dense"
        return f"DensityOperator(dim={self.dim}, {kind})"


def reduce(state: ChainState, region: Region | Iterable[int]) -> DensityOperator:
    """Partial trace of ``state`` onto ``region``."""
    region = as_region(region)
    region.check(state.num_sites)
    return DensityOperator(factor=state.matrix(region), basis_region=region)


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def _kron_sites(local: Sequence[np.ndarray]) -> np.ndarray:
    """Tensor product with ``local[0]`` on the least significant site."""
    out = np.ones(1, dtype=np.complex128)
    for vec in reversed(local):
        out = np.kron(out, vec)
    return out


def make_product(num_sites: int, local_angles: Sequence[float] | float = 0.0) -> ChainState:
    """Product state with site ``k`` in ``cos t_k |0> + sin t_k |1>``."""
    if num_sites < 2:
        raise DomainError("num_sites must be at least 2")
    angles = np.broadcast_to(np.asarray(local_angles, dtype=float), (num_sites,))
    local = [np.array([math.cos(t), math.sin(t)], dtype=np.complex128) for t in angles]
    psi = _kron_sites(local)
    psi /= np.linalg.norm(psi)
    return ChainState(num_sites, psi, label=f"product(N={num_sites})")


def make_bell_chain(num_pairs: int) -> ChainState:
    """Bell pairs on sites ``(2k, 2k+1)``."""
    if num_pairs < 1:
        raise DomainError("num_pairs must be at least 1")
    pair = np.array([1, 0, 0, 1], dtype=np.complex128) / math.sqrt(2)
    psi = _kron_sites([pair] * num_pairs)
    return ChainState(2 * num_pairs, psi, label=f"bell(pairs={num_pairs})")


def make_ghz(num_sites: int) -> ChainState:
    if num_sites < 2:
        raise DomainError("num_sites must be at least 2")
    psi = np.zeros(1 << num_sites, dtype=np.complex128)
    psi[0] = psi[-1] = 1 / math.sqrt(2)
    return ChainState(num_sites, psi, label=f"ghz(N={num_sites})")


def make_random_mps(num_sites: int, bond_dim: int, seed: int) -> ChainState:
    """Dense state of an open-boundary MPS with i.i.d. complex Gaussian tensors."""
    if bond_dim < 1:
        raise DomainError("bond_dim must be at least 1")
    if not 2 <= num_sites <= MAX_SITES:
        raise DomainError(f"num_sites must lie in [2, {MAX_SITES}]")
    rng = np.random.default_rng(seed)
    dims = [min(bond_dim, 2 ** k, 2 ** (num_sites - k)) for k in range(num_sites + 1)]
    vec = np.ones((1, 1), dtype=np.complex128)
    for k in range(num_sites):
        shape = (dims[k], 2, dims[k + 1])
        tensor = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        vec = (vec @ tensor.reshape(dims[k], -1)).reshape(-1, dims[k + 1])
    # Contraction order made site 0 the most significant index; flip it.
    psi = vec.reshape((2,) * num_sites).transpose(range(num_sites)[::-1]).reshape(-1)
    psi = psi / np.linalg.norm(psi)
    return ChainState(num_sites, psi, label=f"random_mps(N={num_sites},D={bond_dim},seed={seed})")


TFIM_MIN_SITES = 4
TFIM_MAX_SITES = 16
TFIM_TOL = 1e-10
TFIM_RESIDUAL = 1e-8


def tfim_hamiltonian(num_sites: int, field: float) -> sparse.csr_matrix:
    """``H = -sum Z_i Z_{i+1} - field * sum X_i`` with open boundaries."""
    dim = 1 << num_sites
    idx = np.arange(dim)
    bits = (idx[:, None] >> np.arange(num_sites)) & 1
    z = 1 - 2 * bits
    diag = -np.sum(z[:, :-1] * z[:, 1:], axis=1).astype(float)
    rows = [idx]
    cols = [idx]
    vals = [diag]
    for k in range(num_sites):
        rows.append(idx)
        cols.append(idx ^ (1 << k))
        vals.append(np.full(dim, -float(field)))
    return sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )


def make_tfim_ground(num_sites: int, field: float) -> ChainState:
    """Ground state of the open transverse-field Ising chain on the paramagnetic side.

    Solved with implicitly restarted Lanczos (ARPACK) from a fixed start
    vector; the matvec budget is ``10 * 2^N``.
    """
    if not TFIM_MIN_SITES <= num_sites <= TFIM_MAX_SITES:
        raise DomainError(f"num_sites must lie in [{TFIM_MIN_SITES}, {TFIM_MAX_SITES}]")
    if not field > 1:
        raise DomainError("field must exceed 1 (gapped paramagnetic side)")
    ham = tfim_hamiltonian(num_sites, field)
    dim = ham.shape[0]
    budget = 10 * dim
    calls = 0

    def matvec(v):
        nonlocal calls
        calls += 1
        if calls > budget:
            raise NumericError(f"eigensolver exceeded {budget} matvecs")
        return ham @ v

    op = sla.LinearOperator((dim, dim), matvec=matvec, dtype=float)
    ncv = min(dim - 1, 20)
    v0 = np.ones(dim) / math.sqrt(dim)
    try:
        vals, vecs = sla.eigsh(op, k=1, which="SA", tol=TFIM_TOL, ncv=ncv, v0=v0,
                               maxiter=max(1, budget // ncv))
    except sla.ArpackNoConvergence as exc:
        raise NumericError("TFIM ground state did not converge") from exc
    energy = float(vals[0])
    psi = vecs[:, 0]
    psi = psi / np.linalg.norm(psi)
    # Perron-Frobenius: the ground state is sign-definite in this basis.
    psi = psi * np.sign(psi[np.argmax(np.abs(psi))])
    residual = float(np.linalg.norm(ham @ psi - energy * psi))
    if residual > TFIM_RESIDUAL:
        raise NumericError(f"TFIM residual {residual:.3e} exceeds {TFIM_RESIDUAL}")
    state = ChainState(num_sites, psi.astype(np.complex128),
                       label=f"tfim(N={num_sites},h={field:g})")
    state._cache["energy"] = energy
    state._cache["residual"] = residual
    return state


# ---------------------------------------------------------------------------
# Binary state files
# ---------------------------------------------------------------------------


def save_state(path: str | Path, state: ChainState) -> None:
    """Write ``ALAWSTAT`` header plus little-endian (re, im) float64 pairs."""
    payload = np.asarray(state.amplitudes, dtype="<c16").tobytes()
    Path(path).write_bytes(_HEADER.pack(STATE_MAGIC, state.num_sites, 0) + payload)


def load_state(path: str | Path, label: str | None = None) -> ChainState:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise DomainError("state file truncated")
    magic, num_sites, _reserved = _HEADER.unpack_from(data)
    if magic != STATE_MAGIC:
        raise DomainError("not an ALAWSTAT file")
    if not 2 <= num_sites <= MAX_SITES:
        raise DomainError(f"bad site count {num_sites}")
    body = data[_HEADER.size:]
    if len(body) != 16 * (1 << num_sites):
        raise DomainError("state file has wrong payload length")
    amps = np.frombuffer(body, dtype="<c16").astype(np.complex128)
    return ChainState(num_sites, amps, label=label or Path(path).stem)
