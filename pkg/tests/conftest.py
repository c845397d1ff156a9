"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from alaw.qstate import ChainState, Partition

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_acceptance(number: int, passed: bool, detail: str = "") -> None:
    ACCEPTANCE[number] = (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")


def random_state(num_sites: int, seed: int) -> ChainState:
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal(1 << num_sites) + 1j * rng.standard_normal(1 << num_sites)
    return ChainState(num_sites, psi / np.linalg.norm(psi), label=f"haar(N={num_sites},{seed})")


def dense_reduce(psi: np.ndarray, num_sites: int, sites) -> np.ndarray:
    """Partial trace by explicit summation over basis indices (little-endian)."""
    sites = sorted(sites)
    rest = [s for s in range(num_sites) if s not in sites]
    k = len(sites)
    rho = np.zeros((1 << k, 1 << k), dtype=complex)
    for b in range(1 << num_sites):
        if psi[b] == 0:
            continue
        r = sum(((b >> s) & 1) << j for j, s in enumerate(sites))
        env = b & sum(1 << s for s in rest)
        for r2 in range(1 << k):
            b2 = env | sum(((r2 >> j) & 1) << s for j, s in enumerate(sites))
            rho[r, r2] += psi[b] * np.conj(psi[b2])
    return rho


def dense_entropy(rho: np.ndarray) -> float:
    ev = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    ev = ev[ev > 1e-14]
    return float(-np.sum(ev * np.log2(ev)))


def reduced_entropy_oracle(state: ChainState, sites) -> float:
    """Entropy of the explicit reduced operator on ``sites`` (never the complement)."""
    sites = sorted(sites)
    if not sites or len(sites) == state.num_sites:
        return 0.0
    tensor = state.amplitudes.reshape((2,) * state.num_sites)
    axes = [state.num_sites - 1 - s for s in sites]
    other = [a for a in range(state.num_sites) if a not in axes]
    m = np.transpose(tensor, sorted(axes, reverse=False) + other).reshape(1 << len(sites), -1)
    return dense_entropy(m @ m.conj().T)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = rank or dim
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_fannes_pairs(count: int = 100, seed: int = 2024):
    """Pairs ``(rho, sigma)`` with ``d <= 64`` and trace distance at most 1/2."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        d = int(rng.choice([2, 3, 4, 8, 16, 32, 64]))
        rho = random_density(d, rng, int(rng.integers(1, d + 1)))
        tau = random_density(d, rng, int(rng.integers(1, d + 1)))
        t = float(rng.uniform(0, 0.5))
        out.append((rho, (1 - t) * rho + t * tau))
    return out


def all_tripartitions(num_sites: int):
    for total in range(3, num_sites):
        for l_left in range(1, total - 1):
            for l_a in range(1, total - l_left):
                l_right = total - l_left - l_a
                for start in range(num_sites - total + 1):
                    yield Partition.place(num_sites, start, l_left, l_a, l_right)
