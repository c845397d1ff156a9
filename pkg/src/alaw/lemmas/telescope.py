"""The nested end-region layout, its exact entropy identity, eta scans and Lemma 7."""

from __future__ import annotations

from dataclasses import dataclass

from alaw.entropy import entropy_of, raw_mutual_information
from alaw.errors import DomainError
from alaw.lemmas.common import NO_ASSUMPTION, LemmaVerdict, exact, max_block_entropy
from alaw.qstate import ChainState, Region


@dataclass(frozen=True)
class TelescopeLayout:
    """A region of ``4 l_n`` sites starting at ``start`` with scales ``l_i = 3^i l0``.

    The left end is cut into ``A1, A2, A3`` and the right end, read from
    the outside in, into ``B1, B2, B3`` at every level ``i <= n``; level
    ``i`` blocks have ``l_i`` sites and ``A1^(i)`` is the union of the three
    level ``i-1`` blocks on the left (mirrored on the right).
    """

    l0: int
    n: int
    start: int = 0

    def __post_init__(self) -> None:
        if self.l0 < 1 or self.n < 0 or self.start < 0:
            raise DomainError("need l0 >= 1, n >= 0, start >= 0")

    def scale(self, i: int) -> int:
        return 3 ** i * self.l0

    @property
    def length(self) -> int:
        return 4 * self.scale(self.n)

    @property
    def end(self) -> int:
        return self.start + self.length

    def block(self, name: str, i: int) -> Region:
        """``name`` in ``A1 A2 A3 B1 B2 B3`` at level ``i``."""
        li = self.scale(i)
        side, k = name[0], int(name[1])
        if side == "A":
            return Region.block(self.start + (k - 1) * li, li)
        if side == "B":
            return Region.block(self.end - k * li, li)
        raise DomainError(f"unknown block {name!r}")

    @property
    def region(self) -> Region:
        return Region.block(self.start, self.length)

    def blocks(self) -> dict[str, list[list[int]]]:
        return {f"{name}^{i}": list(self.block(name, i).sites)
                for i in range(self.n + 1) for name in ("A1", "A2", "A3", "B1", "B2", "B3")}

    def check(self, num_sites: int) -> None:
        if self.end > num_sites:
            raise DomainError(f"layout needs {self.end} sites, chain has {num_sites}")
        if self.length >= num_sites:
            raise DomainError("layout leaves no complement")


def f_term(state: ChainState, x: Region, y: Region, z: Region) -> float:
    """``f(X:Y:Z) = I(Y : rest) - I(X:Z)`` with ``rest`` the complement of ``XYZ``."""
    rest = (x | y | z).complement(state.num_sites)
    mi_yc = raw_mutual_information(state, y, rest) if len(rest) else 0.0
    return mi_yc - raw_mutual_information(state, x, z)


def _decompositions(layout: TelescopeLayout):
    """Every ``(X, Y, Z)`` triple used in the two top-level and ``4n`` nested splittings."""
    b = layout.block
    n = layout.n
    yield b("A1", n) | b("A2", n), b("B2", n), b("B1", n)
    yield b("A1", n), b("A2", n), b("B2", n) | b("B1", n)
    for i in range(1, n + 1):
        j = i - 1
        yield b("A1", j) | b("A2", j), b("A3", j), b("A2", i)
        yield b("A1", j), b("A2", j), b("A3", j)
        yield b("B3", j), b("B2", j), b("B1", j)
        yield b("B2", i), b("B3", j), b("B2", j) | b("B1", j)


def telescope_identity(state: ChainState, layout: TelescopeLayout) -> dict:
    """Both sides of the summed splitting identity and their difference."""
    layout.check(state.num_sites)
    b = layout.block
    S = lambda r: entropy_of(state, r)  # noqa: E731
    lhs = S(layout.region)
    a1, a2, b1, b2 = b("A1", 0), b("A2", 0), b("B1", 0), b("B2", 0)
    f_sum = sum(f_term(state, *t) for t in _decompositions(layout))
    mi_a = raw_mutual_information(state, a1, a2)
    mi_b = raw_mutual_information(state, b2, b1)
    rhs = S(a1) + S(b1) - 0.5 * (mi_a + mi_b) + 0.5 * f_sum
    return {"lhs": lhs, "rhs": rhs, "residual": lhs - rhs, "f_sum": f_sum,
            "boundary": {"S_A1": S(a1), "S_B1": S(b1), "I_A1A2": mi_a, "I_B2B1": mi_b},
            "layout": {"l0": layout.l0, "n": layout.n, "start": layout.start}}


def check_telescope(state: ChainState, layout: TelescopeLayout) -> LemmaVerdict:
    rep = telescope_identity(state, layout)
    return exact("identity.telescope", rep["residual"],
                 {"state": state.label, **rep["layout"]})


@dataclass(frozen=True)
class EtaEstimate:
    l1: int
    l2: int
    l3: int
    value: float
    placements_scanned: int


def eta(state: ChainState, l1: int, l2: int, l3: int) -> EtaEstimate:
    """Maximum of ``I(A:C)`` over in-chain placements of ``B1 A B2`` with these sizes.

    Both orientations are scanned (``l1`` on the left and on the right),
    since ``l_{B1}`` names the smaller flank whichever side it is on.  A
    placement filling the chain has empty ``C`` and contributes zero.
    """
    n = state.num_sites
    total = l1 + l2 + l3
    if min(l1, l2, l3) < 1:
        raise DomainError("block sizes must be positive")
    if total > n:
        raise DomainError(f"sizes {l1, l2, l3} exceed the {n}-site chain")
    best, scanned = 0.0, 0
    orders = {(l1, l3), (l3, l1)}
    for left, right in sorted(orders):
        for start in range(n - total + 1):
            a = Region.block(start + left, l2)
            c = Region.block(start, total).complement(n)
            scanned += 1
            if len(c):
                best = max(best, raw_mutual_information(state, a, c))
    return EtaEstimate(l1, l2, l3, max(best, 0.0), scanned)


def check_lemma7(state: ChainState, l0: int, n: int) -> LemmaVerdict:
    """``S(4 l_n) <= 2 S(l0) + eta(l_n, l_n, 2 l_n) + sum_{i<n} lambda_i`` on the finite chain.

    ``S(l)`` and ``eta`` are in-chain maxima, so both sides are the
    finite-chain analogues of the chain-wide suprema.
    """
    layout = TelescopeLayout(l0, n)
    layout.check(state.num_sites)
    ln = layout.scale(n)
    lhs = max_block_entropy(state, 4 * ln)
    terms = {"S_l0": max_block_entropy(state, l0), "eta_top": eta(state, ln, ln, 2 * ln).value}
    lambdas = []
    for i in range(n):
        li = layout.scale(i)
        lambdas.append(eta(state, 2 * li, li, 3 * li).value + eta(state, li, li, li).value)
    rhs = 2 * terms["S_l0"] + terms["eta_top"] + sum(lambdas)
    ctx = {"state": state.label, "l0": l0, "n": n, **terms, "lambdas": lambdas,
           "assumption": NO_ASSUMPTION, "S_source": "in-chain maximum"}
    return LemmaVerdict("lemma7", lhs, rhs, True, True, ctx)
