"""Analytic area-law bound with an audit trail.

All entropy densities are tracked in units of ``alpha0 / xi`` where that
makes the recursion parameter free; ``sigma`` denotes such a reduced
density.  Lengths are in sites, entropies in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from alaw.entropy import EPS_H
from alaw.errors import DomainError, InternalConsistencyError

ALPHA0_MIN = 2.0 / 3.0
PHASE2_STEPS = 8
TARGET_DENOM = 27  # saturation target sbar(l0) < alpha0 / (27 xi)
LADDER_RATIO = 2.0 / 9.0
LADDER_Q = 7.0
REFERENCE_COEFF = 0.1513
REFERENCE_CONST = 5.893
ENVELOPE = 0.02
DEFAULT_DEPTH = 64
RESIDUAL_SHARE = 1e-6
EPS_SHARE = 0.01
ALPHA0_EXPLICIT = 10.0 / 11.0


@dataclass(frozen=True)
class BoundParams:
    xi: float
    alpha0: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.xi) or self.xi < 1:
            raise DomainError(f"xi must be a finite number >= 1, got {self.xi}")
        if not (ALPHA0_MIN - 1e-12 <= self.alpha0 < 1):
            raise DomainError(f"alpha0 must lie in [2/3, 1), got {self.alpha0}")

    @property
    def log_term(self) -> float:
        """``log2(xi / (1 - alpha0)) + 3``."""
        return math.log2(self.xi / (1 - self.alpha0)) + 3

    @property
    def unit(self) -> float:
        """``alpha0 / xi``: the natural density scale."""
        return self.alpha0 / self.xi


def unit_length(params: BoundParams) -> float:
    """``ell0 = (2 xi / (1 - alpha0)) (log2(xi / (1 - alpha0)) + 3)``."""
    return 2 * params.xi / (1 - params.alpha0) * params.log_term


def crossover(Q_c: float, params: BoundParams) -> float:
    return Q_c * (1 - Q_c) * params.alpha0 / (2 * (1 - 2 * Q_c) * params.xi)


def lemma8_step(s_bar: float, Q_c: float, params: BoundParams) -> float:
    """Next-scale density bound: subtractive branch above the crossover, divisive below."""
    if not 0 < Q_c < 0.5:
        raise DomainError(f"Q_c must lie in (0, 1/2), got {Q_c}")
    if s_bar >= crossover(Q_c, params):
        return s_bar - Q_c * params.alpha0 / (4 * params.xi)
    return s_bar / (2 * (1 - Q_c))


def optimal_Qc(s_bar: float, params: BoundParams) -> float:  # noqa: N802
    """The ``Q_c`` in ``(0, 1/2)`` whose crossover equals ``s_bar``.

    Smaller root of ``Q^2 - (1 + 2c) Q + c = 0`` with ``c = 2 xi s_bar / alpha0``,
    evaluated as ``2c / ((1 + 2c) + sqrt(...))`` to keep precision at small ``c``.
    """
    if s_bar <= 0:
        raise DomainError("s_bar must be positive")
    c = 2 * params.xi * s_bar / params.alpha0
    b = 1 + 2 * c
    return 2 * c / (b + math.sqrt(b * b - 4 * c))


def lemma9_cap(params: BoundParams) -> int:
    """``ceil((10 xi / alpha0)(1 + eps_h / ell0)) + 2``."""
    return _phase1_budget(params) + 2


def _phase1_budget(params: BoundParams) -> int:
    return math.ceil(10 * params.xi / params.alpha0 * (1 + EPS_H / unit_length(params)))


def theorem_cap(params: BoundParams) -> int:
    """``ceil(10 xi/alpha0 + ((1 - alpha0)/alpha0) 3 / (log2 xi - log2(1 - alpha0) + 3)) + 2``."""
    a = params.alpha0
    return math.ceil(10 * params.xi / a + (1 - a) / a * 3 / params.log_term) + 2


def check_unit_length(params: BoundParams) -> dict:
    """``eps(4 ell0, ell0, alpha0) <= (7/6) log2(g)/g < eps_h`` with ``g = 8 xi/(1 - alpha0)``."""
    from alaw.entropy import fannes_eps

    ell0 = unit_length(params)
    g = 8 * params.xi / (1 - params.alpha0)
    eps = fannes_eps(4 * ell0, ell0, params.alpha0, params.xi)
    mid = 7 / 6 * math.log2(g) / g
    ok = g >= 24 - 1e-9 and eps <= mid * (1 + 1e-12) and mid < EPS_H
    if not ok:
        raise InternalConsistencyError(f"unit length check failed: eps={eps}, bound={mid}, g={g}")
    return {"g": g, "eps": eps, "bound": mid}


@dataclass(frozen=True)
class DescentStep:
    n: int
    s_bar: float
    Q_c: float | None
    phase: int


@dataclass(frozen=True)
class Saturation:
    n0: int
    n0_prime: int
    ell0: float
    l0: float
    s_bar_l0: float
    descent: tuple[DescentStep, ...]
    caps: dict


def find_saturation(params: BoundParams, greedy: bool = False) -> Saturation:
    """Descend from ``1 + eps_h/ell0`` to below ``alpha0/(27 xi)``.

    Phase one applies the subtractive step with ``Q_c = 2/5`` until the bound
    reaches ``3 alpha0 / 5 xi``.  Phase two restarts from that value and
    takes eight steps with the crossover-matched ``Q_c`` (or stops at the
    target when ``greedy``).
    """
    ell0 = unit_length(params)
    unit = params.unit
    s = 1 + EPS_H / ell0
    steps = [DescentStep(0, s, None, 1)]
    n = 0
    switch = 3 * unit / 5
    while s > switch:
        s = lemma8_step(s, 0.4, params)
        n += 1
        steps.append(DescentStep(n, s, 0.4, 1))
    n0_prime = n
    budget = _phase1_budget(params) - 6
    if n0_prime > budget:
        raise InternalConsistencyError(f"phase one took {n0_prime} steps, budget {budget}")
    target = unit / TARGET_DENOM
    s = switch
    for _ in range(PHASE2_STEPS):
        if greedy and s < target:
            break
        q = optimal_Qc(s, params)
        s = s / (2 * (1 - q))
        n += 1
        steps.append(DescentStep(n, s, q, 2))
    if not s < target:
        raise InternalConsistencyError(f"refinement ended at {s / unit:.6f} alpha0/xi, above 1/27")
    caps = {"lemma9": lemma9_cap(params), "theorem": theorem_cap(params)}
    if n > caps["lemma9"] or n > caps["theorem"] or caps["lemma9"] > caps["theorem"]:
        raise InternalConsistencyError(f"n0 = {n} against caps {caps}")
    return Saturation(n, n0_prime, ell0, 4.0 ** n * ell0, s, tuple(steps), caps)


def round_sig(x: float, digits: int = 2, mode: str = "nearest") -> float:
    """Round to ``digits`` significant digits; ``mode`` is ``nearest`` or ``up``."""
    if x == 0:
        return 0.0
    exp = math.floor(math.log10(abs(x))) - digits + 1
    scaled = x / 10.0 ** exp
    if mode == "up":
        # Guard against representation noise sitting just above an integer.
        r = math.ceil(scaled - 1e-9)
    elif mode == "nearest":
        r = math.floor(scaled + 0.5)
    else:
        raise DomainError(f"unknown rounding mode {mode!r}")
    return round(r * 10.0 ** exp, max(0, -exp))


def refinement_chain(sat: Saturation, params: BoundParams) -> dict:
    """Phase-two values in ``alpha0/xi`` units, raw and as printed to two figures.

    Density bounds are rounded up (they are upper bounds); ``Q_c`` to nearest.
    """
    phase2 = [st for st in sat.descent if st.phase == 2]
    s = [st.s_bar / params.unit for st in phase2]
    q = [st.Q_c for st in phase2]
    return {
        "s_bar": s,
        "Q_c": q,
        "s_bar_printed": [round_sig(v, 2, "up") for v in s],
        "Q_c_printed": [round_sig(v, 2, "nearest") for v in q],
    }


# ---------------------------------------------------------------------------
# second step: ladder, eta bounds, lambda sum
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Rung:
    m: int
    sigma: float  # sbar(l_{2m}) in units of alpha0/xi
    s_bar: float  # bits per site
    Q: float  # bound on Q_{2m}


def ladder(params: BoundParams, s_bar_l0: float, depth: int = DEFAULT_DEPTH,
           geometric: bool = False) -> tuple[Rung, ...]:
    """``Q_{2m} <= (7 xi/alpha0) sbar_{2m}``, ``sbar_{2m+2} <= (2/9) sbar_{2m} / (1 - Q_{2m})``.

    ``geometric`` freezes the ratio at its ``m = 0`` value instead of
    following the recursion, which is the looser ``gamma0^m`` envelope.
    """
    unit = params.unit
    sigma0 = s_bar_l0 / unit
    if sigma0 > 1 / TARGET_DENOM * (1 + 1e-12):
        raise DomainError("initial density must not exceed alpha0/(27 xi)")
    sigma = sigma0
    ratio0 = LADDER_RATIO / (1 - LADDER_Q * sigma0)
    rungs = []
    for m in range(depth + 1):
        q = LADDER_Q * sigma
        if q >= 1:
            raise InternalConsistencyError(f"Q_{2 * m} bound reached {q}")
        rungs.append(Rung(m, sigma, sigma * unit, q))
        sigma = sigma * ratio0 if geometric else LADDER_RATIO * sigma / (1 - q)
    return tuple(rungs)


@dataclass(frozen=True)
class EtaTerm:
    """Bound on ``lambda_i`` as ``coeff (alpha0/xi) l0 + const``."""

    i: int
    coeff: float
    const: float
    value: float


def _slog(x: float) -> float:
    return x * math.log2(x) if x > 0 else 0.0


def eta_bounds(params: BoundParams, rungs: tuple[Rung, ...], l0: float) -> tuple[EtaTerm, ...]:
    """``lambda_{2m}`` and ``lambda_{2m+1}`` bounds for ``m < len(rungs) - 1``.

    Per scale ``l = l_{2m} = 9^m l0`` and ``sigma = sigma_m``:
    ``eta(2l,l,3l) <= 12 sigma^2 (alpha0/xi) l - 4 sigma log2 sigma`` and
    ``eta(l,l,l) <= 12 sigma^2 (alpha0/xi) l - 8 sigma log2(2 sigma)``; the odd
    pair replaces ``12 sigma^2 l`` by ``4 sigma_m sigma_{m+1} l_{2m+2}``.
    """
    unit_l0 = params.unit * l0
    terms = []
    for r, nxt in zip(rungs, rungs[1:]):
        s, s1, w = r.sigma, nxt.sigma, 9.0 ** r.m
        const = -4 * _slog(s) - 4 * _slog(2 * s)
        even = 24 * s * s * w
        odd = 2 * 4 * s * s1 * 9 * w
        terms.append(EtaTerm(2 * r.m, even, const, even * unit_l0 + const))
        terms.append(EtaTerm(2 * r.m + 1, odd, const, odd * unit_l0 + const))
    return tuple(terms)


def top_residual(params: BoundParams, rung: Rung, l0: float) -> float:
    """``eta(l, l, 2l) <= 16 sigma^2 (alpha0/xi) l - 8 sigma log2(2 sigma)`` at ``l = 9^m l0``."""
    s = rung.sigma
    return 16 * s * s * 9.0 ** rung.m * params.unit * l0 - 4 * _slog(2 * s)


@dataclass(frozen=True)
class LambdaSum:
    coeff: float
    const: float
    depth: int
    terms: tuple[EtaTerm, ...]
    rungs: tuple[Rung, ...]
    geometric: bool

    def value(self, params: BoundParams, l0: float) -> float:
        return self.coeff * params.unit * l0 + self.const

    @property
    def within_envelope(self) -> bool:
        return (self.coeff <= REFERENCE_COEFF * (1 + ENVELOPE)
                and self.const <= REFERENCE_CONST * (1 + ENVELOPE))


def lambda_sum(params: BoundParams, depth: int = DEFAULT_DEPTH, geometric: bool = False,
               s_bar_l0: float | None = None, l0: float = 1.0, max_depth: int = 4096,
               tol: float = 1e-10) -> LambdaSum:
    """Sum the lambda bounds; the initial density defaults to ``alpha0/(27 xi)``.

    The depth doubles until the last level contributes below ``tol`` of the total.
    """
    if s_bar_l0 is None:
        s_bar_l0 = params.unit / TARGET_DENOM
    while True:
        rungs = ladder(params, s_bar_l0, depth, geometric)
        terms = eta_bounds(params, rungs, l0)
        coeff = math.fsum(t.coeff for t in terms)
        const = math.fsum(t.const for t in terms)
        last = terms[-2:]
        if (sum(t.coeff for t in last) <= tol * coeff
                and sum(abs(t.const) for t in last) <= tol * const):
            return LambdaSum(coeff, const, depth, terms, rungs, geometric)
        if depth >= max_depth:
            raise InternalConsistencyError(f"lambda series not converged at depth {depth}")
        depth *= 2


def _log2_eps(L: float, l_b: float, alpha: float, xi: float) -> float:
    x = (1 - alpha) * l_b
    return math.log2(L + 2 * x) - x / xi


def _log2_sum(*logs: float) -> float:
    top = max(logs)
    return top + math.log2(sum(2.0 ** (v - top) for v in logs))


def check_eps_corrections(params: BoundParams, lam: LambdaSum, l0: float) -> dict:
    """Dropped continuity corrections stay below 1% of each retained eta bound.

    Evaluated at the actual scales ``l_i = 3^i l0``; each correction is
    ``2 eps(l_C, l_b, alpha0/2) + eps(l_B + l_b, l_b, alpha0)`` for the
    corresponding block sizes.
    """
    a, xi = params.alpha0, params.xi
    worst = -math.inf
    unit_l0 = params.unit * l0
    for r, nxt in zip(lam.rungs, lam.rungs[1:]):
        s, s1, w = r.sigma, nxt.sigma, 9.0 ** r.m
        for parity in (0, 1):
            l = w * l0 * (3 if parity else 1)
            sq = 12 * s * s * w if parity == 0 else 4 * s * s1 * 9 * w
            retained = {
                "2,1,3": sq * unit_l0 - 4 * _slog(s),
                "1,1,1": sq * unit_l0 - 4 * _slog(2 * s),
            }
            corr = {
                "2,1,3": _log2_sum(1 + _log2_eps(6 * l, 2 * l, a / 2, xi), _log2_eps(7 * l, 2 * l, a, xi)),
                "1,1,1": _log2_sum(1 + _log2_eps(3 * l, l, a / 2, xi), _log2_eps(3 * l, l, a, xi)),
            }
            for key in retained:
                worst = max(worst, corr[key] - math.log2(retained[key]))
    ratio = 2.0 ** worst
    if not ratio < EPS_SHARE:
        raise InternalConsistencyError(f"continuity corrections reach {ratio:.3g} of retained terms")
    return {"max_ratio": ratio, "log2_max_ratio": worst}


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def lemma9_entropy_bound(params: BoundParams, n0: int) -> float:
    """``S(l0) < (2 alpha0 / 27(1 - alpha0)) (log2(xi/(1-alpha0)) + 3) 4^n0``."""
    return 2 * params.alpha0 / (27 * (1 - params.alpha0)) * params.log_term * 4.0 ** n0


def _core(params: BoundParams, n0: int) -> float:
    return params.alpha0 / (1 - params.alpha0) * params.log_term * 4.0 ** n0


def lemma10_bound(params: BoundParams, n0: int | None = None) -> float:
    """``(alpha0 / 2(1 - alpha0)) (log2(xi/(1-alpha0)) + 3) 4^n0 + 6``."""
    if n0 is None:
        n0 = find_saturation(params).n0
    return _core(params, n0) / 2 + 6


def theorem_bound(params: BoundParams, n0: int | None = None) -> float:
    """``(alpha0/(1 - alpha0)) (log2(xi/(1-alpha0)) + 3) 4^n0 + 12``, ``n0`` at the theorem cap."""
    if n0 is None:
        n0 = theorem_cap(params)
    return _core(params, n0) + 12


def explicit_exponent(xi: float) -> int:
    return math.ceil(11 * xi + 0.05)


def explicit_bound(xi: float) -> float:
    """``160 (log2 xi + 6.5) 4^{ceil(11 xi + 0.05)} + 12``."""
    return 160 * (math.log2(xi) + 6.5) * 4.0 ** explicit_exponent(xi) + 12


# ---------------------------------------------------------------------------
# full trace
# ---------------------------------------------------------------------------


@dataclass
class BoundTrace:
    params: BoundParams
    ell0: float
    descent: tuple[DescentStep, ...]
    n0: int
    n0_prime: int
    l0: float
    s_bar_l0: float
    ladder: tuple[Rung, ...]
    eta_terms: tuple[EtaTerm, ...]
    lambda_coeff: float
    lambda_const: float
    lambda_sum: float
    residual: float
    lemma9_entropy: float
    assembly: float
    lemma10_bound: float
    theorem_bound: float
    theorem_n0: int
    checks: dict = field(default_factory=dict)
    explicit: dict | None = None

    def summary(self) -> dict:
        out = {
            "xi": self.params.xi,
            "alpha0": self.params.alpha0,
            "ell0": self.ell0,
            "n0": self.n0,
            "l0": self.l0,
            "s_bar_l0": self.s_bar_l0,
            "lambda_coeff": self.lambda_coeff,
            "lambda_const": self.lambda_const,
            "lemma10": self.lemma10_bound,
            "theorem": self.theorem_bound,
        }
        if self.explicit is not None:
            out["explicit_form"] = self.explicit
        return out

    def to_dict(self) -> dict:
        out = self.summary()
        out.update({
            "n0_prime": self.n0_prime,
            "theorem_n0": self.theorem_n0,
            "lambda_sum": self.lambda_sum,
            "residual_eta": self.residual,
            "lemma9_entropy": self.lemma9_entropy,
            "assembly": self.assembly,
            "checks": self.checks,
        })
        return out

    def descent_rows(self) -> list[dict]:
        u = self.params.unit
        return [{"n": s.n, "phase": s.phase, "s_bar": s.s_bar, "s_bar_units": s.s_bar / u,
                 "Q_c": "" if s.Q_c is None else s.Q_c} for s in self.descent]

    def ladder_rows(self) -> list[dict]:
        terms = {t.i: t for t in self.eta_terms}
        rows = []
        for r in self.ladder:
            ev, od = terms.get(2 * r.m), terms.get(2 * r.m + 1)
            rows.append({"m": r.m, "sigma": r.sigma, "s_bar": r.s_bar, "Q": r.Q,
                         "lambda_even": "" if ev is None else ev.value,
                         "lambda_odd": "" if od is None else od.value})
        return rows


def compute_bound(params: BoundParams, depth: int = DEFAULT_DEPTH, greedy: bool = False,
                  geometric: bool = False, max_depth: int = 1024) -> BoundTrace:
    """Run both steps, assemble Lemma 10 and the theorem, and check every internal claim."""
    checks = {"unit_length": check_unit_length(params)}
    sat = find_saturation(params, greedy=greedy)
    checks["caps"] = sat.caps
    while True:
        lam = lambda_sum(params, depth, geometric)
        depth = lam.depth
        residual = top_residual(params, lam.rungs[-1], sat.l0)
        s_l0 = lemma9_entropy_bound(params, sat.n0)
        lam_value = lam.value(params, sat.l0)
        assembly = 2 * s_l0 + lam_value + residual
        if residual < RESIDUAL_SHARE * assembly:
            break
        if depth >= max_depth:
            raise InternalConsistencyError("top residual did not become negligible")
        depth *= 2
    if not geometric and not lam.within_envelope:
        raise InternalConsistencyError(
            f"lambda sum ({lam.coeff:.6g}, {lam.const:.6g}) outside the reference envelope")
    checks["eps_corrections"] = check_eps_corrections(params, lam, sat.l0)
    checks["depth"] = depth
    checks["within_envelope"] = lam.within_envelope
    l10 = lemma10_bound(params, sat.n0)
    checks["assembly_closes"] = assembly <= l10
    if assembly > l10 and not geometric:
        raise InternalConsistencyError(f"assembled bound {assembly:.6g} exceeds Lemma 10 {l10:.6g}")
    checks["assembly_coefficient"] = 4 / 27 + 2 * lam.coeff
    t_n0 = theorem_cap(params)
    thm = theorem_bound(params, t_n0)
    doubling = thm - 2 * lemma10_bound(params, t_n0)
    if abs(doubling) > 1e-9 * thm:
        raise InternalConsistencyError("theorem is not twice the Lemma 10 form")
    checks["doubling_residual"] = doubling
    explicit = None
    if abs(params.alpha0 - ALPHA0_EXPLICIT) < 1e-4:
        value = explicit_bound(params.xi)
        if thm > value:
            raise InternalConsistencyError("general bound exceeds its alpha0 = 10/11 specialization")
        explicit = {"value": value, "exponent": explicit_exponent(params.xi),
                    "prefactor": params.alpha0 / (1 - params.alpha0) * params.log_term,
                    "dominates": True}
    return BoundTrace(params, sat.ell0, sat.descent, sat.n0, sat.n0_prime, sat.l0, sat.s_bar_l0,
                      lam.rungs, lam.terms, lam.coeff, lam.const, lam_value, residual, s_l0,
                      assembly, l10, thm, t_n0, checks, explicit)
