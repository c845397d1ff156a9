import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alaw.bound import (
    BoundParams,
    check_eps_corrections,
    check_unit_length,
    compute_bound,
    crossover,
    explicit_bound,
    explicit_exponent,
    eta_bounds,
    find_saturation,
    ladder,
    lambda_sum,
    lemma8_step,
    lemma9_cap,
    lemma9_entropy_bound,
    lemma10_bound,
    optimal_Qc,
    refinement_chain,
    round_sig,
    theorem_bound,
    theorem_cap,
    top_residual,
    unit_length,
)
from alaw.entropy import EPS_H, fannes_eps
from alaw.errors import DomainError, InternalConsistencyError

GRID = [BoundParams(x, a) for x in (1, 1.5, 2, 3, 5) for a in (2 / 3, 0.75, 10 / 11, 0.95)]
P1 = BoundParams(1, 10 / 11)


def test_params_domain():
    for xi, a in [(0.5, 0.8), (1, 0.6), (1, 1.0), (math.inf, 0.8)]:
        with pytest.raises(DomainError):
            BoundParams(xi, a)
    BoundParams(1, 2 / 3)


def test_unit_length_examples():
    assert unit_length(P1) == pytest.approx(22 * (math.log2(11) + 3))
    assert unit_length(P1) == pytest.approx(142.11, abs=0.005)
    assert unit_length(BoundParams(1, 2 / 3)) == pytest.approx(27.51, abs=0.005)
    vals = [unit_length(BoundParams(x, 0.8)) for x in (1, 2, 3, 4)]
    assert vals == sorted(vals)


def test_lemma8_step_examples():
    p = BoundParams(1, 2 / 3)
    s = 3 * p.unit / 5
    assert crossover(0.4, p) == pytest.approx(s, abs=1e-15)
    above = s - 0.4 * p.alpha0 / (4 * p.xi)
    below = s / (2 * (1 - 0.4))
    assert above == pytest.approx(below, abs=1e-12) == pytest.approx(p.unit / 2)
    assert lemma8_step(1.0, 0.4, p) == pytest.approx(0.9333, abs=5e-5)
    # small Q_c moves the crossover to 0, so the subtractive branch is taken
    assert lemma8_step(1e-6, 1e-9, p) == pytest.approx(1e-6 - 1e-9 * p.unit / 4, rel=1e-12)
    tiny = crossover(0.01, p) / 2
    assert lemma8_step(tiny, 0.01, p) == pytest.approx(tiny / 1.98)
    with pytest.raises(DomainError):
        lemma8_step(0.5, 0.5, p)


def test_optimal_qc_examples():
    for p in GRID:
        assert optimal_Qc(3 * p.unit / 5, p) == pytest.approx(0.4, abs=1e-12)
        assert optimal_Qc(p.unit / 2, p) == pytest.approx((3 - math.sqrt(5)) / 2, abs=1e-12)
    assert optimal_Qc(1e-12, P1) < 1e-11


@settings(max_examples=100, deadline=None)
@given(s=st.floats(1e-9, 0.99), xi=st.floats(1, 10), a=st.floats(2 / 3, 0.99))
def test_optimal_qc_solves_crossover(s, xi, a):
    p = BoundParams(xi, a)
    sbar = s * p.unit
    q = optimal_Qc(sbar, p)
    assert 0 < q < 0.5
    assert crossover(q, p) == pytest.approx(sbar, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("p", GRID, ids=lambda p: f"{p.xi}-{p.alpha0:.3f}")
def test_descent_invariants(p):
    sat = find_saturation(p)
    s = [st_.s_bar for st_ in sat.descent]
    assert all(a > b for a, b in zip(s, s[1:]))
    assert s[0] == pytest.approx(1 + EPS_H / unit_length(p))
    assert sat.n0_prime <= lemma9_cap(p) - 8
    assert sat.n0 <= lemma9_cap(p) <= theorem_cap(p)
    assert sat.s_bar_l0 < p.unit / 27
    assert sat.l0 == pytest.approx(4.0 ** sat.n0 * unit_length(p))


def test_saturation_point_example():
    sat = find_saturation(P1)
    assert theorem_cap(P1) == 14 and sat.n0 <= 14


def test_greedy_never_longer():
    for p in GRID:
        assert find_saturation(p, greedy=True).n0 <= find_saturation(p).n0


def test_round_sig():
    assert round_sig(0.40451, 2, "up") == 0.41
    assert round_sig(0.0635, 2, "up") == 0.064
    assert round_sig(0.35796, 2) == 0.36
    assert round_sig(0.5000000000000002, 2, "up") == 0.5
    with pytest.raises(DomainError):
        round_sig(1.0, 2, "sideways")


def test_refinement_chain_exact_values():
    chain = refinement_chain(find_saturation(P1), P1)
    exact = [0.5, 0.40451, 0.31502, 0.23359, 0.16287, 0.10562, 0.06351, 0.03572]
    assert chain["s_bar"] == pytest.approx(exact, abs=1e-5)


def test_ladder_examples():
    rungs = ladder(P1, P1.unit / 27, 4)
    assert rungs[0].Q == pytest.approx(7 / 27, abs=1e-15)
    assert rungs[1].sigma == pytest.approx(1 / 90, abs=1e-15)
    ratio = (rungs[1].sigma / rungs[0].sigma) ** 2 * 9
    assert ratio == pytest.approx(81 / 100, abs=1e-12)
    with pytest.raises(DomainError):
        ladder(P1, P1.unit / 20, 4)


def test_ladder_geometric_mode():
    g = ladder(P1, P1.unit / 27, 5, geometric=True)
    r = ladder(P1, P1.unit / 27, 5)
    assert g[1].sigma == pytest.approx(r[1].sigma)
    assert all(a.sigma >= b.sigma for a, b in zip(g[2:], r[2:]))


def test_eta_terms_transcription():
    rungs = ladder(P1, P1.unit / 27, 6)
    l0 = 1000.0
    unit = P1.unit
    terms = eta_bounds(P1, rungs, l0)
    for m in range(5):
        s, s1 = rungs[m].sigma * unit, rungs[m + 1].sigma * unit  # bits per site
        l2m, l2m2 = 9 ** m * l0, 9 ** (m + 1) * l0
        c = 1 / unit  # xi / alpha0
        even = (12 * c * s * s * l2m - 4 * c * s * math.log2(c * s)
                + 12 * c * s * s * l2m - 8 * c * s * math.log2(2 * c * s))
        odd = (4 * c * s * s1 * l2m2 - 4 * c * s * math.log2(c * s)
               + 4 * c * s * s1 * l2m2 - 8 * c * s * math.log2(2 * c * s))
        assert terms[2 * m].value == pytest.approx(even, rel=1e-12)
        assert terms[2 * m + 1].value == pytest.approx(odd, rel=1e-12)
    assert all(t.value > 0 for t in terms)


@pytest.mark.parametrize("xi", [1, 2, 5])
def test_lambda_sum_reproduction(xi):
    lam = lambda_sum(BoundParams(xi, 10 / 11))
    assert lam.coeff <= 0.1513 * 1.02 and lam.const <= 5.893 * 1.02
    assert lam.coeff == pytest.approx(0.1513, abs=5e-5)
    assert lam.const == pytest.approx(5.893, abs=5e-4)


def test_lambda_sum_depth_stable():
    a, b = lambda_sum(P1, 32), lambda_sum(P1, 64)
    assert a.depth == 32 and b.depth == 64
    assert abs(a.coeff - b.coeff) < 1e-9 and abs(a.const - b.const) < 1e-9


def test_lambda_sum_finite_and_constant_over_alpha0():
    vals = [lambda_sum(BoundParams(1, a)) for a in (2 / 3, 0.7, 0.8, 0.9, 0.95, 0.99)]
    for v in vals:
        assert math.isfinite(v.coeff) and math.isfinite(v.const)
    coeffs = [v.coeff for v in vals]
    assert all(a >= b - 1e-15 for a, b in zip(coeffs, coeffs[1:]))


def test_lambda_sum_monotone_in_initial_density():
    prev = None
    for frac in (1.0, 0.9, 0.7, 0.5, 0.2):
        lam = lambda_sum(P1, s_bar_l0=frac * P1.unit / 27)
        cur = lam.value(P1, 1e6)
        if prev is not None:
            assert cur < prev
        prev = cur


def test_geometric_lambda_outside_envelope():
    lam = lambda_sum(P1, geometric=True)
    assert lam.coeff == pytest.approx(0.3292, abs=1e-4) and not lam.within_envelope
    trace = compute_bound(P1, geometric=True)
    assert not trace.checks["assembly_closes"]


def test_unit_length_continuity_claim():
    for p in GRID:
        ell0 = unit_length(p)
        g = 8 * p.xi / (1 - p.alpha0)
        mid = 7 / 6 * math.log2(g) / g
        # equality at alpha0 = 2/3, up to rounding
        assert fannes_eps(4 * ell0, ell0, p.alpha0, p.xi) <= mid * (1 + 1e-12)
        assert mid < EPS_H
        assert check_unit_length(p)["g"] == pytest.approx(g)


def test_eps_corrections_at_actual_scales():
    for p in GRID:
        sat = find_saturation(p)
        assert check_eps_corrections(p, lambda_sum(p), sat.l0)["max_ratio"] < 0.01


def test_eps_corrections_at_unit_length_not_small():
    # the dropped corrections are only negligible at the saturation scale, not at ell0
    p = BoundParams(1, 2 / 3)
    with pytest.raises(InternalConsistencyError):
        check_eps_corrections(p, lambda_sum(p), unit_length(p))


@pytest.mark.parametrize("p", GRID, ids=lambda p: f"{p.xi}-{p.alpha0:.3f}")
def test_assembly_and_doubling(p):
    trace = compute_bound(p)
    assert trace.assembly <= trace.lemma10_bound
    n0 = theorem_cap(p)
    assert abs(theorem_bound(p) - 2 * lemma10_bound(p, n0)) <= 1e-9 * theorem_bound(p)
    assert trace.residual < 1e-6 * trace.assembly
    assert lemma9_entropy_bound(p, trace.n0) * 2 + trace.lambda_sum + trace.residual == \
        pytest.approx(trace.assembly)


def test_lemma10_coefficients():
    lam = lambda_sum(P1)
    assert 4 / 27 + 2 * lam.coeff <= 0.5
    assert lam.const < 6
    vals = [lemma10_bound(BoundParams(x, 0.8)) for x in (1, 2, 3)]
    assert vals == sorted(vals)


def test_theorem_examples():
    assert explicit_bound(1) == 17448304652
    assert explicit_exponent(2) == 23
    t = theorem_bound(P1)
    assert t == pytest.approx(1.73e10, rel=3e-3) and t <= explicit_bound(1)
    assert explicit_bound(1) == pytest.approx(1.745e10, rel=1e-3)
    for xi in (1, 1.5, 2, 3, 5):
        p = BoundParams(xi, 10 / 11)
        assert theorem_bound(p) <= explicit_bound(xi)
        assert p.alpha0 / (1 - p.alpha0) * p.log_term == pytest.approx(
            10 * (math.log2(xi) + math.log2(11) + 3))
        assert math.log2(11) + 3 == pytest.approx(6.459, abs=5e-4)
        assert theorem_cap(p) <= explicit_exponent(xi) + 2


def test_trace_summary_keys():
    trace = compute_bound(P1)
    keys = set(trace.summary())
    assert keys == {"xi", "alpha0", "ell0", "n0", "l0", "s_bar_l0", "lambda_coeff",
                    "lambda_const", "lemma10", "theorem", "explicit_form"}
    assert "explicit_form" not in compute_bound(BoundParams(1, 0.75)).summary()


def test_top_residual_formula():
    rungs = ladder(P1, P1.unit / 27, 3)
    s = rungs[2].sigma
    assert top_residual(P1, rungs[2], 10.0) == pytest.approx(
        16 * s * s * 81 * P1.unit * 10 - 8 * s * math.log2(2 * s))
