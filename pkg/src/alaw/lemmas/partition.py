"""Checkers for the single-partition inequalities and identities."""

from __future__ import annotations

import math

import numpy as np

from alaw.entropy import (
    EPS_H,
    binary_entropy,
    entropy_of,
    fannes_eps,
    modified_fannes_sides,
    mutual_information,
    partition_identity_residual,
    shannon,
    trace_distance,
    vector_entropy,
    von_neumann,
)
from alaw.errors import PreconditionError
from alaw.lemmas.common import (
    NO_ASSUMPTION,
    Assumption,
    LemmaVerdict,
    as_assumption,
    exact,
    max_block_entropy,
)
from alaw.qstate import ChainState, DensityOperator, Partition, merge, reduce, split
from alaw.schmidt import (
    cutoff,
    dual_schmidt_cut,
    group_tail,
    project_tail_state,
    schmidt_basis,
    schmidt_cut,
)


def _context(state: ChainState, partition: Partition, assume: Assumption | None, **extra) -> dict:
    ctx = {"state": state.label, "partition": partition.describe()}
    if assume is not None:
        ctx.update(assume.to_dict())
    ctx.update(extra)
    return ctx


def _distance_ok(assume: Assumption, exponent: float) -> bool:
    """``P 2^{-exponent/xi} <= 1/2``: the modified Fannes inequality is usable."""
    return assume.prefactor * 2.0 ** (-exponent / assume.xi) <= 0.5


def _eps(assume: Assumption, L: float, l_b: float, alpha: float) -> float:
    return fannes_eps(L, l_b, alpha, assume.xi, assume.prefactor)


# ---------------------------------------------------------------------------
# identities and elementary inequalities
# ---------------------------------------------------------------------------


def check_partition_identity(state: ChainState, partition: Partition) -> LemmaVerdict:
    """``S(B1 A B2) = S(B1) - S(A) + S(B2) + f``."""
    return exact("identity.partition", partition_identity_residual(state, partition),
                 _context(state, partition, None))


def check_subadditivity(state: ChainState, partition: Partition) -> LemmaVerdict:
    """``S(AB) <= S(A) + S(B)`` for ``A`` and the two flanks."""
    p = partition
    lhs = entropy_of(state, p.a | p.b)
    rhs = entropy_of(state, p.a) + entropy_of(state, p.b)
    return LemmaVerdict("subadditivity", lhs, rhs, True, True,
                        _context(state, p, None, assumption=NO_ASSUMPTION))


def check_ssa(state: ChainState, partition: Partition) -> LemmaVerdict:
    """``S(A) <= S(B1 A) + S(A B2) - S(C)``."""
    p = partition
    lhs = entropy_of(state, p.a)
    rhs = entropy_of(state, p.left | p.a) + entropy_of(state, p.a | p.right) - entropy_of(state, p.c)
    return LemmaVerdict("ssa", lhs, rhs, True, True,
                        _context(state, p, None, assumption=NO_ASSUMPTION))


def check_modified_fannes(rho, sigma, context: dict | None = None) -> LemmaVerdict:
    try:
        lhs, rhs, dist = modified_fannes_sides(rho, sigma)
    except PreconditionError:
        dist = trace_distance(rho, sigma)
        return LemmaVerdict("fannes.modified", math.nan, math.nan, False, True,
                            {**(context or {}), "distance": dist, "assumption": NO_ASSUMPTION})
    return LemmaVerdict("fannes.modified", lhs, rhs, True, True,
                        {**(context or {}), "distance": dist, "assumption": NO_ASSUMPTION})


# ---------------------------------------------------------------------------
# Lemmas 1 to 5
# ---------------------------------------------------------------------------


def check_lemma1(state: ChainState, partition: Partition, m: int, n: int,
                 xi: float | Assumption) -> LemmaVerdict:
    """``D(rho^C, rho_mn^C) <= P 2^{-l_b/xi} / Q_mn``."""
    assume = as_assumption(xi)
    spec = schmidt_cut(state, partition.a)
    qmn = spec.window_mass(m, n)
    ctx = _context(state, partition, assume, window=[m, n], Q_mn=qmn)
    if qmn <= 1e-12:
        return LemmaVerdict("lemma1", math.nan, math.nan, False, assume.certified, ctx)
    lhs = trace_distance(reduce(state, partition.c), project_tail_state(state, partition, m, n))
    rhs = assume.prefactor * 2.0 ** (-partition.l_b / assume.xi) / qmn
    return LemmaVerdict("lemma1", lhs, rhs, True, assume.certified, ctx)


def check_lemma2(state: ChainState, partition: Partition, m: int, n: int, alpha: float,
                 xi: float | Assumption) -> LemmaVerdict:
    """``|S(C) - S(rho_mn^C)| <= eps(l_B + log2 M, l_b, alpha)``."""
    assume = as_assumption(xi)
    p = partition
    spec = schmidt_cut(state, p.a)
    qmn = spec.window_mass(m, n)
    threshold = 2.0 ** (-alpha * p.l_b / assume.xi)
    x = (1 - alpha) * p.l_b
    pre = qmn >= threshold and x >= assume.xi and _distance_ok(assume, x)
    ctx = _context(state, p, assume, window=[m, n], alpha=alpha, Q_mn=qmn)
    if qmn <= 1e-12:
        return LemmaVerdict("lemma2", math.nan, math.nan, False, assume.certified, ctx)
    rho_mn = project_tail_state(state, p, m, n)
    lhs = abs(entropy_of(state, p.c) - von_neumann(rho_mn).value)
    rhs = _eps(assume, p.l_B + math.log2(spec.M), p.l_b, alpha)
    return LemmaVerdict("lemma2", lhs, rhs, pre, assume.certified, ctx)


def check_lemma3(state: ChainState, partition: Partition, alpha: float,
                 xi: float | Assumption) -> list[LemmaVerdict]:
    """``Q <= (xi / alpha l_b)(S(A) + eps_h) <= (xi l_A / alpha l_b) sbar(l_A)``.

    ``sbar`` uses the in-chain maximum block entropy, which is a lower bound
    on the chain-wide supremum; the second stage is therefore the finite
    analogue.
    """
    assume = as_assumption(xi)
    p = partition
    cut = cutoff(schmidt_cut(state, p.a), alpha, p.l_b, assume.xi)
    ctx = _context(state, p, assume, alpha=alpha, q=cut.q, Q=cut.Q, assumption=NO_ASSUMPTION)
    scale = assume.xi / (alpha * p.l_b)
    stage1 = scale * (entropy_of(state, p.a) + EPS_H)
    sbar = (max_block_entropy(state, p.l_a) + EPS_H) / p.l_a
    stage2 = scale * p.l_a * sbar
    return [
        LemmaVerdict("lemma3.entropy", cut.Q, stage1, True, True, ctx),
        LemmaVerdict("lemma3.density", stage1, stage2, True, True,
                     {**ctx, "s_bar": sbar, "s_bar_source": "in-chain maximum"}),
    ]


def check_lemma4(state: ChainState, partition: Partition, alpha: float,
                 xi: float | Assumption) -> LemmaVerdict:
    """``S(C) <= S(B)/(1 - Q) + eps(l_C, l_b, alpha)``; vacuous when ``Q = 1``."""
    assume = as_assumption(xi)
    p = partition
    cut = cutoff(schmidt_cut(state, p.a), alpha, p.l_b, assume.xi)
    x = (1 - alpha) * p.l_b
    pre = x >= assume.xi and _distance_ok(assume, x)
    ctx = _context(state, p, assume, alpha=alpha, q=cut.q, Q=cut.Q)
    lhs = entropy_of(state, p.c)
    if cut.q == 0:
        return LemmaVerdict("lemma4", lhs, math.inf, pre, assume.certified,
                            {**ctx, "vacuous": True})
    rhs = entropy_of(state, p.b) / (1 - cut.Q) + _eps(assume, p.l_C, p.l_b, alpha)
    return LemmaVerdict("lemma4", lhs, rhs, pre, assume.certified, ctx)


def check_lemma5(state: ChainState, partition: Partition, alpha: float,
                 xi: float | Assumption) -> list[LemmaVerdict]:
    """``S(C) <= S(A) + S(B) - Q alpha l_b/xi + 2 eps_h + eps(l_C, l_b, alpha)``.

    Also reports the intermediate tail-entropy bound of the grouping.
    """
    assume = as_assumption(xi)
    p = partition
    spec = schmidt_cut(state, p.a)
    cut = cutoff(spec, alpha, p.l_b, assume.xi)
    x = (1 - alpha) * p.l_b
    pre = cut.Q >= cut.threshold and x >= assume.xi and _distance_ok(assume, x)
    ctx = _context(state, p, assume, alpha=alpha, q=cut.q, Q=cut.Q)
    gain = cut.Q * alpha * p.l_b / assume.xi
    lhs = entropy_of(state, p.c)
    rhs = (entropy_of(state, p.a) + entropy_of(state, p.b) - gain + 2 * EPS_H
           + _eps(assume, p.l_C, p.l_b, alpha))
    out = [LemmaVerdict("lemma5", lhs, rhs, pre, assume.certified, ctx)]
    if cut.Q >= cut.threshold:
        groups = group_tail(spec, alpha, p.l_b, assume.xi)
        h = shannon(groups.group_masses / groups.group_masses.sum())
        out.append(LemmaVerdict("lemma5.grouping", gain - 2 * EPS_H, h, True, True,
                                {**ctx, "groups": len(groups.group_masses),
                                 "assumption": NO_ASSUMPTION}))
    return out


# ---------------------------------------------------------------------------
# Lemma 6 and its dual
# ---------------------------------------------------------------------------


def _lemma6_pre(assume: Assumption, alpha: float, l_sep: int) -> bool:
    x = (1 - 2 * alpha) * l_sep
    return 0 < alpha < 0.5 and x >= assume.xi and _distance_ok(assume, x)


def check_lemma6(state: ChainState, partition: Partition, alpha: float,
                 xi: float | Assumption) -> list[LemmaVerdict]:
    """Both mutual-information bounds; the ``-4 Q log Q`` form needs ``Q < 1/2``."""
    assume = as_assumption(xi)
    p = partition
    cut = cutoff(schmidt_cut(state, p.a), alpha, p.l_b, assume.xi)
    pre = _lemma6_pre(assume, alpha, p.l_b)
    ctx = _context(state, p, assume, alpha=alpha, q=cut.q, Q=cut.Q)
    lhs = mutual_information(state, p.a, p.c)
    s_c = entropy_of(state, p.c)
    corr = 2 * _eps(assume, p.l_C, p.l_b, alpha) + _eps(assume, p.l_B + p.l_b, p.l_b, 2 * alpha)
    Q = cut.Q
    out = [LemmaVerdict("lemma6.binary", lhs, 2 * Q * s_c + 2 * binary_entropy(Q) + corr,
                        pre, assume.certified, ctx)]
    if Q < 0.5:
        qlogq = Q * math.log2(Q) if Q > 0 else 0.0
        out.append(LemmaVerdict("lemma6.small_tail", lhs, 2 * Q * s_c - 4 * qlogq + corr,
                                pre, assume.certified, ctx))
    return out


def check_lemma6_dual(state: ChainState, partition: Partition, alpha: float,
                      xi: float | Assumption) -> LemmaVerdict:
    """``I(B1:B2) <= 2Q' S(B2) - 4Q' log Q' + 2 eps(l_B2, l_A, alpha) + eps(l_B, l_A, 2alpha)``."""
    assume = as_assumption(xi)
    p = partition
    cut = cutoff(dual_schmidt_cut(state, p.b1), alpha, p.l_a, assume.xi)
    Q = cut.Q
    pre = _lemma6_pre(assume, alpha, p.l_a) and Q < 0.5
    ctx = _context(state, p, assume, alpha=alpha, q_dual=cut.q, Q_dual=Q)
    lhs = mutual_information(state, p.b1, p.b2)
    qlogq = Q * math.log2(Q) if Q > 0 else 0.0
    rhs = (2 * Q * entropy_of(state, p.b2) - 4 * qlogq
           + 2 * _eps(assume, p.l_b2, p.l_a, alpha) + _eps(assume, p.l_B, p.l_a, 2 * alpha))
    return LemmaVerdict("lemma6.dual", lhs, rhs, pre, assume.certified, ctx)


def _dens(factor: np.ndarray, scale: float = 1.0) -> DensityOperator:
    return DensityOperator(factor=factor / math.sqrt(scale))


def _entropy(factor: np.ndarray, scale: float = 1.0) -> float:
    return von_neumann(_dens(factor, scale)).value


def lemma6_constructions(state: ChainState, partition: Partition, alpha: float,
                         xi: float | Assumption) -> dict:
    """Build the ancilla-extended and off-diagonal-free operators and check each step.

    Returns ``{"verdicts": [...], "skipped": reason or None, ...}``.
    """
    assume = as_assumption(xi)
    p = partition
    n_sites = state.num_sites
    basis = schmidt_basis(state, p.a)
    spec = basis.spectrum
    cut = cutoff(spec, alpha, p.l_b, assume.xi)
    q, M, Q = cut.q, spec.M, cut.Q
    report = {"q": q, "M": M, "Q": Q, "verdicts": [], "skipped": None}
    if q == 0:
        report["skipped"] = "q = 0: the bound reduces to the triangle inequality"
        return report
    ctx = _context(state, p, assume, alpha=alpha, q=q, Q=Q)
    pre = _lemma6_pre(assume, alpha, p.l_b)
    cert = assume.certified
    a_sites = p.a.sites
    ac = (p.a | p.c).sites
    c_sites = p.c.sites
    mat = state.matrix(p.a)
    u, pvec = basis.u, spec.p

    def full(block: np.ndarray) -> np.ndarray:
        return merge(block, n_sites, a_sites)

    heads = [full(np.outer(u[:, k], u[:, k].conj() @ mat)) for k in range(q)]
    head_factors = [split(v, n_sites, ac) for v in heads]
    psi_head = sum(heads)
    w0 = split(psi_head, n_sites, ac)
    tail = Q > 0
    if tail:
        ut = u[:, q:M]
        psi_tail = full(ut @ (ut.conj().T @ mat))
        w1 = split(psi_tail, n_sites, ac)
    verdicts = report["verdicts"]
    s_ac = entropy_of(state, p.a | p.c)
    s_a = entropy_of(state, p.a)
    s_c = entropy_of(state, p.c)
    eps_c = _eps(assume, p.l_C, p.l_b, alpha)
    eps_2 = _eps(assume, p.l_B + p.l_b, p.l_b, 2 * alpha)
    h_q = binary_entropy(Q)

    sigma_factor = np.hstack(head_factors + ([w1] if tail else []))
    s_sigma = _entropy(sigma_factor)
    if tail:
        s_rho_aac = _entropy(np.vstack([w0, w1]))
        gram = np.array([[np.vdot(w0, w0), np.vdot(w1, w0)],
                         [np.vdot(w0, w1), np.vdot(w1, w1)]])
        s_rho_a = _entropy_dense(gram)
        rho_t = np.hstack([w0, w1])
        s_rho_t = _entropy(rho_t)
        verdicts.append(exact("lemma6.unitary_invariance", s_ac - s_rho_aac, ctx))
        verdicts.append(exact("lemma6.ancilla_entropy", s_rho_a - h_q, ctx))
        verdicts.append(LemmaVerdict("lemma6.triangle", s_rho_t - s_rho_a, s_ac, True, True,
                                     {**ctx, "assumption": NO_ASSUMPTION}))
    else:
        s_rho_a = 0.0
        rho_t = w0
        s_rho_t = s_ac

    dist = trace_distance(DensityOperator(factor=rho_t), DensityOperator(factor=sigma_factor))
    verdicts.append(LemmaVerdict("lemma6.distance", dist,
                                 assume.prefactor * 2.0 ** (-(1 - 2 * alpha) * p.l_b / assume.xi),
                                 pre, cert, ctx))
    verdicts.append(LemmaVerdict("lemma6.fannes_tilde", abs(s_rho_t - s_sigma), eps_2,
                                 pre, cert, ctx))

    # Head block: the first line is an exact decomposition.
    ph = pvec[:q]
    head_mass = 1 - Q
    s_head = _entropy(np.hstack(head_factors), head_mass)
    s_phi = np.array([vector_entropy(v / math.sqrt(pk), n_sites, c_sites)
                      for v, pk in zip(heads, ph)])
    hlog = -float(np.sum(ph * np.log2(ph)))
    exact_rhs = float(np.sum(ph * s_phi)) + hlog + head_mass * math.log2(head_mass)
    verdicts.append(exact("lemma6.head_decomposition", head_mass * s_head - exact_rhs, ctx))
    head_floor = hlog + head_mass * (s_c - eps_c) + head_mass * math.log2(head_mass)
    verdicts.append(LemmaVerdict("lemma6.head_bound", head_floor, head_mass * s_head,
                                 pre, cert, ctx))

    if tail:
        pt = pvec[q:M]
        tail_state = psi_tail / math.sqrt(Q)
        s_tail_ac = _entropy(w1, Q)
        tlog = -float(np.sum(pt * np.log2(pt)))
        tail_floor = tlog + Q * math.log2(Q) - Q * s_c - head_mass * eps_c
        verdicts.append(LemmaVerdict("lemma6.tail_bound", tail_floor, Q * s_tail_ac,
                                     pre, cert, ctx))
        triangle = Q * (vector_entropy(tail_state, n_sites, a_sites)
                        - vector_entropy(tail_state, n_sites, c_sites))
        verdicts.append(LemmaVerdict("lemma6.tail_triangle", triangle, Q * s_tail_ac, True, True,
                                     {**ctx, "assumption": NO_ASSUMPTION}))
        sigma_c = _entropy(np.hstack([split(v, n_sites, c_sites) for v in heads]
                                     + [split(psi_tail, n_sites, c_sites)]))
        verdicts.append(exact("lemma6.sigma_marginal", sigma_c - s_c, ctx))

    verdicts.append(LemmaVerdict("lemma6.assembled", s_sigma - s_rho_a - eps_2, s_ac,
                                 pre, cert, ctx))
    sigma_floor = s_a + s_c - 2 * Q * s_c - h_q - 2 * eps_c
    verdicts.append(LemmaVerdict("lemma6.sigma_entropy", sigma_floor, s_sigma, pre, cert, ctx))
    report["distance"] = dist
    return report


def _entropy_dense(matrix: np.ndarray) -> float:
    return von_neumann(DensityOperator.from_matrix((matrix + matrix.conj().T) / 2)).value
