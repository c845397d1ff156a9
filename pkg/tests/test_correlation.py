import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alaw.correlation import (
    CSV_HEADER,
    CorrelationProfile,
    _embed_product,
    certify,
    correlation_strength,
    fit_xi,
    is_zero_profile,
    measure_profile,
)
from alaw.errors import DomainError, PreconditionError
from alaw.qstate import Region, make_bell_chain, make_ghz, make_product, make_tfim_ground, reduce
from conftest import random_state


def synthetic(strengths):
    seps = np.arange(1, len(strengths) + 1)
    return CorrelationProfile(seps, np.asarray(strengths, float), np.ones(len(seps), int))


def test_strength_examples():
    assert correlation_strength(make_product(6, 0.4), [0], [3]) == pytest.approx(0, abs=1e-12)
    assert correlation_strength(make_bell_chain(3), [0, 1], [4, 5]) == pytest.approx(0, abs=1e-12)
    ghz = make_ghz(6)
    assert correlation_strength(ghz, [0], [5]) >= 1 - 1e-12
    assert correlation_strength(ghz, [0, 1], [3, 4]) >= 1 - 1e-12


def test_strength_symmetric_and_supports():
    state = random_state(6, 3)
    a = correlation_strength(state, [0, 1], [4])
    b = correlation_strength(state, [4], [0, 1])
    assert a == pytest.approx(b, abs=1e-12)
    with pytest.raises(DomainError):
        correlation_strength(state, [0, 1, 2], [4])
    with pytest.raises(DomainError):
        correlation_strength(state, [0, 1], [1, 4])


def test_embed_product_against_kron():
    state = random_state(5, 1)
    rx, ry = Region((0, 3)), Region((1,))
    got = _embed_product(reduce(state, rx).matrix, rx, reduce(state, ry).matrix, ry)
    # brute force: rho_X (x) rho_Y in the little-endian basis of sites (0, 1, 3)
    rxm, rym = reduce(state, rx).matrix, reduce(state, ry).matrix
    want = np.zeros((8, 8), complex)
    for i in range(8):
        for j in range(8):
            xi_, xj = (i & 1) | (((i >> 2) & 1) << 1), (j & 1) | (((j >> 2) & 1) << 1)
            want[i, j] = rxm[xi_, xj] * rym[(i >> 1) & 1, (j >> 1) & 1]
    assert np.allclose(got, want, atol=1e-14)


def test_fit_bell_certified_unit():
    _, cert = certify(make_bell_chain(5))
    assert cert.xi == 1 and cert.certified


def test_fit_synthetic_exponential():
    cert = fit_xi(synthetic(2.0 ** (-np.arange(1, 9) / 2)))
    assert cert.xi == pytest.approx(3.0)
    assert cert.certified


def test_fit_ghz_fails():
    _, cert = certify(make_ghz(8))
    assert not cert.certified


def test_fit_needs_three_points():
    with pytest.raises(PreconditionError):
        fit_xi(synthetic([0.3, 0.1, 0, 0, 0]))


def test_fit_increasing_uncertified():
    cert = fit_xi(synthetic([0.01, 0.02, 0.04, 0.08]))
    assert not cert.certified and cert.xi == float("inf")


def test_tfim_certified_profile():
    profile, cert = certify(make_tfim_ground(10, 2.0))
    assert cert.certified and cert.xi >= 1
    bound = 2.0 ** (-profile.separations / cert.xi)
    assert np.all(profile.strengths <= bound * (1 + 1e-12))


def test_poly_prefactor_covers_points():
    profile = synthetic([0.9, 0.5, 0.3, 0.2, 0.09])
    cert = fit_xi(profile, poly_prefactor=True)
    assert cert.prefactor >= 1 and cert.certified
    assert np.all(profile.strengths <= cert.prefactor * 2.0 ** (-profile.separations / cert.xi)
                  * (1 + 1e-12))


def test_profile_csv_and_zero():
    profile = measure_profile(make_product(6, 0.2))
    assert is_zero_profile(profile)
    text = profile.to_csv()
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    assert not is_zero_profile(measure_profile(make_ghz(6)))


@settings(max_examples=25, deadline=None)
@given(xi=st.floats(1.0, 6.0), n=st.integers(4, 12))
def test_fit_recovers_exponential(xi, n):
    cert = fit_xi(synthetic(2.0 ** (-np.arange(1, n + 1) / xi)))
    assert cert.xi == pytest.approx(max(1.0, 1.5 * xi), rel=1e-9)
    assert cert.certified
