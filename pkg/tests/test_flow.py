import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cmera import DomainError, Profile
from cmera.flow import FIXED_POINT_S, AlphaFn, alpha_closed, alpha_fixed, alpha_flow, ir_mass
from cmera.profiles import g_momentum

import oracles


@pytest.mark.parametrize("kind", ["gaussian", "magic"])
def test_fixed_point_matches_flow(kind):
    p = Profile(kind)
    for k in np.logspace(-3, 3, 13):
        assert alpha_fixed(p, k) == pytest.approx(alpha_flow(p, k, FIXED_POINT_S), rel=1e-9)


def test_magic_closed_form_examples():
    p = Profile("magic")
    assert alpha_fixed(p, 1.0) == pytest.approx(1 / math.sqrt(2), rel=1e-15)
    assert alpha_closed(p, 0.0, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-15)


def test_gaussian_fixed_point_against_mpmath():
    p = Profile("gaussian")
    for k in (1e-3, 0.1, 1.0, 3.0, 30.0):
        assert alpha_fixed(p, k) == pytest.approx(oracles.alpha_gaussian_fixed(k), rel=1e-13)


@pytest.mark.parametrize("kind", ["gaussian", "magic"])
@pytest.mark.parametrize("k,s", [(1.0, 1.0), (0.2, 3.0), (5.0, 0.5)])
def test_flow_against_rk4(kind, k, s):
    p = Profile(kind)
    g = lambda kk: float(g_momentum(p, kk))
    assert alpha_flow(p, k, s) == pytest.approx(oracles.alpha_rk4(g, k, s), rel=1e-8)
    assert alpha_closed(p, k, s) == pytest.approx(oracles.alpha_by_quadrature(g, k, s), rel=1e-12)


def test_magic_closed_form_with_mass():
    # alpha (k^2 + Lambda^2) = Lambda sqrt(k^2 + m^2) sqrt(k^2 + Lambda^2)
    p = Profile("magic", 2.0)
    for s in (0.3, 1.0, 4.0):
        m = ir_mass(p, s)
        for k in (0.01, 0.5, 2.0, 40.0):
            lhs = alpha_flow(p, k, s) * (k * k + 4.0)
            assert lhs == pytest.approx(2.0 * math.sqrt(k * k + m * m) * math.sqrt(k * k + 4.0), rel=1e-9)


def test_magic_alpha_differs_from_unnormalized_ratio():
    # the form sqrt(k^2 + m^2)/(k^2 + Lambda^2) does not solve the flow; ours does
    p = Profile("magic")
    k, s = 0.7, 1.0
    m = ir_mass(p, s)
    unnormalized = math.sqrt(k * k + m * m) / (k * k + 1.0)
    assert abs(alpha_flow(p, k, s) - unnormalized) > 1e-2
    assert alpha_flow(p, k, s) == pytest.approx(math.sqrt(k * k + m * m) / math.sqrt(k * k + 1.0), rel=1e-9)


@pytest.mark.parametrize("kind", ["gaussian", "magic"])
def test_ir_slope(kind):
    assert alpha_fixed(Profile(kind), 1e-4) / 1e-4 == pytest.approx(1.0, rel=1e-3)


def test_uv_limit():
    for kind in ("gaussian", "magic"):
        assert alpha_fixed(Profile(kind, 3.0), 1e5) == pytest.approx(3.0, rel=1e-6)


def test_flow_rejects_negative_time():
    with pytest.raises(DomainError):
        alpha_flow(Profile("magic"), 1.0, -1.0)
    with pytest.raises(DomainError):
        AlphaFn(Profile("magic"), -0.5)


def test_with_mass():
    a = AlphaFn.with_mass(Profile("magic", 2.0), 0.2)
    assert a.m == pytest.approx(0.2, rel=1e-14)
    with pytest.raises(DomainError):
        AlphaFn.with_mass(Profile("magic"), 0.0)


@given(k=st.floats(1e-3, 1e3), s=st.floats(0.0, 8.0))
def test_alpha_bounded_and_monotone_in_s(k, s):
    for kind in ("gaussian", "magic"):
        p = Profile(kind)
        a_s = alpha_closed(p, k, s)
        assert 0 < a_s <= p.lam * (1 + 1e-15)
        assert alpha_closed(p, k, s + 0.5) <= a_s * (1 + 1e-12)


@given(k=st.floats(1e-2, 1e2), lam=st.floats(0.1, 10.0))
def test_alpha_scale_covariance(k, lam):
    for kind in ("gaussian", "magic"):
        assert alpha_fixed(Profile(kind, lam), k) == pytest.approx(lam * alpha_fixed(Profile(kind), k / lam),
                                                                   rel=1e-12)


@given(k=st.floats(1e-3, 1e2), s=st.floats(0.1, 6.0))
def test_magic_interpolation(k, s):
    p = Profile("magic")
    m = ir_mass(p, s)
    expected = math.sqrt(k * k + m * m) * alpha_fixed(p, k) / k
    assert alpha_closed(p, k, s) == pytest.approx(expected, rel=1e-12)
