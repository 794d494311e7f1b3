import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmera import DomainError, Profile
from cmera.correlators import cmera_correlator, exact_correlator
from cmera.defect_modes import (DefectParams, Packet, defect_correlator_mode_oracle, extract_coefficients,
                                matching_ratio, mode_function, mode_overlap_packet, packet_norm,
                                second_family_obstruction)
from cmera.geometry import Geometry

GAUSS, MAGIC = Profile("gaussian"), Profile("magic")
PREF = cmath.exp(1j * math.pi / 4) / (2 * math.sqrt(math.pi))
interior = st.floats(-math.pi / 2 + 1e-3, math.pi / 2 - 1e-3).filter(lambda t: abs(t) > 1e-3)


def test_r_plus_t_on_grid():
    for th in np.linspace(-math.pi / 2, math.pi / 2, 1000):
        p = DefectParams(float(th))
        assert p.R + p.T == 1.0
        assert p.R == pytest.approx(math.cos(2 * th) ** 2, abs=2e-16)


@given(theta=st.floats(0.05, math.pi / 2 - 0.05) | st.floats(-math.pi / 2 + 0.05, -0.05))
def test_rapidity_identity(theta):
    p = DefectParams(theta)
    assert p.cosh_eta ** 2 - p.sinh_eta ** 2 == pytest.approx(1.0, rel=1e-12)
    assert math.cosh(p.eta) == pytest.approx(abs(p.cosh_eta), rel=1e-12)


def test_rapidity_matches_tan_cot_forms():
    th = 0.4
    p = DefectParams(th)
    assert abs(p.cosh_eta) == pytest.approx((math.tan(th) + 1 / math.tan(th)) / 2, rel=1e-14)
    assert abs(p.sinh_eta) == pytest.approx(abs(math.tan(th) - 1 / math.tan(th)) / 2, rel=1e-14)


def test_reflective_gluing_diverges():
    assert DefectParams(0.0).reflective and math.isinf(DefectParams(0.0).cosh_eta)
    with pytest.raises(DomainError):
        DefectParams(math.pi / 2).gluing_matrix()


@given(k=st.floats(0.1, 20), x=st.floats(-30, 30))
def test_trivial_defect_is_plane_wave(k, x):
    f = mode_function(math.pi / 4, k, x)
    assert f == pytest.approx(PREF * (1 - 1j) * cmath.exp(1j * k * x), abs=1e-15)
    assert abs(f) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-14)


def test_dirichlet_type_sine_on_right():
    k = 1.7
    xs = np.array([0.3, 1.1, 4.0])
    f = mode_function(0.0, k, xs)
    expected = PREF * (np.exp(1j * k * xs) - np.exp(-1j * k * xs))
    np.testing.assert_allclose(f, expected, atol=1e-15)
    np.testing.assert_allclose(f, PREF * 2j * np.sin(k * xs), atol=1e-15)
    assert mode_function(0.0, k, 0.0) == 0


def test_mode_function_rejects_zero_momentum():
    with pytest.raises(DomainError):
        mode_function(0.3, 0.0, 1.0)


@pytest.mark.parametrize("theta", [3 * math.pi / 8, math.pi / 8, -0.7])
def test_matching_by_finite_differences(theta):
    k, h = 2.3, 1e-6
    # one-sided second-order differences at 0-
    left = (3 * mode_function(theta, k, -1e-300) - 4 * mode_function(theta, k, -h)
            + mode_function(theta, k, -2 * h)) / (2 * h)
    right = (-3 * mode_function(theta, k, 0.0) + 4 * mode_function(theta, k, h)
             - mode_function(theta, k, 2 * h)) / (2 * h)
    assert left / right == pytest.approx(math.tan(theta), rel=1e-8)
    assert matching_ratio(theta, k) == pytest.approx(math.tan(theta), rel=1e-13)


@given(theta=interior, k=st.floats(0.2, 10))
def test_gluing_matrix_maps_left_to_right(theta, k):
    p = DefectParams(theta)
    # in the basis of derivative/field combinations (A_+ - A_-, A_+ + A_-) up to phases
    left = extract_coefficients(theta, k, -1)
    right = extract_coefficients(theta, k, +1)
    u = np.array([left[0] - left[1], 1j * (left[0] + left[1])])
    v = np.array([right[0] - right[1], 1j * (right[0] + right[1])])
    # derivative scales by cot, time derivative by tan: diag(cot, tan) = R(eta) in the light-cone frame
    lc = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    mapped = lc @ p.gluing_matrix() @ lc @ np.array([v[0], v[1]])
    np.testing.assert_allclose(mapped, u, atol=1e-12)


@pytest.mark.parametrize("theta", [0.9, -0.3])
def test_coefficient_extraction_matches_closed_form(theta):
    from cmera.defect_modes import mode_coefficients
    left, right = mode_coefficients(theta)
    np.testing.assert_allclose(extract_coefficients(theta, 1.3, -1), left, atol=1e-12)
    np.testing.assert_allclose(extract_coefficients(theta, 1.3, +1), right, atol=1e-12)


# --- packet orthonormality -----------------------------------------------------

def test_packet_self_normalization():
    p = Packet(5.0, 0.5)
    val = mode_overlap_packet(3 * math.pi / 8, p, p)
    ref = packet_norm(p, p)
    assert ref.real == pytest.approx(0.5 * math.sqrt(math.pi), rel=1e-12)
    assert abs(val - ref) <= 1e-6 * abs(ref)


def test_disjoint_packets_orthogonal():
    assert abs(mode_overlap_packet(3 * math.pi / 8, Packet(3.0, 0.5), Packet(9.0, 0.5))) <= 1e-6


def test_trivial_defect_parseval():
    p1, p2 = Packet(4.0, 0.5), Packet(4.6, 0.7, amplitude=0.3 - 0.2j)
    assert abs(mode_overlap_packet(math.pi / 4, p1, p2) - packet_norm(p1, p2)) <= 1e-10


# --- mode-integral correlator oracle -------------------------------------------

def test_oracle_trivial_defect_full_line():
    x, y = -2.0, 3.0
    val = defect_correlator_mode_oracle(math.pi / 4, GAUSS, x, y)
    assert val == pytest.approx(cmera_correlator(Geometry.full(), GAUSS, "pipi", x, y), abs=1e-7)


@pytest.mark.parametrize("profile", [GAUSS, MAGIC])
def test_oracle_defect_closed_form(profile):
    th = 3 * math.pi / 8
    val = defect_correlator_mode_oracle(th, profile, -5.0, 10.0)
    ref = cmera_correlator(Geometry.defect(th), profile, "pipi", -5.0, 10.0)
    assert abs(val - ref) <= 1e-6


def test_oracle_decoupled_opposite_sides():
    assert abs(defect_correlator_mode_oracle(0.0, GAUSS, -5.0, 10.0)) <= 1e-8
    assert abs(defect_correlator_mode_oracle(0.0, "exact", -5.0, 10.0, "phiphi-diff", x_ref=-2.0)) <= 1e-8


@settings(max_examples=20)
@given(theta=interior, x=st.floats(0.5, 15), y=st.floats(0.5, 15),
       sx=st.sampled_from([-1.0, 1.0]), sy=st.sampled_from([-1.0, 1.0]))
def test_oracle_matches_closed_forms(theta, x, y, sx, sy):
    x, y = sx * x, sy * y
    if abs(x - y) < 0.05 or abs(x + y) < 0.05:
        return
    g = Geometry.defect(theta)
    assert abs(defect_correlator_mode_oracle(theta, GAUSS, x, y)
               - cmera_correlator(g, GAUSS, "pipi", x, y)) <= 1e-6
    xr = 1.5 * sx
    if abs(xr - y) > 0.05:
        assert abs(defect_correlator_mode_oracle(theta, "exact", x, y, "phiphi-diff", x_ref=xr)
                   - exact_correlator(g, "phiphi-diff", x, y, x_ref=xr)) <= 1e-6


def test_oracle_phi_diff_cmera():
    th = 0.6
    val = defect_correlator_mode_oracle(th, MAGIC, 4.0, -6.0, "phiphi-diff", x_ref=1.0)
    ref = cmera_correlator(Geometry.defect(th), MAGIC, "phiphi-diff", 4.0, -6.0, x_ref=1.0)
    assert abs(val - ref) <= 1e-6


def test_oracle_domain_errors():
    with pytest.raises(DomainError):
        defect_correlator_mode_oracle(0.3, GAUSS, 0.0, 1.0)
    with pytest.raises(DomainError):
        defect_correlator_mode_oracle(0.3, "exact", 1.0, 2.0)
    with pytest.raises(DomainError):
        defect_correlator_mode_oracle(0.3, GAUSS, 1.0, 2.0, "phiphi-diff", x_ref=-1.0)


# --- second family -----------------------------------------------------------

def test_second_family_generic_obstruction():
    assert abs(second_family_obstruction(math.pi / 3, 1.0, 2.0)) > 0.1
    val = second_family_obstruction(math.pi / 3, 1.0, 2.0, with_pole=True)
    assert val == pytest.approx(second_family_obstruction(math.pi / 3, 1.0, 2.0) * 1j / 3.0)


@pytest.mark.parametrize("theta", [0.0, math.pi / 2, math.pi])
def test_second_family_reflective_exceptions(theta):
    assert abs(second_family_obstruction(theta, 1.0, 2.0)) <= 1e-12


@given(theta=st.floats(0.05, math.pi / 2 - 0.05))
def test_second_family_magnitude(theta):
    assert abs(second_family_obstruction(theta, 1.0, 3.0)) == pytest.approx(abs(math.sin(2 * theta)), rel=1e-9)


def test_second_family_domain():
    with pytest.raises(DomainError):
        second_family_obstruction(0.3, -1.0, 2.0)
