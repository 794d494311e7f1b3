import csv
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cmera import DomainError, Profile
from cmera.geometry import DIRICHLET, NEUMANN, Geometry, c_theta
from cmera.kernels import (KernelFn, envelope_grid_sup, kernel_grid, kernel_value, minimal_update_envelope,
                           modification_value)
from cmera.profiles import g_position

GAUSS, MAGIC = Profile("gaussian"), Profile("magic")
pos = st.floats(0.05, 20.0)
signed = st.tuples(st.sampled_from([-1.0, 1.0]), pos).map(lambda t: t[0] * t[1])


@given(x=st.floats(-20, 20), y=st.floats(-20, 20), shift=st.floats(-5, 5))
def test_full_line_translation_invariant(x, y, shift):
    k = KernelFn(Geometry.full(), MAGIC)
    assert kernel_value(k, x, y) == pytest.approx(kernel_value(k, x + shift, y + shift), rel=1e-12, abs=1e-300)
    assert modification_value(k, x, y) == 0.0


@given(x=signed, y=signed, theta=st.floats(-1.5, 1.5))
def test_modification_depends_on_abs_sum(x, y, theta):
    k = KernelFn(Geometry.defect(theta), GAUSS)
    w = c_theta(theta, x, y)
    assert modification_value(k, x, y) == pytest.approx(w * float(g_position(GAUSS, abs(x) + abs(y))), rel=1e-14)


def test_neumann_magic_example():
    k = KernelFn(Geometry.boundary(NEUMANN), MAGIC)
    assert kernel_value(k, 1.0, 1.0) == pytest.approx(0.25 * (1 + math.exp(-2)), rel=1e-15)
    assert kernel_value(k, 1.0, 1.0) == pytest.approx(0.28383, abs=5e-6)
    lam = 2.5
    k2 = KernelFn(Geometry.boundary(NEUMANN), Profile("magic", lam))
    assert kernel_value(k2, 1 / lam, 1 / lam) == pytest.approx(lam * 0.25 * (1 + math.exp(-2)), rel=1e-14)


@given(x=signed, y=signed)
def test_trivial_defect_kernel(x, y):
    k = KernelFn(Geometry.defect(math.pi / 4), GAUSS)
    assert abs(kernel_value(k, x, y) - float(g_position(GAUSS, x - y))) <= 1e-16


@given(x=pos, y=pos)
def test_reflective_defect_factorizes(x, y):
    for theta, xi_left, xi_right in ((0.0, NEUMANN, DIRICHLET), (math.pi / 2, DIRICHLET, NEUMANN)):
        d = KernelFn(Geometry.defect(theta), MAGIC)
        left = KernelFn(Geometry.boundary(xi_left), MAGIC)
        right = KernelFn(Geometry.boundary(xi_right), MAGIC)
        assert kernel_value(d, x, y) == pytest.approx(kernel_value(right, x, y), rel=1e-14, abs=1e-300)
        assert kernel_value(d, -x, -y) == pytest.approx(kernel_value(left, x, y), rel=1e-14, abs=1e-300)
        g = float(g_position(MAGIC, x + y))
        assert abs(kernel_value(d, -x, y)) <= 1e-15 * g
        assert abs(kernel_value(d, x, -y)) <= 1e-15 * g


def test_half_image_scale_breaks_cancellation():
    d = KernelFn(Geometry.defect(0.0), MAGIC, image_scale=0.5)
    x, y = -1.0, 2.0
    assert kernel_value(d, x, y) == pytest.approx(float(g_position(MAGIC, 3.0)) * 0.5, rel=1e-14)
    assert kernel_value(d, 1.0, 2.0) == pytest.approx(
        float(g_position(MAGIC, 1.0)) - 0.5 * float(g_position(MAGIC, 3.0)), rel=1e-14)


def test_domain_checks():
    with pytest.raises(DomainError):
        kernel_value(KernelFn(Geometry.boundary(DIRICHLET), MAGIC), -1.0, 1.0)
    with pytest.raises(DomainError):
        kernel_value(KernelFn(Geometry.defect(0.3), MAGIC), 0.0, 1.0)
    with pytest.raises(DomainError):
        minimal_update_envelope(KernelFn(Geometry.boundary(NEUMANN), MAGIC), 0.0)


# --- minimal update -------------------------------------------------------------

def test_boundary_magic_envelope_example():
    k = KernelFn(Geometry.boundary(DIRICHLET), MAGIC)
    assert minimal_update_envelope(k, 5.0) == pytest.approx(0.25 * math.exp(-10), rel=1e-14)
    assert minimal_update_envelope(k, 5.0) == pytest.approx(1.135e-5, rel=1e-3)


@pytest.mark.parametrize("scale", [1.0, 0.5])
@pytest.mark.parametrize("theta", [0.0, 0.3, math.pi / 4 + 0.1, 3 * math.pi / 8, -1.2])
def test_defect_magic_envelope_closed_form(theta, scale):
    lam = 1.7
    k = KernelFn(Geometry.defect(theta), Profile("magic", lam), image_scale=scale)
    cmax = max(abs(math.cos(2 * theta)), abs(math.sin(2 * theta) - 1))
    for d in (0.3, 1.0, 4.0):
        env = minimal_update_envelope(k, d)
        assert env == pytest.approx(scale * lam / 4 * cmax * math.exp(-2 * lam * d), rel=1e-13)
        assert abs(envelope_grid_sup(k, d) - env) <= 1e-10
    if scale == 0.5:
        assert minimal_update_envelope(k, 1.0) == pytest.approx(lam / 8 * cmax * math.exp(-2 * lam), rel=1e-13)


@pytest.mark.parametrize("geometry", [Geometry.boundary(NEUMANN), Geometry.defect(1.1)])
def test_grid_sup_matches_envelope_gaussian(geometry):
    k = KernelFn(geometry, GAUSS)
    for d in (0.2, 1.0, 2.5):
        assert abs(envelope_grid_sup(k, d) - minimal_update_envelope(k, d)) <= 1e-10


@pytest.mark.parametrize("lam", [1.0, 1.3])
def test_gaussian_envelope_ratio(lam):
    p = Profile("gaussian", lam)
    k = KernelFn(Geometry.boundary(DIRICHLET), p)
    sigma = math.exp(0.5772156649015329)
    d = 2.0 / p.lam
    ratio = minimal_update_envelope(k, 2 * d) / minimal_update_envelope(k, d)
    assert ratio == pytest.approx(math.exp(-3 * sigma * (p.lam * d) ** 2), rel=1e-9)
    assert minimal_update_envelope(k, d) == pytest.approx(0.5 * math.exp(-sigma * (p.lam * d) ** 2), rel=1e-13)


@pytest.mark.parametrize("profile", [GAUSS, MAGIC])
@pytest.mark.parametrize("geometry", [Geometry.boundary(DIRICHLET), Geometry.defect(3 * math.pi / 8)])
def test_envelope_monotone_on_grid(profile, geometry):
    k = KernelFn(geometry, profile)
    ds = np.linspace(0.1, 6.0, 60)
    env = np.array([envelope_grid_sup(k, d, n=41) for d in ds])
    assert np.all(np.diff(env) < 0)


@pytest.mark.parametrize("profile", [GAUSS, MAGIC])
def test_smeared_causal_cone(profile):
    k = KernelFn(Geometry.defect(3 * math.pi / 8), profile)
    ref = minimal_update_envelope(k, 1.0 / profile.lam)
    for d in (8.0, 9.0, 12.0, 20.0):
        assert minimal_update_envelope(k, d / profile.lam) <= 1e-6 * ref


def test_trivial_defect_envelope_is_zero():
    assert minimal_update_envelope(KernelFn(Geometry.defect(math.pi / 4), MAGIC), 1.0) < 1e-16


# --- grids ------------------------------------------------------------------------

def test_kernel_grid_csv(tmp_path):
    k = KernelFn(Geometry.defect(0.4), MAGIC)
    grid = kernel_grid(k, 3.0, 11)
    assert grid.x.size == 12 and not np.any(grid.x == 0)
    path = grid.to_csv(tmp_path / "map.csv")
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["x", "y", "abs_modification"] and len(rows) == 1 + 144
    x, y, v = map(float, rows[5])
    assert v == abs(modification_value(k, x, y))


def test_boundary_grid_axis_positive():
    g = kernel_grid(KernelFn(Geometry.boundary(NEUMANN), GAUSS), 2.0, 10)
    assert g.x[0] > 0 and g.x[-1] == 2.0 and g.values.shape == (10, 10)
    with pytest.raises(DomainError):
        kernel_grid(KernelFn(Geometry.full(), GAUSS), 2.0, 10)
