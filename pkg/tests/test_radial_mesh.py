import math

import numpy as np
import pytest

from quasinodal import RadialField, build_grid, dirichlet_eig_first, grad_sq, integrate, lp_norm
from quasinodal.errors import BadDimension, BadResolution, GridMismatch, TooFewNodes
from quasinodal.radial_mesh import (
    critical_exponent,
    solve_tridiagonal,
    sphere_area,
    stiffness_apply,
)


def test_sphere_area_and_exponent():
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert sphere_area(4) == pytest.approx(2 * math.pi**2)
    assert critical_exponent(3) == 6.0


def test_grid_geometry():
    g = build_grid(3, 1.0, 999)
    assert g.h == pytest.approx(1e-3)
    assert g.nodes[0] == pytest.approx(g.h) and g.nodes[-1] == pytest.approx(1 - g.h)
    assert g.volume() == pytest.approx(4 * math.pi / 3, rel=1e-5)
    assert integrate(g, np.ones(g.n)) + g.boundary_weight == pytest.approx(g.volume())


def test_grid_errors():
    with pytest.raises(BadDimension):
        build_grid(2, 1.0, 100)
    with pytest.raises(BadResolution):
        build_grid(3, -1.0, 100)
    with pytest.raises(BadResolution):
        build_grid(3, 1.0, 4)
    with pytest.raises(GridMismatch):
        RadialField(build_grid(3, 1.0, 100), np.ones(99))


def test_dirichlet_form_of_sine_mode():
    # u = sin(pi r)/r on the unit ball: |grad u|^2 / |u|^2 = pi^2, |u|_2^2 = 2 pi
    g = build_grid(3, 1.0, 4000)
    u = RadialField(g, np.sin(math.pi * g.nodes) / g.nodes)
    assert lp_norm(u) ** 2 == pytest.approx(2 * math.pi, rel=1e-5)
    assert grad_sq(u) / lp_norm(u) ** 2 == pytest.approx(math.pi**2, rel=1e-5)


def test_stiffness_matches_form(rng):
    g = build_grid(3, 2.0, 300)
    u = rng.standard_normal(g.n)
    assert float(u @ stiffness_apply(g, u)) == pytest.approx(grad_sq(RadialField(g, u)), rel=1e-12)
    d, o = g.stiffness_bands()
    x = solve_tridiagonal(d, o, stiffness_apply(g, u))
    np.testing.assert_allclose(x, u, rtol=1e-8, atol=1e-8)


def test_annulus_slice_and_snap():
    g = build_grid(3, 1.0, 99)
    sl = g.annulus_slice(0.2, 0.5)
    assert g.nodes[sl][0] == pytest.approx(0.21) and g.nodes[sl][-1] == pytest.approx(0.49)
    assert g.snap(0.2049) == pytest.approx(0.2)


def test_ball_eigenvalue():
    lam, u = dirichlet_eig_first(build_grid(3, 0.25, 4096), (0.0, 0.25))
    assert lam == pytest.approx(16 * math.pi**2, rel=1e-4)
    assert np.all(u.values > 0) and lp_norm(u) == pytest.approx(1.0)


def test_annulus_eigenvalue_and_support():
    g = build_grid(3, 0.5, 3 * 4097 - 1)
    lam, u = dirichlet_eig_first(g, (1 / 3, 0.5))
    assert lam == pytest.approx(36 * math.pi**2, rel=1e-4)
    assert np.all(u.values[g.nodes <= 1 / 3 + 1e-12] == 0)


def test_eigenvalue_converges_at_second_order():
    exact = 16 * math.pi**2
    errs = [abs(dirichlet_eig_first(build_grid(3, 0.25, m), (0, 0.25))[0] - exact) for m in (512, 1024, 2048)]
    for a, b in zip(errs[:-1], errs[1:]):
        assert 3.5 <= a / b <= 4.5


def test_too_few_nodes():
    with pytest.raises(TooFewNodes):
        dirichlet_eig_first(build_grid(3, 1.0, 100), (0.5, 0.7))
