import math

import numpy as np
import pytest
from scipy.integrate import quad

from quasinodal import DualTransform, IdentityTransform, f_forward, f_inverse_closed_form, f_prime, f_second
from quasinodal.errors import NonConvergence

# int_0^1 sqrt(1 + 2 s^2) ds, frozen from adaptive quadrature
F_AT_ONE = 1.2712738985228156


def test_closed_form_inverse_matches_quadrature():
    for y in (0.1, 1.0, 3.0, 50.0):
        ref, _ = quad(lambda s: math.sqrt(1 + 2 * s * s), 0, y, epsabs=0, epsrel=1e-13)
        assert f_inverse_closed_form(y) == pytest.approx(ref, rel=1e-13)
    assert f_inverse_closed_form(1.0) == pytest.approx(F_AT_ONE, rel=1e-15)
    assert f_inverse_closed_form(-1.0) == -f_inverse_closed_form(1.0)
    assert f_inverse_closed_form(0.0) == 0.0


def test_closed_form_derivative():
    y = np.linspace(-5, 5, 41)
    eps = 1e-6
    fd = (f_inverse_closed_form(y + eps) - f_inverse_closed_form(y - eps)) / (2 * eps)
    np.testing.assert_allclose(fd, np.sqrt(1 + 2 * y * y), rtol=1e-8)


def test_forward_values():
    assert f_forward(0.0) == 0.0
    assert f_forward(F_AT_ONE) == pytest.approx(1.0, rel=1e-14)
    y = f_forward(1e8)
    assert abs(y / math.sqrt(1e8) - 2**0.25) <= 1e-3


def test_forward_is_exactly_odd():
    t = np.logspace(-8, 8, 1001)
    tr = DualTransform()
    assert np.array_equal(tr(-t), -tr(t))


def test_prime_range_and_limits():
    t = np.concatenate([-np.logspace(-8, 8, 200), [0.0], np.logspace(-8, 8, 200)])
    fp = f_prime(t)
    assert np.all(fp > 0) and np.all(fp <= 1)
    assert f_prime(0.0) == 1.0
    assert abs(f_prime(1e8) * 1e4 - 2**-0.75) <= 1e-3


def test_second_derivative_against_finite_differences():
    tr = DualTransform()
    t = np.array([-3.0, -0.5, 0.2, 1.0, 7.0])
    eps = 1e-5
    fd = (tr.prime(t + eps) - tr.prime(t - eps)) / (2 * eps)
    np.testing.assert_allclose(tr.second(t), fd, rtol=1e-7)
    assert f_second(0.0) == 0.0
    assert f_second(2.0) < 0
    assert f_second(2.0) + f_second(-2.0) == 0.0


def test_evaluate_bundle():
    f, fp, fpp = DualTransform().evaluate(np.array([0.3, 2.0]))
    np.testing.assert_allclose(fp, 1 / np.sqrt(1 + 2 * f * f))
    np.testing.assert_allclose(fpp, -2 * f * fp**4)


def test_overflow_guard():
    y = DualTransform()(1e305)
    assert y == pytest.approx(2**0.25 * math.sqrt(1e305), rel=1e-12)


def test_misconfigured_newton_raises():
    with pytest.raises(NonConvergence):
        DualTransform(newton_tol=0.0, max_newton_iters=3)(np.array([5.0, 1e6]))


def test_identity_transform():
    tr = IdentityTransform()
    t = np.array([-2.0, 0.0, 3.0])
    assert np.array_equal(tr(t), t)
    assert np.all(tr.prime(t) == 1.0) and np.all(tr.second(t) == 0.0)
