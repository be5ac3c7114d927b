import math

import numpy as np
import pytest
from scipy.integrate import quad

from quasinodal import Nonlinearity, Potential, validate_hypotheses
from quasinodal.errors import InvalidSampleSpec
from quasinodal.model import default_samples

MU_MAX = 36 * math.pi**2  # first Dirichlet eigenvalue of the annulus (1/3, 1/2)


def test_builtin_values_at_one():
    nl = Nonlinearity.builtin(1.0)
    assert nl.g(1.0) == 0.5
    assert nl.G(1.0) == pytest.approx(math.log(2) / 2 - 0.25, rel=1e-15)
    assert nl.g(0.0) == 0.0 and nl.G(0.0) == 0.0


def test_builtin_is_odd_and_scales_with_l():
    t = np.linspace(-10, 10, 101)
    nl, nl3 = Nonlinearity.builtin(1.0), Nonlinearity.builtin(3.0)
    np.testing.assert_array_equal(nl.g(-t), -nl.g(t))
    np.testing.assert_allclose(nl3.g(t), 3 * nl.g(t))
    np.testing.assert_allclose(nl3.G(t), 3 * nl.G(t))


def test_primitive_matches_quadrature():
    nl = Nonlinearity.builtin(1.0)
    for t in (1e-3, 0.1, 0.49, 0.51, 1.0, 17.0, 1e3, -2.5):
        ref, _ = quad(nl.g, 0, t, epsabs=0, epsrel=1e-13, limit=200)
        assert nl.G(t) == pytest.approx(ref, rel=1e-10)


def test_derivative_matches_finite_differences():
    nl = Nonlinearity.builtin(2.0)
    t = np.array([-4.0, -0.3, 0.2, 1.0, 9.0])
    eps = 1e-6
    np.testing.assert_allclose(nl.g_prime(t), (nl.g(t + eps) - nl.g(t - eps)) / (2 * eps), rtol=1e-7)


def test_semilinear_formulas():
    nl = Nonlinearity.semilinear()
    assert nl.g(2.0) == 8.0 and nl.G(2.0) == 4.0 and nl.g_prime(2.0) == 12.0


def test_asymptote():
    for l in (1.0, 400.0):
        nl = Nonlinearity.builtin(l)
        assert abs(nl.g(1e6) / 1e18 - l) <= 1e-6 * l


def test_remark13_potential_shape():
    V = Potential.remark13()
    assert V(0.5) == 0.0 and V(1.0) == 0.0
    assert V(1.5) == pytest.approx(0.25)
    assert V(2.0) == 1.0 and V(5.0) == 1.0
    eps = 1e-9
    assert abs(V(1 + eps) - V(1.0)) < 1e-12 and abs(V(2 + eps) - V(2.0)) < 1e-8
    assert V.zero_set == ((0.0, 0.25), (1 / 3, 0.5))


def test_invalid_constructions():
    with pytest.raises(ValueError):
        Nonlinearity("builtin_asymptotic", l=0.0)
    with pytest.raises(ValueError):
        Nonlinearity("custom", 1.0)
    with pytest.raises(ValueError):
        Potential.constant(-1.0)


def test_builtin_passes_all_checks():
    rep = validate_hypotheses(Nonlinearity.builtin(1.0), Potential.constant(1.0))
    assert rep.passed, rep.to_dict()
    assert all(c.status == "pass" for c in rep.checks)


def test_semilinear_fails_strict_ratio():
    rep = validate_hypotheses(Nonlinearity.semilinear(), Potential.constant(1.0))
    assert not rep.passed
    assert rep.by_name()["ratio_below_l"].status == "fail"


def test_vanishing_threshold():
    ok = validate_hypotheses(Nonlinearity.builtin(400.0), Potential.remark13(), "vanishing", mu=MU_MAX)
    assert ok.passed and ok.by_name()["l_above_mu"].status == "pass"
    bad = validate_hypotheses(Nonlinearity.builtin(100.0), Potential.remark13(), "vanishing", mu=MU_MAX)
    assert bad.by_name()["l_above_mu"].status == "fail"
    skipped = validate_hypotheses(Nonlinearity.builtin(400.0), Potential.remark13(), "vanishing")
    assert skipped.by_name()["l_above_mu"].status == "skipped"


def test_custom_potential_measure_not_checked():
    pot = Potential("custom_radial", custom=lambda r: np.maximum(r - 1, 0.0), zero_set=((0, 0.2), (0.4, 0.6)))
    rep = validate_hypotheses(Nonlinearity.builtin(400.0), pot, "vanishing", mu=300.0)
    assert rep.by_name()["V_finite_measure"].status == "not checked"


def test_sample_validation():
    with pytest.raises(InvalidSampleSpec):
        validate_hypotheses(Nonlinearity.builtin(), Potential.constant(), samples=[])
    with pytest.raises(InvalidSampleSpec):
        validate_hypotheses(Nonlinearity.builtin(), Potential.constant(), samples=[0.1, 0.2, -0.1])
    s = default_samples()
    assert np.array_equal(np.sort(s), -np.sort(s)[::-1])


def test_report_serializes():
    d = validate_hypotheses(Nonlinearity.builtin(), Potential.constant()).to_dict()
    assert d["passed"] and d["exponents"] == {"p": 3.0, "q": 6.0}
    assert {c["name"] for c in d["checks"]} >= {"small_t_order", "primitive_bounds"}
