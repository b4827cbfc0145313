"""Moduli, Dini verdicts, branch selection, aggregate classifier, Kato curve."""

import numpy as np
import pytest

from levydirichlet.domains import Ball
from levydirichlet.fields import make_field
from levydirichlet.levy_models import make_stable
from levydirichlet.potential_kernels import potential_profile
from levydirichlet.quadrature import DIVERGENT, FINITE
from levydirichlet.regularity import (
    BRANCH_FIELD_MODULUS,
    BRANCH_GRADIENT_MODULUS,
    ModulusSpec,
    RegularityError,
    classify_regularity,
    dini_integral,
    estimate_modulus,
    kato_curve,
    select_branch,
)

B1_1D = Ball(center=(0.0,), radius=1.0)
B1_2D = Ball(center=(0.0, 0.0), radius=1.0)


# --- modulus estimation -----------------------------------------------------------

def test_modulus_of_root_power_field():
    f = make_field("power", p=0.5)
    t_grid = 0.5 ** np.arange(1, 9)[::-1]
    omega = estimate_modulus(f, B1_2D, t_grid, seed=3)
    ratio = omega(t_grid) / t_grid**0.5
    assert np.all(ratio > 0.5) and np.all(ratio < 2.0)


def test_modulus_constant_field_is_zero():
    omega = estimate_modulus(make_field("constant", c=4.0), B1_1D,
                             0.5 ** np.arange(1, 6), seed=1)
    assert np.all(omega(np.array([0.1, 0.3])) == 0.0)


def test_gradient_modulus_of_linear_field():
    f = make_field("polynomial", coeffs=[0.3, 2.0])
    omega = estimate_modulus(f, B1_1D, 0.5 ** np.arange(1, 6),
                             use_gradient=True, seed=2)
    assert np.all(omega(np.array([0.1, 0.4])) < 1e-10)


def test_gradient_modulus_requires_gradient():
    f = make_field("indicator_halfspace")
    with pytest.raises(RegularityError):
        estimate_modulus(f, B1_1D, np.array([0.1]), use_gradient=True)


def test_modulus_monotone():
    f = make_field("log_power", p=1.0, beta=0.5)
    t = 0.5 ** np.arange(1, 10)[::-1]
    omega = estimate_modulus(f, B1_1D, t, seed=5)
    vals = omega(t)
    assert np.all(np.diff(vals) >= 0)


# --- branch selection --------------------------------------------------------------

@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_branch_rule(alpha, d):
    prof = potential_profile(make_stable(alpha, d))
    branch = select_branch(prof)
    if alpha <= 1.0:
        assert branch == BRANCH_GRADIENT_MODULUS
    else:
        assert branch == BRANCH_FIELD_MODULUS


# --- Dini integral ------------------------------------------------------------------

def test_dini_log_corrected_finite():
    # S_eff = t^{a-2}, omega = t^{1-a} ln^{-2}: integrable log correction
    rep = dini_integral(lambda t: t ** (0.5 - 2.0), ModulusSpec.power_log(0.5, -2.0))
    assert rep.verdict == FINITE


def test_dini_critical_divergent():
    rep = dini_integral(lambda t: t ** (0.5 - 2.0), ModulusSpec.power_log(0.5, 0.0))
    assert rep.verdict == DIVERGENT


def test_dini_value_pure_power():
    # S_eff = t^{alpha-2}, omega = t^{1-alpha+eps}: integrand t^{eps-1},
    # exact value (1/2)^eps / eps
    eps = 0.1
    alpha = 0.5
    rep = dini_integral(lambda t: t ** (alpha - 2.0),
                        ModulusSpec.power_log(1.0 - alpha + eps, 0.0))
    assert rep.verdict == FINITE
    assert rep.value == pytest.approx(0.5**eps / eps, rel=1e-2)
    # a faster-converging case is extrapolation-exact
    rep2 = dini_integral(lambda t: 1.0 / t**0.25, ModulusSpec.power_log(1.0, 0.0))
    assert rep2.value == pytest.approx(0.5**1.75 / 1.75, rel=1e-9)


def test_dini_rejects_negative_integrand():
    with pytest.raises(RegularityError):
        dini_integral(lambda t: -np.ones_like(t), ModulusSpec.power_log(1.0, 0.0))


def test_dini_grid_matches_analytic_rule():
    # compact version of the exhaustive acceptance sweep
    for a in (0.0, 0.5, 1.0):
        for b in (-2.0, 0.0, 1.0):
            for c in (-1.9, -1.0, -0.5):
                rep = dini_integral(lambda t: t**c, ModulusSpec.power_log(a, b))
                s = a + c
                expect = FINITE if (s > -1 or (s == -1 and b < -1)) else DIVERGENT
                assert rep.verdict == expect, (a, b, c)


# --- aggregate classifier --------------------------------------------------------------

def test_classifier_applies_with_log_modulus():
    model = make_stable(1.5, 2)
    prof = potential_profile(model)
    f = make_field("power", p=0.5)
    f.declared_modulus = ModulusSpec.power_log(0.5, -2.0)
    rep = classify_regularity(model, prof, f, B1_2D)
    assert rep.verdict == "applies"
    assert rep.branch == BRANCH_FIELD_MODULUS


def test_classifier_inconclusive_on_critical_field():
    model = make_stable(1.5, 1)
    prof = potential_profile(model)
    from levydirichlet.counterexamples import make_counterexample_f
    f = make_counterexample_f(1.5, 1)
    rep = classify_regularity(model, prof, f, B1_1D)
    assert rep.verdict == "inconclusive"
    assert rep.dini is not None and rep.dini.verdict == DIVERGENT


@pytest.mark.parametrize("alpha", [0.5, 1.5])
def test_classifier_applies_for_smooth_field(alpha):
    model = make_stable(alpha, 1)
    prof = potential_profile(model)
    f = make_field("polynomial", coeffs=[0.0, 1.0, 0.5])
    rep = classify_regularity(model, prof, f, B1_1D, seed=6)
    assert rep.verdict == "applies"


def test_classifier_never_claims_failure():
    model = make_stable(1.5, 1)
    prof = potential_profile(model)
    from levydirichlet.counterexamples import make_counterexample_f
    rep = classify_regularity(model, prof, make_counterexample_f(1.5, 1), B1_1D)
    assert rep.verdict in ("applies", "inconclusive")


def test_classifier_subordinate_model():
    # non-closed-form kernel path through the aggregate classifier
    from levydirichlet.levy_models import make_subordinate_bm, stable_subordinator_spec
    model = make_subordinate_bm(stable_subordinator_spec(1.2), 3)
    prof = potential_profile(model)
    f = make_field("power", p=0.8)
    f.declared_modulus = ModulusSpec.power_log(0.8, -2.0)
    rep = classify_regularity(model, prof, f, Ball(center=(0.0, 0.0, 0.0), radius=1.0),
                              growth_grid=np.linspace(0.02, 0.9, 25))
    assert rep.branch == BRANCH_FIELD_MODULUS
    assert rep.verdict == "applies"


# --- Kato curve -----------------------------------------------------------------------

def test_kato_bounded_field_linear_bound():
    model = make_stable(1.0, 1)
    f = make_field("constant", c=2.0)
    r_grid = np.array([0.01, 0.05, 0.2])
    curve = kato_curve(model, f, B1_1D, r_grid, np.array([[0.0], [0.5]]))
    assert np.all(curve.values <= 2.0 * r_grid * 1.02 + 1e-9)
    assert curve.kato_consistent


def test_kato_zero_field():
    model = make_stable(1.0, 1)
    curve = kato_curve(model, make_field("constant", c=0.0), B1_1D,
                       np.array([0.01, 0.1]), np.array([[0.0]]))
    assert np.all(curve.values == 0.0)


def test_kato_singular_field_still_vanishes():
    # f = |y|^{-0.2} on B1, Cauchy process: frozen nested-quadrature oracle
    # gives 0.0051 at r = 1e-3 (< the 1e-2 requirement)
    model = make_stable(1.0, 1)
    f = make_field("inverse_power", p=0.2)
    r_grid = np.array([1e-3, 1e-2, 1e-1])
    curve = kato_curve(model, f, B1_1D, r_grid,
                       np.array([[-0.5], [0.0], [0.5]]))
    assert np.all(np.diff(curve.values) > 0)
    assert curve.values[0] < 1e-2
    assert curve.values[0] == pytest.approx(0.0051, rel=0.25)
    assert curve.kato_consistent


def test_kato_consistency_with_dini():
    # a field whose Dini test is finite lies in the Kato class: its curve
    # must decay toward 0
    model = make_stable(1.0, 1)
    prof = potential_profile(model)
    f = make_field("log_power", p=1.0, beta=2.0)
    f.declared_gradient_modulus = ModulusSpec.power_log(0.0, -2.0)
    rep = classify_regularity(model, prof, f, B1_1D)
    assert rep.dini.verdict == FINITE
    curve = kato_curve(model, f, B1_1D, np.array([1e-3, 1e-2, 1e-1]),
                       np.array([[0.0], [0.4]]))
    assert curve.kato_consistent
