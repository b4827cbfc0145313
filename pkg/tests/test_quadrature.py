"""Quadrature engine tests against scipy.integrate.quad and closed forms."""

import numpy as np
import pytest
from scipy.integrate import quad

from levydirichlet.quadrature import (
    DIVERGENT,
    FINITE,
    char_kernel,
    fixed_quad,
    improper_quad,
    osc_tail,
    panel_quad_down,
    panel_quad_up,
    radial_fourier,
    radial_fourier_diff,
    wynn_epsilon,
)


def test_fixed_quad_polynomial():
    assert fixed_quad(lambda x: x**2, 0.0, 2.0) == pytest.approx(8.0 / 3.0, rel=1e-13)


def test_wynn_geometric_series():
    # partial sums of sum 0.5^k = 2
    partial = np.cumsum(0.5 ** np.arange(12))
    est, err = wynn_epsilon(partial)
    assert est == pytest.approx(2.0, abs=1e-10)


def test_wynn_alternating_divergent_abel_sum():
    # sum (-1)^k (k+1) is Abel-summable to 1/4
    terms = np.array([(-1) ** k * (k + 1) for k in range(24)], dtype=float)
    est, err = wynn_epsilon(np.cumsum(terms))
    assert est == pytest.approx(0.25, abs=1e-8)


@pytest.mark.parametrize("p", [-0.5, -0.9, 0.3, 1.7])
def test_power_endpoint_finite(p):
    res = panel_quad_down(lambda t: t**p, 1.0)
    assert res.verdict == FINITE
    assert res.value == pytest.approx(1.0 / (p + 1.0), rel=1e-10)


@pytest.mark.parametrize("p", [-1.0, -1.4, -2.3])
def test_power_endpoint_divergent(p):
    res = panel_quad_down(lambda t: t**p, 1.0)
    assert res.verdict == DIVERGENT
    # fitted integrand exponent should roughly recover p
    assert res.rate == pytest.approx(p, abs=0.15)


@pytest.mark.parametrize("p", [-1.3, -2.5])
def test_power_tail_finite(p):
    res = panel_quad_up(lambda t: t**p, 1.0)
    assert res.verdict == FINITE
    assert res.value == pytest.approx(1.0 / (-p - 1.0), rel=1e-10)


@pytest.mark.parametrize("p", [-1.0, -0.5])
def test_power_tail_divergent(p):
    res = panel_quad_up(lambda t: t**p, 1.0)
    assert res.verdict == DIVERGENT


def test_log_divergence_toward_zero():
    # 1/(t log^2(1/t)) integrable; 1/(t log^{1/2}(1/t)) is not
    fin = panel_quad_down(lambda t: 1.0 / (t * np.log(1.0 / t) ** 2), 0.4)
    div = panel_quad_down(lambda t: 1.0 / (t * np.sqrt(np.log(1.0 / t))), 0.4)
    assert fin.verdict == FINITE
    oracle = quad(lambda t: 1.0 / (t * np.log(1.0 / t) ** 2), 0.0, 0.4)[0]
    assert fin.value == pytest.approx(oracle, rel=2e-2)
    assert div.verdict == DIVERGENT


def test_improper_both_ends():
    res = improper_quad(lambda t: np.exp(-t) / np.sqrt(t), 0.0, np.inf)
    assert res.verdict == FINITE
    assert res.value == pytest.approx(np.sqrt(np.pi), rel=1e-9)


def test_osc_tail_against_closed_form():
    # int_0^inf cos(u)/(1+u^2) du = pi/(2e)
    head = fixed_quad(lambda u: np.cos(u) / (1 + u**2), 0.0, np.pi / 2, n_panels=4)
    tail, err = osc_tail(lambda u: 1.0 / (1 + u**2), 1, 1.0, np.pi / 2)
    assert head + tail == pytest.approx(np.pi / (2 * np.e), abs=1e-10)


def test_radial_fourier_gaussian_d1():
    # F(xi) = exp(-xi^2/2): (1/2pi) int e^{i xi x} F = N(0,1) density
    for r in (0.0, 0.7, 2.1):
        val, err = radial_fourier(lambda u: np.exp(-(u**2) / 2.0), r, 1)
        assert val == pytest.approx(np.exp(-(r**2) / 2.0) / np.sqrt(2 * np.pi), abs=1e-10)


@pytest.mark.parametrize("d", [2, 3])
def test_radial_fourier_gaussian_higher_d(d):
    # e^{-t|xi|^2} inverts to the heat kernel (4 pi t)^{-d/2} e^{-r^2/(4t)}
    t = 0.3
    for r in (0.5, 1.5):
        val, err = radial_fourier(lambda u: np.exp(-t * u**2), r, d)
        expect = (4 * np.pi * t) ** (-d / 2.0) * np.exp(-(r**2) / (4 * t))
        assert val == pytest.approx(expect, rel=1e-8)


def test_radial_fourier_cauchy_density():
    # e^{-t|xi|}, d=1 inverts to the Cauchy density t/(pi(t^2+x^2))
    t = 0.8
    for r in (0.25, 1.0, 3.0):
        val, _ = radial_fourier(lambda u: np.exp(-t * u), r, 1)
        assert val == pytest.approx(t / (np.pi * (t**2 + r**2)), rel=1e-9)


def test_radial_fourier_diff_log_kernel():
    # (1/pi) int_0^inf (cos(a u) - cos(b u))/u du = (1/pi) ln(b/a)
    a, b = 0.5, 2.0
    val, err = radial_fourier_diff(lambda u: 1.0 / u, a, b, 1)
    assert val == pytest.approx(np.log(b / a) / np.pi, abs=1e-8)


def test_char_kernel_small_u():
    for d in (1, 2, 3):
        u = np.array([1e-9, 0.0])
        v = char_kernel(d, u)
        assert np.allclose(v, 1.0, atol=1e-12)
