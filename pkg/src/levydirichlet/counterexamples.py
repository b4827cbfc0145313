"""Critical right-hand sides and second-difference probes at the origin.

For the stable operator of order alpha the field f(y) = ((y_d)_+)^{2-alpha}
(log-corrected at alpha = 1) lies exactly on the Hoelder boundary where the
Dini test fails, and the convolution g = G * (f 1_{B_1}) loses its second
derivative at 0.  The probes certify this numerically: a one-sided (left)
difference quotient of the relevant first-derivative functional of g is
swept along a dyadic h-sequence and fitted against ln(1/h).

Probe layout (matching how the blow-up is isolated analytically):

* alpha < 1, any d:  quotient of w(x) = int_{B_{1/4}} G(x-y) d_d f(y) dy,
  the localized gradient part of d_d g;
* alpha = 1, d = 1:  quotient of g'(x) = int f(y)/(pi (y-x)) dy, which
  collapses to int_0^1 ln^{-beta}(1+1/y) / (y+h) dy -- the monotone
  divergent integral;
* alpha > 1, d = 1:  quotient of g'(x) = int (d/dx G)(x-y) f(y) dy, growing
  like (2-alpha) int_{2h} (1-(1+s)^{alpha-2}) s^{-2} ds ~ c ln(1/h);
* alpha >= 1, d > 1: quotient of d_d g(x) = int_{B_1} d_{x_d} G(x, y) f(y) dy.

The kernels are the true signed profiles, under which every probe diverges
to +infinity; the corrected fields (extra log factor with exponent > 1)
drive the same probes to finite limits.

A separate slab-quadrature check shows the lower-bound cube integral
int_{S2} y_d^{2-alpha} / |y|^{d+2-alpha} dy, over the diagonal sub-cube
S2 = {|y_i| < y_d < a}, diverging logarithmically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fields import FieldFunction, positive_part_power
from .potential_kernels import KernelProfile
from .quadrature import DIVERGENT, INCONCLUSIVE, QuadResult, _gl_rule, panel_quad_down
from .regularity import ModulusSpec


class ProbeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# critical and corrected fields
# ---------------------------------------------------------------------------

def make_counterexample_f(alpha: float, dim: int, beta: float = 0.5) -> FieldFunction:
    """The critical field: ((y_d)_+)^{2-alpha}, log-corrected at alpha = 1.

    beta (only used at alpha = 1) must lie in (0, 1).
    """
    if not 0.0 < alpha < 2.0:
        raise ProbeError(f"alpha must be in (0,2), got {alpha}")
    if dim < 1:
        raise ProbeError("dimension must be >= 1")
    if alpha == 1.0:
        if not 0.0 < beta < 1.0:
            raise ProbeError("the critical log exponent must lie in (0,1)")
        f = positive_part_power(1.0, beta=beta)
        f.declared_modulus = ModulusSpec.power_log(1.0, -beta)
        f.declared_gradient_modulus = ModulusSpec.power_log(0.0, -beta)
        return f
    f = positive_part_power(2.0 - alpha)
    if alpha > 1.0:
        f.declared_modulus = ModulusSpec.power_log(2.0 - alpha, 0.0)
    else:
        f.declared_modulus = ModulusSpec.power_log(1.0, 0.0)
        f.declared_gradient_modulus = ModulusSpec.power_log(1.0 - alpha, 0.0)
    return f


def make_corrected_f(alpha: float, dim: int, beta: float) -> FieldFunction:
    """The repaired field: same power, extra ln^{-beta}(1+1/t) with beta > 1,
    which restores the Dini condition on the relevant branch."""
    if not 0.0 < alpha < 2.0:
        raise ProbeError(f"alpha must be in (0,2), got {alpha}")
    if beta <= 1.0:
        raise ProbeError("the corrected log exponent must satisfy beta > 1")
    f = positive_part_power(2.0 - alpha, beta=beta)
    if alpha > 1.0:
        f.declared_modulus = ModulusSpec.power_log(2.0 - alpha, -beta)
    else:
        f.declared_modulus = ModulusSpec.power_log(1.0, 0.0)
        f.declared_gradient_modulus = ModulusSpec.power_log(1.0 - alpha, -beta)
    return f


def _field_profile(f: FieldFunction, dim: int):
    """Scalar profile s -> f(s e_d) and its derivative, for s > 0."""
    def prof(s):
        s = np.asarray(s, dtype=float)
        pts = np.zeros(s.shape + (dim,))
        pts[..., -1] = s
        return f(pts.reshape(-1, dim)).reshape(s.shape)

    def dprof(s):
        s = np.asarray(s, dtype=float)
        pts = np.zeros(s.shape + (dim,))
        pts[..., -1] = s
        return f.gradient(pts.reshape(-1, dim))[:, -1].reshape(s.shape)

    return prof, dprof


# ---------------------------------------------------------------------------
# probe quadratures
# ---------------------------------------------------------------------------

def _radial_panels(R: float, depth: int, order: int = 16):
    """Dyadic rho-panels on (R 2^{-depth}, R], GL nodes and weights."""
    edges = R * 2.0 ** (-np.arange(depth + 1, dtype=float))
    edges = edges[::-1]
    gl_x, gl_w = _gl_rule(order)
    a, h = edges[:-1], np.diff(edges)
    nodes = a[:, None] + (gl_x[None, :] + 1.0) * h[:, None] / 2.0
    weights = np.tile(gl_w, (len(a), 1)) * h[:, None] / 2.0
    return nodes.ravel(), weights.ravel()


def _halfball_quad(dim: int, R: float, depth: int, integrand) -> float:
    """integral over {y in B_R : y_d > 0} of integrand(y_d, |y|, |y + h e_d|
    callback form): integrand receives (s, rho, rho_h-callback).

    Angular reduction: d=1 direct; d=2 polar; d=3 spherical with azimuthal
    symmetry.  ``integrand(s, rho)`` must be vectorized.
    """
    rho, w_rho = _radial_panels(R, depth)
    if dim == 1:
        return float(np.sum(w_rho * integrand(rho, rho)))
    gl_x, gl_w = _gl_rule(48)
    if dim == 2:
        phi = (gl_x + 1.0) * (np.pi / 4.0)         # (0, pi/2): y_d = rho sin
        w_ang = gl_w * (np.pi / 4.0)
        u = np.sin(phi)
        jac = rho[:, None]
        # both angular halves y_1 <=> -y_1 are symmetric
        s = rho[:, None] * u[None, :]
        vals = integrand(s, np.broadcast_to(rho[:, None], s.shape))
        return float(2.0 * np.sum((w_rho[:, None] * w_ang[None, :]) * jac * vals))
    if dim == 3:
        u = (gl_x + 1.0) / 2.0                     # cos(theta) in (0,1)
        w_ang = gl_w / 2.0
        s = rho[:, None] * u[None, :]
        vals = integrand(s, np.broadcast_to(rho[:, None], s.shape))
        jac = 2.0 * np.pi * rho[:, None] ** 2
        return float(np.sum((w_rho[:, None] * w_ang[None, :]) * jac * vals))
    raise NotImplementedError("probes support d <= 3")


def _shifted_norm(s, rho, h):
    # |y + h e_d| from y_d = s, |y| = rho
    return np.sqrt(rho**2 + 2.0 * h * s + h * h)


@dataclass
class ProbeCurve:
    h: np.ndarray
    values: np.ndarray
    alpha: float
    dim: int
    kind: str
    fit: Optional[dict] = None

    def __post_init__(self):
        if len(self.h) < 8:
            raise ProbeError("probe curves need at least 8 h-points")
        if np.any(np.diff(self.h) >= 0):
            raise ProbeError("h sequence must be strictly decreasing")


def default_h_sequence(k_lo: int = 4, k_hi: int = 16) -> np.ndarray:
    return 2.0 ** (-np.arange(k_lo, k_hi + 1, dtype=float))


def second_difference_curve(profile: KernelProfile, f: FieldFunction,
                            h_seq=None) -> ProbeCurve:
    """One-sided second-difference diagnostics D(h) of g = G * (f 1_{B_1}).

    D(h) is positive and grows ~ ln(1/h) exactly when the critical field
    defeats the Dini condition; for repaired fields it converges.
    """
    if profile.alpha is None:
        raise ProbeError("probe requires a stable kernel profile")
    alpha, d = float(profile.alpha), profile.dim
    if h_seq is None:
        h_seq = default_h_sequence()
    h_seq = np.asarray(h_seq, dtype=float)
    if np.any(h_seq >= 0.125) or np.any(h_seq <= 0):
        raise ProbeError("h values must be dyadic points in (0, 1/8)")

    g, g1 = profile.g, profile.g1
    prof_f, dprof_f = _field_profile(f, d)

    vals = np.empty(len(h_seq))
    for i, h in enumerate(h_seq):
        depth = max(24, int(math.ceil(-math.log2(h))) + 14)
        if alpha < 1.0:
            def integrand(s, rho, h=h):
                return (g(rho) - g(_shifted_norm(s, rho, h))) / h * dprof_f(s)
            vals[i] = _halfball_quad(d, 0.25, depth, integrand)
        elif d == 1:
            if alpha == 1.0:
                def integrand(s, rho, h=h):
                    return prof_f(s) / (np.pi * s * (s + h))
            else:
                def integrand(s, rho, h=h):
                    return (g1(s + h) - g1(s)) / h * prof_f(s)
            vals[i] = _halfball_quad(1, 1.0, depth, integrand)
        else:
            def integrand(s, rho, h=h):
                rho_h = _shifted_norm(s, rho, h)
                lhs = -g1(rho) * s / rho
                rhs = -g1(rho_h) * (s + h) / rho_h
                return (lhs - rhs) / h * prof_f(s)
            vals[i] = _halfball_quad(d, 1.0, depth, integrand)
    return ProbeCurve(h=h_seq, values=vals, alpha=alpha, dim=d,
                      kind=f.name)


# ---------------------------------------------------------------------------
# verdicts
# ---------------------------------------------------------------------------

@dataclass
class ProbeVerdict:
    verdict: str                   # "divergent" | "bounded" | "inconclusive"
    slope: float
    r_squared: float
    increments_non_decreasing: bool
    increment_decay_exponent: Optional[float]
    limit_estimate: Optional[float]


def divergence_fit(curve: ProbeCurve) -> ProbeVerdict:
    """Fit D(h) against ln(1/h) and classify the curve.

    Divergent: positive slope with R^2 > 0.99 and non-decreasing increments
    (clean logarithmic growth), or positive increments decaying slower than
    1/k (slowly divergent, e.g. iterated-log growth of the critical
    alpha = 1 field).  Bounded: increments decay faster than 1/k and the
    extrapolated remainder is negligible.  Anything else: inconclusive.
    """
    h, D = curve.h, curve.values
    x = np.log(1.0 / h)
    scale = float(np.max(np.abs(D)))
    fit_keys = {}
    if scale < 1e-12:
        v = ProbeVerdict("bounded", 0.0, 1.0, True, None, 0.0)
        curve.fit = vars(v)
        return v

    xm, Dm = x - x.mean(), D - D.mean()
    slope = float((xm * Dm).sum() / (xm * xm).sum())
    resid = Dm - slope * xm
    r2 = 1.0 - float((resid**2).sum() / max((Dm**2).sum(), 1e-300))

    inc = np.diff(D)
    tol = 0.02 * max(float(np.abs(inc).max()), 1e-300)
    non_decreasing = bool(np.all(inc[1:] >= inc[:-1] - tol))
    all_positive = bool(np.all(inc > 0))

    p_hat = None
    if all_positive:
        # decay exponent of the increments, fitted on the tail (the
        # pre-asymptotic head would bias a global fit)
        m = min(6, len(inc))
        k = np.arange(1, len(inc) + 1, dtype=float)[-m:]
        lk, li = np.log(k), np.log(inc[-m:])
        lk -= lk.mean()
        p_hat = -float((lk * (li - li.mean())).sum() / (lk * lk).sum())

    if slope > 0 and r2 > 0.99 and non_decreasing and all_positive:
        v = ProbeVerdict(DIVERGENT, slope, r2, non_decreasing, p_hat, None)
    elif all_positive and p_hat is not None and p_hat < 0.8 and slope > 0:
        v = ProbeVerdict(DIVERGENT, slope, r2, non_decreasing, p_hat, None)
    elif p_hat is not None and p_hat > 1.25:
        k_last = len(inc)
        tail = abs(inc[-1]) * k_last / (p_hat - 1.0)
        limit = float(D[-1] + math.copysign(tail, inc[-1]))
        v = ProbeVerdict("bounded", slope, r2, non_decreasing, p_hat, limit)
    elif np.all(np.abs(inc) < 1e-9 * scale):
        v = ProbeVerdict("bounded", slope, r2, non_decreasing, p_hat, float(D[-1]))
    else:
        v = ProbeVerdict(INCONCLUSIVE, slope, r2, non_decreasing, p_hat, None)
    curve.fit = {k: val for k, val in vars(v).items()}
    return v


# ---------------------------------------------------------------------------
# the lower-bound cube integral
# ---------------------------------------------------------------------------

def cube_integrand_check(alpha: float, dim: int) -> QuadResult:
    """Panel verdict on int_{S2} y_d^{2-alpha} / |y|^{d+2-alpha} dy, where
    S2 = {y : |y_i| < y_d < a, i < d} with a = 1/(4 sqrt(d)).

    Reduced to slabs y_d = s with the cross-section integrated by GL; the
    slab profile is ~ C/s, so the dyadic panel sums are flat: logarithmic
    divergence.
    """
    a = 1.0 / (4.0 * math.sqrt(dim))
    q = dim + 2.0 - alpha
    if dim == 1:
        integrand = lambda s: s ** (2.0 - alpha) * s ** (-q)
    else:
        gl_x, gl_w = _gl_rule(24)
        if dim == 2:
            def integrand(s):
                s = np.asarray(s, dtype=float)
                w = s[:, None] * gl_x[None, :]          # y_1 in (-s, s)
                r2 = s[:, None] ** 2 + w**2
                inner = (r2 ** (-q / 2.0)) @ gl_w * s
                return s ** (2.0 - alpha) * inner
        else:
            def integrand(s):
                s = np.asarray(s, dtype=float)
                w1 = s[:, None, None] * gl_x[None, :, None]
                w2 = s[:, None, None] * gl_x[None, None, :]
                r2 = s[:, None, None] ** 2 + w1**2 + w2**2
                inner = np.einsum("ijk,j,k->i", r2 ** (-q / 2.0), gl_w, gl_w) * s**2
                return s ** (2.0 - alpha) * inner
    return panel_quad_down(integrand, a, order=16, k_max=40)
