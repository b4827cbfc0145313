"""Scalar fields on R^d: the data f, g of the Dirichlet problem.

A ``FieldFunction`` wraps a vectorized evaluation callable (batch shape
(n, d) -> (n,)), an optional gradient and an optional declared modulus of
continuity.  The named library below is what the CLI exposes for f and g.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np


class FieldError(ValueError):
    pass


def _batch(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[None, :] if x.ndim == 1 else x


@dataclass
class FieldFunction:
    fn: Callable
    grad: Optional[Callable] = None
    declared_modulus: Any = None            # modulus of f itself
    declared_gradient_modulus: Any = None   # modulus of the gradient components
    name: str = "field"

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.fn(_batch(x)), dtype=float)

    def gradient(self, x) -> np.ndarray:
        if self.grad is None:
            raise FieldError(f"field {self.name!r} has no gradient")
        return np.asarray(self.grad(_batch(x)), dtype=float)


def check_gradient(field: FieldFunction, points, tol: float = 1e-4) -> float:
    """Max relative mismatch of the declared gradient against central
    differences at the given points; raises when above tol."""
    pts = _batch(points)
    n, d = pts.shape
    g = field.gradient(pts)
    h = 1e-6
    worst = 0.0
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        num = (field(pts + e) - field(pts - e)) / (2 * h)
        scale = np.maximum(np.abs(g[:, j]), 1.0)
        worst = max(worst, float(np.max(np.abs(num - g[:, j]) / scale)))
    if worst > tol:
        raise FieldError(f"gradient check failed: mismatch {worst:.2e} > {tol:.0e}")
    return worst


def log_factor(t, beta: float):
    """ln^{-beta}(1 + 1/t) for t > 0, zero-safe."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.log1p(1.0 / t[pos]) ** (-beta)
    return out


def positive_part_power(p: float, beta: float = 0.0, dim_axis: int = -1) -> FieldFunction:
    """f(y) = ((y_d)_+)^p * ln^{-beta}(1 + 1/(y_d)_+), the workhorse profile.

    With beta = 0 this is the plain positive-part power; the gradient is in
    the e_d direction only.
    """
    def fn(x):
        s = np.maximum(_batch(x)[:, dim_axis], 0.0)
        out = np.zeros_like(s)
        pos = s > 0
        out[pos] = s[pos] ** p
        if beta != 0.0:
            out[pos] *= np.log1p(1.0 / s[pos]) ** (-beta)
        return out

    def grad(x):
        xb = _batch(x)
        s = np.maximum(xb[:, dim_axis], 0.0)
        gz = np.zeros(xb.shape)
        pos = s > 0
        sp = s[pos]
        if beta == 0.0:
            gs = p * sp ** (p - 1.0)
        else:
            L = np.log1p(1.0 / sp)
            gs = p * sp ** (p - 1.0) * L ** (-beta) \
                + beta * sp ** (p - 1.0) * L ** (-beta - 1.0) / (1.0 + sp)
        gz[pos, dim_axis] = gs
        return gz

    tag = f"((y_d)+)^{p}" if beta == 0.0 else f"((y_d)+)^{p} ln^-{beta}(1+1/(y_d)+)"
    return FieldFunction(fn=fn, grad=grad, name=tag)


_REGISTRY = {}


def register_field(name):
    def deco(builder):
        _REGISTRY[name] = builder
        return builder
    return deco


@register_field("constant")
def _constant(c: float = 1.0, **_):
    c = float(c)
    return FieldFunction(fn=lambda x: np.full(len(_batch(x)), c),
                         grad=lambda x: np.zeros(_batch(x).shape),
                         name=f"constant({c})")


@register_field("power")
def _power(p: float, **_):
    return positive_part_power(float(p))


@register_field("log_power")
def _log_power(p: float, beta: float, **_):
    return positive_part_power(float(p), beta=float(beta))


@register_field("polynomial")
def _polynomial(coeffs, **_):
    coeffs = [float(c) for c in coeffs]

    def fn(x):
        s = _batch(x)[:, -1]
        return sum(c * s**k for k, c in enumerate(coeffs))

    def grad(x):
        xb = _batch(x)
        s = xb[:, -1]
        g = np.zeros(xb.shape)
        g[:, -1] = sum(k * c * s ** (k - 1) for k, c in enumerate(coeffs) if k > 0)
        return g

    return FieldFunction(fn=fn, grad=grad, name=f"poly{coeffs}")


@register_field("indicator_outside_ball")
def _indicator_outside(radius: float, **_):
    radius = float(radius)
    return FieldFunction(
        fn=lambda x: (np.linalg.norm(_batch(x), axis=1) > radius).astype(float),
        name=f"1_{{|z|>{radius}}}")


@register_field("indicator_halfspace")
def _indicator_halfspace(level: float = 0.0, **_):
    level = float(level)
    return FieldFunction(
        fn=lambda x: (_batch(x)[:, -1] > level).astype(float),
        name=f"1_{{y_d>{level}}}")


@register_field("inverse_power")
def _inverse_power(p: float, **_):
    p = float(p)

    def fn(x):
        r = np.linalg.norm(_batch(x), axis=1)
        out = np.zeros_like(r)
        pos = r > 0
        out[pos] = r[pos] ** (-p)
        return out

    return FieldFunction(fn=fn, name=f"|y|^-{p}")


@register_field("inverse_quadratic")
def _inverse_quadratic(scale: float = 1.0, **_):
    scale = float(scale)

    def fn(x):
        r2 = np.sum(_batch(x) ** 2, axis=1)
        return 1.0 / (1.0 + r2 / scale**2)

    def grad(x):
        xb = _batch(x)
        r2 = np.sum(xb**2, axis=1)
        return -2.0 * xb / (scale**2 * (1.0 + r2 / scale**2)[:, None] ** 2)

    return FieldFunction(fn=fn, grad=grad, name="1/(1+|z|^2)")


def make_field(name: str, **params) -> FieldFunction:
    if name not in _REGISTRY:
        raise FieldError(f"unknown field {name!r}; available: {sorted(_REGISTRY)}")
    return _REGISTRY[name](**params)


def field_from_dict(data: dict) -> FieldFunction:
    data = dict(data)
    name = data.pop("name", None)
    if name is None:
        raise FieldError("field spec needs a 'name'")
    return make_field(name, **data)


def tabulated_field_1d(grid: np.ndarray, values: np.ndarray,
                       outside: FieldFunction, name: str = "tabulated") -> FieldFunction:
    """Piecewise-cubic field on a 1-d grid, delegating to ``outside`` beyond it.

    Used to feed one solve's output into another solve's exterior data.
    """
    from scipy.interpolate import PchipInterpolator
    interp = PchipInterpolator(np.asarray(grid, dtype=float),
                               np.asarray(values, dtype=float), extrapolate=False)

    def fn(x):
        s = _batch(x)[:, 0]
        out = np.asarray(outside(_batch(x)), dtype=float).copy()
        inside = (s >= grid[0]) & (s <= grid[-1])
        out[inside] = interp(s[inside])
        return out

    return FieldFunction(fn=fn, name=name)
