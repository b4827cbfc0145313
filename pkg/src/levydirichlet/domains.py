"""Bounded open domains with distance and inscribed-ball oracles.

All geometry is vectorized over point batches of shape (n, d).  For the
ball and the box the inscribed radius at an interior point equals the
distance to the boundary; for a union of balls the largest single-ball
slack is used, a valid inscribed radius and a lower bound for the true
boundary distance (conservative is correct for walk-on-spheres).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np


class DomainError(ValueError):
    pass


def _as_batch(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != dim:
        raise DomainError(f"points have dimension {x.shape[1]}, domain has {dim}")
    return x


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise DomainError("ball radius must be positive")

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    def contains(self, x) -> np.ndarray:
        x = _as_batch(x, self.dim)
        return np.linalg.norm(x - np.asarray(self.center), axis=1) < self.radius

    def dist_to_boundary(self, x) -> np.ndarray:
        x = _as_batch(x, self.dim)
        return self.radius - np.linalg.norm(x - np.asarray(self.center), axis=1)

    def inscribed_radius(self, x) -> np.ndarray:
        return self.dist_to_boundary(x)

    def nearest_exterior(self, x, push: float = 1e-9) -> np.ndarray:
        x = _as_batch(x, self.dim)
        c = np.asarray(self.center)
        v = x - c
        norm = np.linalg.norm(v, axis=1, keepdims=True)
        u = np.where(norm > 0, v / np.maximum(norm, 1e-300), _e_last(self.dim))
        return c + u * self.radius * (1.0 + push)


def _e_last(d: int) -> np.ndarray:
    e = np.zeros(d)
    e[-1] = 1.0
    return e


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise DomainError("box corner dimensions differ")
        if not all(l < h for l, h in zip(self.lo, self.hi)):
            raise DomainError("box must satisfy lo < hi componentwise")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(np.asarray(self.hi) - np.asarray(self.lo)))

    def contains(self, x) -> np.ndarray:
        x = _as_batch(x, self.dim)
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        return np.all((x > lo) & (x < hi), axis=1)

    def dist_to_boundary(self, x) -> np.ndarray:
        x = _as_batch(x, self.dim)
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        return np.min(np.minimum(x - lo, hi - x), axis=1)

    def inscribed_radius(self, x) -> np.ndarray:
        return self.dist_to_boundary(x)

    def nearest_exterior(self, x, push: float = 1e-9) -> np.ndarray:
        x = _as_batch(x, self.dim)
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        gap_lo = x - lo
        gap_hi = hi - x
        out = x.copy()
        scale = self.diameter * push
        for i in range(len(x)):
            gl, gh = gap_lo[i], gap_hi[i]
            j_lo, j_hi = np.argmin(gl), np.argmin(gh)
            if gl[j_lo] <= gh[j_hi]:
                out[i, j_lo] = lo[j_lo] - scale
            else:
                out[i, j_hi] = hi[j_hi] + scale
        return out


@dataclass(frozen=True)
class BallUnion:
    balls: tuple

    def __post_init__(self):
        if len(self.balls) == 0:
            raise DomainError("empty ball union")
        dims = {b.dim for b in self.balls}
        if len(dims) != 1:
            raise DomainError("balls in a union must share a dimension")

    @property
    def dim(self) -> int:
        return self.balls[0].dim

    @property
    def diameter(self) -> float:
        best = max(b.diameter for b in self.balls)
        for a, b in combinations(self.balls, 2):
            gap = np.linalg.norm(np.asarray(a.center) - np.asarray(b.center))
            best = max(best, gap + a.radius + b.radius)
        return float(best)

    def contains(self, x) -> np.ndarray:
        x = _as_batch(x, self.dim)
        out = np.zeros(len(x), dtype=bool)
        for b in self.balls:
            out |= b.contains(x)
        return out

    def _slacks(self, x) -> np.ndarray:
        x = _as_batch(x, self.dim)
        return np.stack([b.dist_to_boundary(x) for b in self.balls], axis=1)

    def inscribed_radius(self, x) -> np.ndarray:
        # largest single-ball slack: inscribed in the union, <= true distance
        return np.max(self._slacks(x), axis=1)

    def dist_to_boundary(self, x) -> np.ndarray:
        return self.inscribed_radius(x)

    def nearest_exterior(self, x, push: float = 1e-9) -> np.ndarray:
        x = _as_batch(x, self.dim)
        slack = self._slacks(x)
        best = np.argmax(slack, axis=1)
        out = x.copy()
        step = self.diameter * push
        for i in range(len(x)):
            b = self.balls[best[i]]
            y = b.nearest_exterior(x[i:i + 1], push=push)[0]
            c = np.asarray(b.center)
            u = y - c
            u = u / max(np.linalg.norm(u), 1e-300)
            guard = 0
            while self.contains(y[None, :])[0] and guard < 64:
                y = y + u * max(self.inscribed_radius(y[None, :])[0] + step, step)
                guard += 1
            out[i] = y
        return out


def domain_from_dict(data: dict):
    shape = data.get("shape")
    if shape == "ball":
        return Ball(center=tuple(data["center"]), radius=float(data["radius"]))
    if shape == "box":
        return Box(lo=tuple(data["lo"]), hi=tuple(data["hi"]))
    if shape == "ball_union":
        return BallUnion(balls=tuple(
            Ball(center=tuple(b["center"]), radius=float(b["radius"]))
            for b in data["balls"]))
    raise DomainError(f"unknown domain shape {shape!r}")


def domain_to_dict(dom) -> dict:
    if isinstance(dom, Ball):
        return {"shape": "ball", "center": list(dom.center), "radius": dom.radius}
    if isinstance(dom, Box):
        return {"shape": "box", "lo": list(dom.lo), "hi": list(dom.hi)}
    if isinstance(dom, BallUnion):
        return {"shape": "ball_union",
                "balls": [{"center": list(b.center), "radius": b.radius} for b in dom.balls]}
    raise DomainError(f"cannot serialize domain {type(dom).__name__}")
