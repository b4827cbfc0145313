"""Walk-on-spheres Monte Carlo for the stable nonlocal Dirichlet problem.

The solver realizes u = -G_D[f] + P_D[g]:

* harmonic measure P_D[g](x): iterate exact exits from largest inscribed
  balls until landing outside D, then average g at the landing points.
  From a ball's center the exit radius has the closed-form law
  (r/|Z|)^2 ~ Beta(alpha/2, 1 - alpha/2) and the direction is uniform, so
  every step is exact (no time discretization).
* Green operator G_D[f](x): along the same walk each inscribed ball
  contributes int_B G_B(center, y) f(y) dy; the ball Green mass is
  E tau = c(alpha, d) rho^alpha (Getoor's constant) and the normalized
  occupation density on the unit ball is built once per (alpha, d) from
  the Hunt formula G_B(0, u) = G(u) - E^0 G(u - Z), with the exit
  expectation reduced to deterministic quadrature of the Poisson kernel.
  A path estimator with exact stable increments (Gaussian subordination,
  Kanter's sampler) cross-validates it.

Randomness is counter-based (Philox): walk blocks get independent
substreams keyed by (seed, block index), so estimates are reproducible
and merge order-independent.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import gamma as gamma_fn

from .domains import Ball
from .levy_models import LevyModel
from .potential_kernels import UnsupportedModelError, potential_profile
from .quadrature import _gl_rule, panel_sums, sphere_area


class SamplingError(RuntimeError):
    """Rejection sampling fell below its acceptance floor."""


class WalkCapError(RuntimeError):
    """Walks exceeded the step cap; carries diagnostics."""

    def __init__(self, remaining: int, cap: int):
        super().__init__(f"{remaining} walks still active after {cap} steps")
        self.remaining = remaining
        self.cap = cap


@dataclass
class McEstimate:
    value: float
    std_error: float
    n_samples: int
    seed: int

    def agrees_with(self, other: "McEstimate", n_sigma: float = 3.0) -> bool:
        sigma = math.hypot(self.std_error, other.std_error)
        return abs(self.value - other.value) <= n_sigma * sigma


@dataclass
class WalkConfig:
    n_samples: int = 100_000
    seed: int = 0
    eps_wos: Optional[float] = None      # boundary band; default 1e-6 * diam
    max_steps: int = 20_000
    block_size: int = 65_536
    threads: int = 1
    path_dt: float = 5e-3                # path-estimator base step
    acceptance_floor: float = 0.05


def substream(seed: int, index: int) -> np.random.Generator:
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(index)],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _require_stable(model: LevyModel) -> float:
    if model.family.kind != "stable":
        raise UnsupportedModelError(
            "Monte Carlo exit sampling needs the closed-form stable Poisson "
            "kernel; non-stable models are served by the quadrature routines")
    return float(model.family.alpha)


# ---------------------------------------------------------------------------
# exit law of a ball
# ---------------------------------------------------------------------------

def poisson_kernel_constant(alpha: float, dim: int) -> float:
    return gamma_fn(dim / 2.0) * math.sin(math.pi * alpha / 2.0) * math.pi ** (-dim / 2.0 - 1.0)


def poisson_kernel_ball(alpha: float, dim: int, r: float, x, z) -> np.ndarray:
    """Exit density of B(0, r) started at x, evaluated at exterior points z."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[None, :]
    nx = float(np.linalg.norm(x))
    nz = np.linalg.norm(z, axis=1)
    if nx >= r:
        raise ValueError("starting point must lie strictly inside the ball")
    if np.any(nz <= r):
        raise ValueError("stable exit lands outside the closed ball almost surely")
    C = poisson_kernel_constant(alpha, dim)
    ratio = (r**2 - nx**2) / (nz**2 - r**2)
    return C * ratio ** (alpha / 2.0) * np.linalg.norm(z - x, axis=1) ** (-dim)


def _uniform_directions(dim: int, rng: np.random.Generator, n: int) -> np.ndarray:
    if dim == 1:
        return (2.0 * (rng.random(n) < 0.5).astype(float) - 1.0)[:, None]
    v = rng.standard_normal((n, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _unit_center_exit(alpha: float, dim: int, rng: np.random.Generator,
                      n: int) -> np.ndarray:
    """Exact exit points of the unit ball started at its center:
    (1/|Z|)^2 ~ Beta(alpha/2, 1 - alpha/2), direction uniform."""
    v = rng.beta(alpha / 2.0, 1.0 - alpha / 2.0, size=n)
    radii = 1.0 / np.sqrt(v)
    return radii[:, None] * _uniform_directions(dim, rng, n)


def sample_exit_ball(alpha: float, dim: int, r: float, x,
                     rng: np.random.Generator, n: int = 1,
                     acceptance_floor: float = 0.05) -> np.ndarray:
    """Samples of X_{tau_B} for B = B(0, r) started at x (law = Poisson kernel).

    Center starts are exact; off-center starts use rejection from the
    centered law with weight (|z|/|x-z|)^d bounded by (r/(r-|x|))^d.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    nx = float(np.linalg.norm(x))
    if nx >= r:
        raise ValueError("starting point must lie strictly inside the ball")
    if nx <= 1e-14 * r:
        return r * _unit_center_exit(alpha, dim, rng, n)

    M = (r / (r - nx)) ** dim
    out = np.empty((n, dim))
    filled = 0
    proposed = accepted = 0
    while filled < n:
        m = max(2 * (n - filled), 256)
        z = r * _unit_center_exit(alpha, dim, rng, m)
        w = (np.linalg.norm(z, axis=1) / np.linalg.norm(z - x, axis=1)) ** dim
        keep = rng.random(m) * M < w
        proposed += m
        accepted += int(keep.sum())
        take = z[keep][: n - filled]
        out[filled:filled + len(take)] = take
        filled += len(take)
        if proposed >= 4096 and accepted < acceptance_floor * proposed:
            raise SamplingError(
                f"exit rejection acceptance {accepted / proposed:.3f} below "
                f"floor {acceptance_floor} (|x|/r = {nx / r:.3f})")
    return out


def exit_radius_cdf(alpha: float, dim: int, r: float, x_norm: float = 0.0):
    """Quadrature CDF of the squared inverse exit radius v = (r/|Z|)^2.

    Returns a vectorized callable on (0, 1).  Built directly from the
    Poisson kernel (independent of the Beta sampling route): the radial
    marginal is integrated over spheres, then accumulated in the compact
    variable v, whose density is singular but integrable at both ends.
    """
    if dim not in (1, 2, 3):
        raise NotImplementedError("exit radius CDF supports d <= 3")
    e1 = np.zeros(dim)
    e1[0] = x_norm

    if dim == 1:
        def radial_density(s):
            z = s[:, None]
            return (poisson_kernel_ball(alpha, dim, r, e1, z)
                    + poisson_kernel_ball(alpha, dim, r, e1, -z))
    else:
        gl_t, gl_w = _gl_rule(64)
        theta = (gl_t + 1.0) * (np.pi / 2.0)
        w_theta = gl_w * (np.pi / 2.0)
        if dim == 2:
            ang_weight = w_theta / np.pi          # (1/2pi) * 2 (symmetry)
        else:
            ang_weight = w_theta * np.sin(theta) / 2.0
        sphere = sphere_area(dim)

        def radial_density(s):
            dirs = np.stack([np.cos(theta)] + [np.zeros_like(theta)] * (dim - 2)
                            + [np.sin(theta)], axis=1)
            pts = s[:, None, None] * dirs[None, :, :]
            flat = pts.reshape(-1, dim)
            dens = poisson_kernel_ball(alpha, dim, r, e1, flat).reshape(len(s), -1)
            return sphere * s ** (dim - 1) * (dens @ ang_weight)

    # density of v on (0,1): |Z| = r v^{-1/2}, d|Z| = (r/2) v^{-3/2} dv
    def v_density(v):
        v = np.asarray(v, dtype=float)
        s = r / np.sqrt(v)
        return radial_density(s) * (r / 2.0) * v ** (-1.5)

    lo = np.exp(np.linspace(np.log(1e-9), np.log(0.5), 500))
    hi = 1.0 - np.exp(np.linspace(np.log(0.5), np.log(1e-11), 500))
    grid = np.unique(np.concatenate([lo, hi]))
    cells = panel_sums(v_density, grid, order=12)
    body = np.concatenate([[0.0], np.cumsum(cells)])
    # analytic power tails: density ~ A v^{alpha/2 - 1} near 0 (heavy exit
    # radii) and ~ B (1-v)^{-alpha/2} near 1 (exit just outside the sphere)
    p_lo = alpha / 2.0
    mass_low = cells[0] * grid[0] ** p_lo / (grid[1] ** p_lo - grid[0] ** p_lo)
    p_hi = 1.0 - alpha / 2.0
    u0, u1 = 1.0 - grid[-1], 1.0 - grid[-2]
    mass_high = cells[-1] * u0 ** p_hi / (u1 ** p_hi - u0 ** p_hi)
    total = mass_low + body[-1] + mass_high
    interp = PchipInterpolator(grid, (mass_low + body) / total)

    def cdf(v):
        v = np.asarray(v, dtype=float)
        out = np.empty_like(v)
        below = v <= grid[0]
        above = v >= grid[-1]
        mid = ~(below | above)
        out[below] = mass_low / total * (np.maximum(v[below], 0.0) / grid[0]) ** p_lo
        vtop = np.clip(1.0 - v[above], 0.0, None)
        out[above] = 1.0 - mass_high / total * (vtop / u0) ** p_hi
        out[mid] = np.clip(interp(v[mid]), 0.0, 1.0)
        return out

    cdf.normalization = float(total)   # should be 1: kernel is a probability
    return cdf


# ---------------------------------------------------------------------------
# exit times and ball occupation
# ---------------------------------------------------------------------------

def getoor_constant(alpha: float, dim: int) -> float:
    """E^0 tau_{B_1} for the isotropic alpha-stable process."""
    return gamma_fn(dim / 2.0) / (2.0**alpha * gamma_fn(1.0 + alpha / 2.0)
                                  * gamma_fn((dim + alpha) / 2.0))


def expected_exit_time_ball(alpha: float, dim: int, r: float, x) -> float:
    nx = float(np.linalg.norm(np.atleast_1d(np.asarray(x, dtype=float))))
    if nx >= r:
        return 0.0
    return getoor_constant(alpha, dim) * (r**2 - nx**2) ** (alpha / 2.0)


class BallOccupation:
    """Normalized occupation density of the unit ball seen from its center.

    eta(u) = G_B(0, u) / E^0 tau, with G_B from the Hunt formula; the exit
    expectation E^0 G(u - Z) is a deterministic Poisson-kernel quadrature.
    Radial inverse-CDF sampling; total mass is cross-checked against the
    closed-form exit time.
    """

    def __init__(self, alpha: float, dim: int):
        self.alpha, self.dim = alpha, dim
        prof = potential_profile(_stable_model(alpha, dim))
        G = prof.g

        # exit radius nodes: density ~ (s^2-1)^{-alpha/2}/s, singular at 1
        s_edges = 1.0 + np.exp(np.linspace(np.log(1e-10), np.log(1e6), 241))
        gl_x, gl_w = _gl_rule(8)
        a, hwidth = s_edges[:-1], np.diff(s_edges)
        s = (a[:, None] + (gl_x[None, :] + 1.0) * hwidth[:, None] / 2.0).ravel()
        ws = (np.tile(gl_w, (len(a), 1)) * hwidth[:, None] / 2.0).ravel()
        q = (s**2 - 1.0) ** (-alpha / 2.0) / s
        ws = ws * q / float(np.sum(ws * q))     # normalized radial exit law

        if dim == 1:
            def mean_exit_kernel(rho):
                d_out = np.abs(rho[:, None] - s[None, :])
                d_in = rho[:, None] + s[None, :]
                return 0.5 * (G(d_out) + G(d_in)) @ ws
        else:
            th_x, th_w = _gl_rule(48)
            theta = (th_x + 1.0) * (np.pi / 2.0)
            if dim == 2:
                wt = th_w * (np.pi / 2.0) / np.pi
            else:
                wt = th_w * (np.pi / 2.0) * np.sin(theta) / 2.0
            ct = np.cos(theta)

            def mean_exit_kernel(rho):
                out = np.empty(len(rho))
                for i, p in enumerate(rho):
                    dist = np.sqrt(p**2 + s[None, :]**2
                                   - 2.0 * p * s[None, :] * ct[:, None])
                    out[i] = wt @ (G(dist) @ ws)
                return out

        rho_edges = np.exp(np.linspace(np.log(1e-14), 0.0, 481))
        rho_edges[-1] = 1.0 - 1e-12
        gl4_x, gl4_w = _gl_rule(4)
        ra, rh = rho_edges[:-1], np.diff(rho_edges)
        rho_nodes = (ra[:, None] + (gl4_x[None, :] + 1.0) * rh[:, None] / 2.0).ravel()
        rho_w = (np.tile(gl4_w, (len(ra), 1)) * rh[:, None] / 2.0).ravel()

        g_ball = G(rho_nodes) - mean_exit_kernel(rho_nodes)
        weight = g_ball * rho_nodes ** (dim - 1)
        if np.any(weight < -1e-9 * np.max(np.abs(weight))):
            raise RuntimeError("ball Green profile came out negative")
        cell_mass = (weight * rho_w).reshape(len(ra), -1).sum(axis=1)
        mass = sphere_area(dim) * float(cell_mass.sum())
        expected = getoor_constant(alpha, dim)
        if abs(mass / expected - 1.0) > 5e-3:
            raise RuntimeError(
                f"occupation mass {mass:.6g} disagrees with the closed-form "
                f"exit time {expected:.6g}")
        cdf = np.concatenate([[0.0], np.cumsum(cell_mass)])
        self._cdf = cdf / cdf[-1]
        self._edges = rho_edges
        self.mass_check = mass / expected

    def sample_radii(self, rng: np.random.Generator, n: int) -> np.ndarray:
        u = rng.random(n)
        idx = np.searchsorted(self._cdf, u, side="right") - 1
        idx = np.clip(idx, 0, len(self._edges) - 2)
        lo, hi = self._edges[idx], self._edges[idx + 1]
        c0, c1 = self._cdf[idx], self._cdf[idx + 1]
        frac = np.where(c1 > c0, (u - c0) / np.maximum(c1 - c0, 1e-300), 0.5)
        return lo + frac * (hi - lo)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        radii = self.sample_radii(rng, n)
        return radii[:, None] * _uniform_directions(self.dim, rng, n)


@lru_cache(maxsize=64)
def _stable_model(alpha: float, dim: int) -> LevyModel:
    from .levy_models import make_stable
    return make_stable(alpha, dim)


@lru_cache(maxsize=32)
def ball_occupation(alpha: float, dim: int) -> BallOccupation:
    return BallOccupation(alpha, dim)


# ---------------------------------------------------------------------------
# walk-on-spheres sweeps
# ---------------------------------------------------------------------------

def _wos_block(alpha, dom, x0, n, rng, eps, max_steps, g_fn, f_fn, occ, c_tau):
    d = dom.dim
    pos = np.tile(np.asarray(x0, dtype=float), (n, 1))
    g_vals = np.zeros(n)
    green = np.zeros(n)
    active = np.ones(n, dtype=bool)
    for _ in range(max_steps):
        idx = np.nonzero(active)[0]
        if len(idx) == 0:
            break
        rad = dom.inscribed_radius(pos[idx])
        band = rad < eps
        if np.any(band):
            b_idx = idx[band]
            landing = dom.nearest_exterior(pos[b_idx])
            if g_fn is not None:
                g_vals[b_idx] = g_fn(landing)
            active[b_idx] = False
            idx = idx[~band]
            rad = rad[~band]
            if len(idx) == 0:
                continue
        P = pos[idx]
        if f_fn is not None:
            u = occ.sample(rng, len(idx))
            green[idx] += c_tau * rad**alpha * f_fn(P + rad[:, None] * u)
        z = P + rad[:, None] * _unit_center_exit(alpha, d, rng, len(idx))
        pos[idx] = z
        exited = ~dom.contains(z)
        if np.any(exited):
            e_idx = idx[exited]
            if g_fn is not None:
                g_vals[e_idx] = g_fn(z[exited])
            active[e_idx] = False
    if np.any(active):
        raise WalkCapError(int(active.sum()), max_steps)
    return g_vals, green


def _blocked_mc(total: int, cfg: WalkConfig, run_block: Callable) -> tuple:
    """Deterministic pairwise-by-index reduction over walk blocks.

    ``run_block(block_index, n)`` returns an (n,) array of per-walk values;
    blocks use independent Philox substreams so any execution order yields
    the same merged estimate.
    """
    n_blocks = (total + cfg.block_size - 1) // cfg.block_size
    sizes = [min(cfg.block_size, total - b * cfg.block_size) for b in range(n_blocks)]

    def stats(b):
        vals = run_block(b, sizes[b])
        return float(vals.sum()), float((vals**2).sum()), len(vals)

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as ex:
            parts = list(ex.map(stats, range(n_blocks)))
    else:
        parts = [stats(b) for b in range(n_blocks)]
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    n = sum(p[2] for p in parts)
    mean = s1 / n
    var = max(s2 / n - mean**2, 0.0) * (n / max(n - 1, 1))
    return mean, math.sqrt(var / n), n


def _band(dom, cfg: WalkConfig) -> float:
    return cfg.eps_wos if cfg.eps_wos is not None else 1e-6 * dom.diameter


def estimate_harmonic_measure(model: LevyModel, dom, g, x,
                              cfg: WalkConfig = WalkConfig()) -> McEstimate:
    """P_D[g](x) by walk-on-spheres with exact per-ball exits."""
    alpha = _require_stable(model)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not dom.contains(x[None, :])[0]:
        raise ValueError("harmonic measure requires an interior starting point")
    eps = _band(dom, cfg)

    def run_block(b, n):
        rng = substream(cfg.seed, b)
        g_vals, _ = _wos_block(alpha, dom, x, n, rng, eps, cfg.max_steps,
                               g, None, None, 0.0)
        return g_vals

    mean, se, n = _blocked_mc(cfg.n_samples, cfg, run_block)
    return McEstimate(mean, se, n, cfg.seed)


def estimate_green_operator(model: LevyModel, dom, f, x,
                            cfg: WalkConfig = WalkConfig(),
                            method: str = "wos") -> McEstimate:
    """G_D[f](x); ``method`` picks the walk-on-spheres accumulation ("wos")
    or the exact-increment path estimator ("path")."""
    alpha = _require_stable(model)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not dom.contains(x[None, :])[0]:
        raise ValueError("Green operator requires an interior starting point")
    if method == "path":
        return estimate_green_path(model, dom, f, x, cfg)
    if method != "wos":
        raise ValueError(f"unknown Green estimator {method!r}")
    eps = _band(dom, cfg)
    occ = ball_occupation(alpha, dom.dim)
    c_tau = getoor_constant(alpha, dom.dim)

    def run_block(b, n):
        rng = substream(cfg.seed, b)
        _, green = _wos_block(alpha, dom, x, n, rng, eps, cfg.max_steps,
                              None, f, occ, c_tau)
        return green

    mean, se, n = _blocked_mc(cfg.n_samples, cfg, run_block)
    return McEstimate(mean, se, n, cfg.seed)


def solve_dirichlet(model: LevyModel, dom, f, g, x,
                    cfg: WalkConfig = WalkConfig()) -> McEstimate:
    """u(x) = -G_D[f](x) + P_D[g](x) with combined standard error."""
    green = estimate_green_operator(model, dom, f, x, cfg)
    harm = estimate_harmonic_measure(model, dom, g, x,
                                     replace(cfg, seed=cfg.seed + 0x9E3779B9))
    return McEstimate(-green.value + harm.value,
                      math.hypot(green.std_error, harm.std_error),
                      cfg.n_samples, cfg.seed)


def mean_value_residual(model: LevyModel, u, x, rho: float,
                        cfg: WalkConfig = WalkConfig()) -> McEstimate:
    """u(x) - P_{B(x, rho)}[u](x); zero in expectation iff u is harmonic there."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    ball = Ball(center=tuple(x), radius=rho)
    est = estimate_harmonic_measure(model, ball, u, x, cfg)
    u_x = float(np.asarray(u(x[None, :]))[0])
    return McEstimate(u_x - est.value, est.std_error, est.n_samples, cfg.seed)


def green_function_ball(model: LevyModel, r: float, x, y,
                        cfg: WalkConfig = WalkConfig()) -> McEstimate:
    """G_B(x, y) for B = B(0, r) via the Hunt formula
    G(y - x) - E^x G(y - Z), the expectation by exit sampling.

    In compensated cases the kernel profile W is used directly; the
    compensation constant cancels between the two Hunt terms, so any
    admissible compensation point gives the same value.
    """
    alpha = _require_stable(model)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.allclose(x, y):
        raise ValueError("ball Green function is singular on the diagonal")
    prof = potential_profile(model)
    n = min(cfg.n_samples, 200_000)
    rng = substream(cfg.seed, 0)
    z = sample_exit_ball(alpha, model.dim, r, x, rng, n,
                         acceptance_floor=cfg.acceptance_floor)
    vals = np.asarray(prof.g(np.linalg.norm(y[None, :] - z, axis=1)), dtype=float)
    direct = float(prof.g(np.array([np.linalg.norm(y - x)]))[0])
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(n))
    return McEstimate(direct - mean, se, n, cfg.seed)


# ---------------------------------------------------------------------------
# exact stable increments and the path estimator
# ---------------------------------------------------------------------------

def sample_one_sided_stable(beta: float, rng: np.random.Generator,
                            n: int) -> np.ndarray:
    """Standard positive beta-stable variables, E exp(-lam S) = exp(-lam^beta)
    (Kanter's representation)."""
    if not 0.0 < beta < 1.0:
        raise ValueError("one-sided stable index must be in (0,1)")
    u = rng.random(n) * np.pi
    w = rng.standard_exponential(n)
    a = (np.sin(beta * u) ** beta * np.sin((1.0 - beta) * u) ** (1.0 - beta)
         / np.sin(u)) ** (1.0 / (1.0 - beta))
    return (a / w) ** ((1.0 - beta) / beta)


def stable_increments(alpha: float, dim: int, dt: float,
                      rng: np.random.Generator, n: int) -> np.ndarray:
    """Increments of the isotropic alpha-stable process over time dt,
    via Gaussian subordination: X = sqrt(2 S) N(0, I_d) with S the
    (alpha/2)-stable subordinator increment."""
    s = dt ** (2.0 / alpha) * sample_one_sided_stable(alpha / 2.0, rng, n)
    return np.sqrt(2.0 * s)[:, None] * rng.standard_normal((n, dim))


def _path_block(alpha, dom, x0, n, rng, dt, f_fn, max_steps):
    d = dom.dim
    pos = np.tile(np.asarray(x0, dtype=float), (n, 1))
    acc = np.zeros(n)
    active = np.ones(n, dtype=bool)
    for _ in range(max_steps):
        idx = np.nonzero(active)[0]
        if len(idx) == 0:
            break
        if f_fn is None:
            acc[idx] += dt
        else:
            acc[idx] += dt * f_fn(pos[idx])
        pos[idx] += stable_increments(alpha, d, dt, rng, len(idx))
        exited = ~dom.contains(pos[idx])
        active[idx[exited]] = False
    if np.any(active):
        raise WalkCapError(int(active.sum()), max_steps)
    return acc


def estimate_green_path(model: LevyModel, dom, f, x, cfg: WalkConfig,
                        dt: Optional[float] = None,
                        bias_probe: bool = True) -> McEstimate:
    """E^x int_0^tau f(X_t) dt on an exact-increment time grid.

    Discretization bias is assessed by halving the step; the reported
    standard error folds the measured bias in (conservative: the probe
    difference includes Monte Carlo noise).
    """
    alpha = _require_stable(model)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    base_dt = dt if dt is not None else cfg.path_dt * dom.diameter ** alpha
    cap = max(cfg.max_steps, 200_000)
    f_fn = None if f is None else f

    def run(step_dt, n_total, seed_shift):
        def run_block(b, n):
            rng = substream(cfg.seed + seed_shift, b)
            return _path_block(alpha, dom, x, n, rng, step_dt, f_fn, cap)
        return _blocked_mc(n_total, cfg, run_block)

    mean, se, n = run(base_dt / 2.0, cfg.n_samples, 0)
    if not bias_probe:
        return McEstimate(mean, se, n, cfg.seed)
    coarse_mean, coarse_se, _ = run(base_dt, max(cfg.n_samples // 2, 1024), 0x51ED270B)
    bias = abs(mean - coarse_mean)
    return McEstimate(mean, math.hypot(se, bias), n, cfg.seed)

