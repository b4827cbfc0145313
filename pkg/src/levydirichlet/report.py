"""CSV emission and matplotlib figure rendering for CLI reports.

Every report-producing subcommand writes its delimited table and a PNG
figure next to the JSON report.  Figures use the Agg backend (no display).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _finish(fig, path: Path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def kernel_figure(path: Path, r, g, g1, g2, s) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.loglog(r, np.abs(g), label="|G|")
    ax.loglog(r, np.abs(g1), label="|G'|", ls="--")
    ax.loglog(r, np.abs(g2), label="|G''|", ls=":")
    ax.loglog(r, np.abs(s), label="S", lw=2.2, alpha=0.6)
    ax.set_xlabel("r")
    ax.set_ylabel("kernel profile")
    ax.legend(frameon=False)
    ax.set_title("free kernel and majorant")
    _finish(fig, path)


def probe_figure(path: Path, h, values, fit: dict | None, title: str) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    x = np.log(1.0 / np.asarray(h))
    ax.plot(x, values, "o-", ms=4, label="D(h)")
    if fit and fit.get("slope") is not None:
        slope = fit["slope"]
        c = np.mean(values) - slope * np.mean(x)
        ax.plot(x, slope * x + c, "--", lw=1,
                label=f"fit: slope {slope:.3g}, R2 {fit.get('r_squared', 0):.4f}")
    ax.set_xlabel("ln(1/h)")
    ax.set_ylabel("difference quotient")
    ax.legend(frameon=False)
    ax.set_title(title)
    _finish(fig, path)


def dini_figure(path: Path, t, integrand, verdict: str) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    pos = np.asarray(integrand) > 0
    ax.loglog(np.asarray(t)[pos], np.asarray(integrand)[pos], "o-", ms=3)
    ax.set_xlabel("t")
    ax.set_ylabel("S_eff(t) * omega(t)")
    ax.set_title(f"Dini integrand (verdict: {verdict})")
    _finish(fig, path)


def exit_cdf_figure(path: Path, v_grid, cdf_quad, cdf_emp, ks_stat: float) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.plot(v_grid, cdf_quad, label="quadrature CDF")
    ax.plot(v_grid, cdf_emp, "--", label="empirical CDF")
    ax.set_xlabel("(r/|Z|)^2")
    ax.set_ylabel("CDF")
    ax.legend(frameon=False)
    ax.set_title(f"exit radial law (KS statistic {ks_stat:.2e})")
    _finish(fig, path)


def solve_figure(path: Path, points, values, errors) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    idx = np.arange(len(values))
    ax.errorbar(idx, values, yerr=3.0 * np.asarray(errors), fmt="o", capsize=3)
    labels = [np.array2string(np.asarray(p), precision=3) for p in points]
    ax.set_xticks(idx)
    ax.set_xticklabels(labels, rotation=30, fontsize=8)
    ax.set_ylabel("u(x)  (3 sigma bars)")
    ax.set_title("Dirichlet solution estimates")
    _finish(fig, path)
