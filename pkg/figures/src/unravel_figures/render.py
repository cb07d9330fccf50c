"""Renderers for the simulator's standard figure families.

Every function draws exactly what its input CSVs contain (no fits, no
averaging here) and writes both PNG and SVG next to each other.  Scales
follow the conventions of the source plots: time traces and size scans are
semilog-x, correlation profiles are log-log.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "unravel-figures"
import matplotlib.pyplot as plt

from .io import EmptyInputError, Table, read_table

__all__ = [
    "entropy_vs_time",
    "entropy_vs_field",
    "entropy_vs_size",
    "lambda_vs_field",
    "unraveling_comparison",
    "nonhermitian_panels",
    "correlation_decay",
    "phase_diagram",
    "FIGURES",
]

_COLORS = plt.cm.viridis(np.linspace(0.0, 0.85, 8))


def _save(fig, out_base) -> list[Path]:
    out_base = Path(out_base)
    out_base.parent.mkdir(parents=True, exist_ok=True)
    paths = []
    for ext in ("png", "svg"):
        path = out_base.with_suffix(f".{ext}")
        fig.savefig(path, dpi=160, metadata={"Date": None} if ext == "svg" else None)
        paths.append(path)
    plt.close(fig)
    return paths


def _label_from_meta(table: Table) -> str:
    bits = []
    for key in ("unraveling", "gamma", "hf", "L"):
        if key in table.meta:
            bits.append(f"{key}={table.meta[key]}")
    return ", ".join(bits) if bits else table.path.stem


def _entropy_rows(table: Table):
    rows = [r for r in table.rows if r["quantity"] == "entropy"]
    if not rows:
        raise EmptyInputError(f"no entropy rows in {table.path}")
    return rows


def entropy_vs_time(timeseries_paths, out_base, t_star: float | None = None) -> list[Path]:
    """Ensemble-averaged entropy vs time, one curve per input file (semilog-x)."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for i, path in enumerate(timeseries_paths):
        table = read_table(path).require("t", "s_mean", "s_err")
        t = np.array(table.floats("t"))
        s = np.array(table.floats("s_mean"))
        e = np.array(table.floats("s_err"))
        positive = t > 0
        color = _COLORS[i % len(_COLORS)]
        ax.plot(t[positive], s[positive], color=color, label=_label_from_meta(table))
        ax.fill_between(
            t[positive], (s - e)[positive], (s + e)[positive], color=color, alpha=0.25, lw=0
        )
        if t_star is None and "t_star" in table.meta:
            t_star = float(table.meta["t_star"])
    if t_star:
        ax.axvline(t_star, color="red", lw=1.2)
    ax.set_xscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel(r"$S_\ell(t)$")
    ax.legend(fontsize=8)
    return _save(fig, out_base)


def entropy_vs_field(asymptotic_path, out_base) -> list[Path]:
    """Time-averaged entropy vs field, one panel per rate, colors by size."""
    table = read_table(asymptotic_path).require("gamma", "hf", "L", "quantity", "value", "error")
    rows = _entropy_rows(table)
    gammas = sorted({float(r["gamma"]) for r in rows})
    sizes = sorted({int(r["L"]) for r in rows})
    fig, axes = plt.subplots(1, len(gammas), figsize=(3.6 * len(gammas), 3.4), squeeze=False)
    for ax, gamma in zip(axes[0], gammas):
        for i, L in enumerate(sizes):
            pts = sorted(
                (float(r["hf"]), float(r["value"]), float(r["error"]))
                for r in rows
                if float(r["gamma"]) == gamma and int(r["L"]) == L
            )
            if not pts:
                continue
            hf, v, e = map(np.array, zip(*pts))
            ax.errorbar(hf, v, yerr=e, marker="o", ms=4, color=_COLORS[i % len(_COLORS)], label=f"L={L}")
        ax.set_title(rf"$\gamma = {gamma:g}$")
        ax.set_xlabel(r"$h_f$")
    axes[0][0].set_ylabel(r"$\bar S_\ell$")
    axes[0][0].legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, out_base)


def entropy_vs_size(asymptotic_path, out_base, fits_path=None) -> list[Path]:
    """Time-averaged entropy vs size (semilog-x) with optional fit overlays."""
    table = read_table(asymptotic_path).require("gamma", "hf", "L", "quantity", "value", "error")
    rows = _entropy_rows(table)
    fits = None
    if fits_path is not None:
        fits = read_table(fits_path).require("gamma", "hf", "lambda", "amplitude", "converged")
    combos = sorted({(float(r["gamma"]), float(r["hf"])) for r in rows})
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for i, (gamma, hf) in enumerate(combos):
        pts = sorted(
            (int(r["L"]), float(r["value"]), float(r["error"]))
            for r in rows
            if float(r["gamma"]) == gamma and float(r["hf"]) == hf
        )
        L, v, e = map(np.array, zip(*pts))
        color = _COLORS[i % len(_COLORS)]
        ax.errorbar(L, v, yerr=e, marker="o", ms=5, ls="none", color=color,
                    label=rf"$\gamma={gamma:g}, h_f={hf:g}$")
        if fits is not None:
            for r in fits.rows:
                if float(r["gamma"]) == gamma and float(r["hf"]) == hf and r["converged"] == "1":
                    grid = np.geomspace(L.min(), L.max(), 64)
                    curve = float(r["amplitude"]) * np.tanh(float(r["lambda"]) * np.log(grid))
                    ax.plot(grid, curve, ls="--", color=color, lw=1.0)
    ax.set_xscale("log")
    ax.set_xlabel("L")
    ax.set_ylabel(r"$\bar S_\ell$")
    ax.legend(fontsize=8)
    return _save(fig, out_base)


def lambda_vs_field(fits_path, out_base) -> list[Path]:
    """Fitted saturation scale vs field with the 1/ln(L_max) guide line."""
    table = read_table(fits_path).require("gamma", "hf", "L_max", "lambda", "lambda_err")
    gammas = sorted({float(r["gamma"]) for r in table.rows})
    L_max = int(table.rows[0]["L_max"])
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for i, gamma in enumerate(gammas):
        pts = sorted(
            (float(r["hf"]), float(r["lambda"]), float(r["lambda_err"]))
            for r in table.rows
            if float(r["gamma"]) == gamma
        )
        hf, lam, err = map(np.array, zip(*pts))
        err = np.where(np.isfinite(err), err, 0.0)
        ax.errorbar(hf, lam, yerr=err, marker="s", ms=4, color=_COLORS[i % len(_COLORS)],
                    label=rf"$\gamma={gamma:g}$")
    ax.axhline(1.0 / np.log(L_max), color="red", lw=1.2, label=r"$1/\ln L_\mathrm{max}$")
    ax.set_xlabel(r"$h_f$")
    ax.set_ylabel(r"$\lambda$")
    ax.legend(fontsize=8)
    return _save(fig, out_base)


def unraveling_comparison(asymptotic_path, out_base) -> list[Path]:
    """Size scans of both unravelings: filled clicks vs empty diffusive markers."""
    table = read_table(asymptotic_path).require(
        "unraveling", "gamma", "hf", "L", "quantity", "value", "error"
    )
    rows = _entropy_rows(table)
    combos = sorted({(float(r["gamma"]), float(r["hf"])) for r in rows})
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for i, (gamma, hf) in enumerate(combos):
        color = _COLORS[i % len(_COLORS)]
        for unr, filled in (("qj", True), ("qsd", False)):
            pts = sorted(
                (int(r["L"]), float(r["value"]), float(r["error"]))
                for r in rows
                if r["unraveling"] == unr and float(r["gamma"]) == gamma and float(r["hf"]) == hf
            )
            if not pts:
                continue
            L, v, e = map(np.array, zip(*pts))
            style = dict(marker="o", ms=6, color=color, ls="--" if not filled else "-")
            if not filled:
                style["markerfacecolor"] = "none"
            ax.errorbar(L, v, yerr=e, label=f"{unr}, $\\gamma={gamma:g}, h_f={hf:g}$", **style)
    ax.set_xscale("log")
    ax.set_xlabel("L")
    ax.set_ylabel(r"$\bar S_\ell$")
    ax.legend(fontsize=8)
    return _save(fig, out_base)


def nonhermitian_panels(timeseries_paths, asymptotic_path, out_base) -> list[Path]:
    """No-click time traces per field plus the asymptotic value panel."""
    n = len(timeseries_paths)
    fig, axes = plt.subplots(1, n + 1, figsize=(3.2 * (n + 1), 3.2), squeeze=False)
    for ax, path in zip(axes[0], timeseries_paths):
        table = read_table(path).require("t", "s_mean")
        t = np.array(table.floats("t"))
        s = np.array(table.floats("s_mean"))
        ax.plot(t[t > 0], s[t > 0], color=_COLORS[0])
        if "t_star" in table.meta:
            ax.axvline(float(table.meta["t_star"]), color="red", lw=1.2)
        ax.set_xscale("log")
        ax.set_xlabel("t")
        ax.set_title(_label_from_meta(table), fontsize=8)
    table = read_table(asymptotic_path).require("hf", "L", "quantity", "value")
    rows = _entropy_rows(table)
    ax = axes[0][-1]
    for i, hf in enumerate(sorted({float(r["hf"]) for r in rows})):
        pts = sorted((int(r["L"]), float(r["value"])) for r in rows if float(r["hf"]) == hf)
        L, v = map(np.array, zip(*pts))
        ax.plot(L, v, marker="o", ms=5, color=_COLORS[i % len(_COLORS)], label=rf"$h_f={hf:g}$")
    ax.set_xscale("log")
    ax.set_xlabel("L")
    ax.set_ylabel(r"$\bar S_\ell$")
    ax.legend(fontsize=8)
    axes[0][0].set_ylabel(r"$S_\ell(t)$")
    fig.tight_layout()
    return _save(fig, out_base)


def correlation_decay(correlation_paths, out_base) -> list[Path]:
    """Distance-resolved squared correlations on a log-log scale."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for i, path in enumerate(correlation_paths):
        table = read_table(path).require("r", "value", "error")
        r = np.array(table.floats("r"))
        v = np.array(table.floats("value"))
        e = np.array(table.floats("error"))
        keep = (r > 0) & (v > 0)
        ax.errorbar(r[keep], v[keep], yerr=e[keep], marker="o", ms=4,
                    color=_COLORS[i % len(_COLORS)], label=_label_from_meta(table))
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("r")
    ax.set_ylabel("C(r)")
    ax.legend(fontsize=8)
    return _save(fig, out_base)


def phase_diagram(phase_path, out_base) -> list[Path]:
    """Crossover-field estimates in the (field, rate) plane."""
    table = read_table(phase_path).require("gamma", "hf_c", "error", "L_max", "verdict")
    pts = []
    for r in table.rows:
        if r["hf_c"]:
            pts.append((float(r["hf_c"]), float(r["gamma"]), float(r["error"] or 0.0)))
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    if pts:
        hf, gamma, err = map(np.array, zip(*sorted(pts, key=lambda p: p[1])))
        ax.errorbar(hf, gamma, xerr=err, marker="o", ms=6, color="black", ls="--", lw=1.0)
        ax.fill_betweenx(gamma, 0.0, hf, alpha=0.15, color="tab:orange", label="subextensive")
        ax.fill_betweenx(gamma, hf, hf.max() * 1.3 + 1.0, alpha=0.15, color="tab:blue", label="area law")
        ax.legend(fontsize=8)
    else:
        verdicts = ", ".join(f"gamma={r['gamma']}: {r['verdict']}" for r in table.rows)
        ax.text(0.5, 0.5, f"no crossover in range\n{verdicts}", ha="center", va="center",
                transform=ax.transAxes, fontsize=8)
    ax.set_xlabel(r"$h_f$")
    ax.set_ylabel(r"$\gamma$")
    ax.set_title(f"L_max = {table.rows[0]['L_max']}", fontsize=9)
    return _save(fig, out_base)


FIGURES = {
    "entropy-vs-time": entropy_vs_time,
    "entropy-vs-field": entropy_vs_field,
    "entropy-vs-size": entropy_vs_size,
    "lambda-vs-field": lambda_vs_field,
    "unraveling-comparison": unraveling_comparison,
    "nonhermitian-panels": nonhermitian_panels,
    "correlation-decay": correlation_decay,
    "phase-diagram": phase_diagram,
}
