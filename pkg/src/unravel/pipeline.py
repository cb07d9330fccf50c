"""Batch orchestration: single ensembles, parameter sweeps, resumability.

A *cell* is one ``(unraveling, gamma, h_f, L)`` ensemble.  Cells write their
own delimited outputs; a sweep enumerates cells in a fixed order (gamma
major, then field, then size), skips cells whose outputs already exist, and
aggregates time-averaged entropies into scaling fits and the phase-diagram
estimate.  Everything downstream of the configuration is deterministic, so
reruns and resumed runs produce byte-identical files.
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

from .analysis import (
    AsymptoticEstimate,
    asymptotic_correlation,
    crossover_field,
    ensemble_average,
    fit_tanh_log,
    gamma_monotonicity_warnings,
    single_trajectory_stats,
    stationarity_check,
    time_average,
)
from .entanglement import SubsystemSpec
from .errors import ConfigurationError
from .ising import IsingParams
from .runio import Manifest, read_csv, write_csv
from .trajectories import TrajectoryConfig, Unraveling, run_ensemble

__all__ = [
    "default_t_star",
    "resolve_workers",
    "simulate",
    "sweep",
    "cell_name",
]

DEFAULT_T_STAR = {Unraveling.QSD: 60.0, Unraveling.QUANTUM_JUMP: 60.0, Unraveling.NON_HERMITIAN: 160.0}

TIMESERIES_COLUMNS = ["t", "s_mean", "s_err", "h2_mean", "h2_err", "n_mean", "n_err"]
ASYMPTOTIC_COLUMNS = ["unraveling", "gamma", "hf", "L", "ell", "quantity", "value", "error"]
CORRELATION_COLUMNS = ["unraveling", "gamma", "hf", "L", "r", "value", "error"]
FIT_COLUMNS = ["gamma", "hf", "L_max", "lambda", "lambda_err", "amplitude", "residual", "converged"]
PHASE_COLUMNS = ["gamma", "hf_c", "error", "L_max", "verdict"]


def default_t_star(unraveling: Unraveling, t_max: float) -> float:
    """Transient cutoff: 60 for stochastic runs, 160 for no-click.

    Short runs (t_max at or below the default) fall back to half the
    horizon so that an averaging window always exists.
    """
    base = DEFAULT_T_STAR[Unraveling(unraveling)]
    return base if t_max > base else t_max / 2.0


def resolve_workers(requested: int | None) -> int:
    """Worker count: explicit flag, else UNRAVEL_THREADS, else 1."""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("UNRAVEL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigurationError(f"UNRAVEL_THREADS must be an integer, got {env!r}") from exc
    return 1


def _normalized_config(raw: dict) -> dict:
    """Canonical configuration (resolved defaults) used for the manifest hash."""
    return {k: raw[k] for k in sorted(raw)}


def cell_name(unraveling: str, gamma: float, hf: float, L: int) -> str:
    return f"{unraveling}_g{gamma:g}_h{hf:g}_L{L}"


def _run_cell(config: dict, cell_id: int, workers: int):
    """Run one ensemble cell and reduce it to stats plus window averages."""
    unr = Unraveling(config["unraveling"])
    params = IsingParams(L=config["L"], h=config["hf"], J=config["J"])
    cfg = TrajectoryConfig(
        unraveling=unr,
        gamma=config["gamma"],
        alpha=config.get("alpha"),
        dt=config.get("dt"),
        t_max=config["t_max"],
        seed=config["seed"],
        record_every=config.get("record_every"),
    ).resolved(params.L)
    subsys = SubsystemSpec(length=config["ell"])
    n_traj = 1 if unr is Unraveling.NON_HERMITIAN else config["n_traj"]
    series = run_ensemble(
        cfg,
        params,
        n_traj,
        subsys,
        cell_id=cell_id,
        record_corr=config.get("record_corr", False),
        workers=workers,
    )
    stats = ensemble_average(series) if n_traj > 1 else single_trajectory_stats(series[0])
    return cfg, stats


def _write_cell_outputs(out: Path, config: dict, cfg, stats, manifest_hash: str):
    t_star = config["t_star"]
    T = config["t_max"]
    meta = {
        "format": "unravel timeseries v1",
        "manifest_hash": manifest_hash,
        "unraveling": config["unraveling"],
        "gamma": config["gamma"],
        "hf": config["hf"],
        "L": config["L"],
        "ell": config["ell"],
        "n_rand": stats.n_rand,
        "dt": cfg.dt,
        "record_every": cfg.record_every,
        "t_star": t_star,
        "seed": config["seed"],
    }
    rows = zip(
        stats.times,
        stats.entropy_mean,
        stats.entropy_err,
        stats.renyi2_mean,
        stats.renyi2_err,
        stats.nbar_mean,
        stats.nbar_err,
    )
    write_csv(out / "timeseries.csv", meta, TIMESERIES_COLUMNS, rows)

    estimates = {}
    asym_rows = []
    for quantity in ("entropy", "renyi2"):
        est = time_average(stats, t_star, T, quantity)
        estimates[quantity] = est
        asym_rows.append(
            (
                config["unraveling"],
                config["gamma"],
                config["hf"],
                config["L"],
                config["ell"],
                quantity,
                est.value,
                est.error,
            )
        )
    warn = stationarity_check(stats, t_star, T)
    if warn:
        print(f"warning [{out.name}]: {warn}", file=sys.stderr)

    if stats.corr_mean is not None:
        r, profile, err = asymptotic_correlation(stats, t_star, T)
        corr_meta = dict(meta, format="unravel correlations v1")
        corr_rows = [
            (config["unraveling"], config["gamma"], config["hf"], config["L"], int(rr), vv, ee)
            for rr, vv, ee in zip(r, profile, err)
        ]
        write_csv(out / "correlations.csv", corr_meta, CORRELATION_COLUMNS, corr_rows)

    asym_meta = dict(meta, format="unravel asymptotic v1", T=T)
    write_csv(out / "asymptotic.csv", asym_meta, ASYMPTOTIC_COLUMNS, asym_rows)
    return estimates, asym_rows


def simulate(config: dict, out_dir, workers: int = 1) -> Path:
    """One ensemble cell: timeseries.csv, asymptotic.csv, manifest.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config = dict(config)
    config.setdefault("J", 1.0)
    config.setdefault("ell", max(1, config["L"] // 4))
    unr = Unraveling(config["unraveling"])
    if config.get("t_star") is None:
        config["t_star"] = default_t_star(unr, config["t_max"])
    if not config["t_star"] < config["t_max"]:
        raise ConfigurationError(
            f"t_star ({config['t_star']}) must lie below t_max ({config['t_max']})"
        )
    cfg, stats = _run_cell(config, cell_id=0, workers=workers)
    config["dt"] = cfg.dt
    config["record_every"] = cfg.record_every
    if unr is Unraveling.NON_HERMITIAN:
        config["n_traj"] = 1
    manifest = Manifest(_normalized_config(config))
    _write_cell_outputs(out, config, cfg, stats, manifest.hash)
    manifest.cells[cell_name(config["unraveling"], config["gamma"], config["hf"], config["L"])] = "done"
    manifest.finish()
    manifest.save(out / "manifest.json")
    return out


_SWEEP_REQUIRED = ("unraveling", "gammas", "hfs", "sizes", "n_traj", "t_max", "seed")


def sweep(config: dict, out_dir, workers: int = 1, resume: bool = True) -> Path:
    """Grid of cells plus scaling fits and the phase-diagram estimate.

    Completed cells (an existing ``asymptotic.csv``) are reused when
    ``resume`` is set, so interrupted sweeps pick up where they stopped.
    """
    for key in _SWEEP_REQUIRED:
        if key not in config:
            raise ConfigurationError(f"sweep config is missing required key {key!r}")
    out = Path(out_dir)
    (out / "cells").mkdir(parents=True, exist_ok=True)
    config = dict(config)
    config.setdefault("J", 1.0)
    unr = Unraveling(config["unraveling"])
    if config.get("t_star") is None:
        config["t_star"] = default_t_star(unr, config["t_max"])
    manifest = Manifest(_normalized_config(config))

    cells = [
        (gamma, hf, L)
        for gamma in config["gammas"]
        for hf in config["hfs"]
        for L in config["sizes"]
    ]
    all_rows = []
    estimates: dict[tuple, dict] = {}
    for cell_id, (gamma, hf, L) in enumerate(cells):
        name = cell_name(config["unraveling"], gamma, hf, L)
        cell_dir = out / "cells" / name
        cell_dir.mkdir(parents=True, exist_ok=True)
        marker = cell_dir / "asymptotic.csv"
        reusable = False
        if resume and marker.exists():
            meta, rows = read_csv(marker)
            # refuse cells written under a different sweep configuration
            reusable = meta.get("manifest_hash") == manifest.hash
        if reusable:
            cell_rows = [
                (
                    r["unraveling"],
                    float(r["gamma"]),
                    float(r["hf"]),
                    int(r["L"]),
                    int(r["ell"]),
                    r["quantity"],
                    float(r["value"]),
                    float(r["error"]),
                )
                for r in rows
            ]
            manifest.cells[name] = "reused"
        else:
            cell_config = dict(
                config,
                gamma=gamma,
                hf=hf,
                L=L,
                ell=config.get("ell") or max(1, L // 4),
            )
            cfg, stats = _run_cell(cell_config, cell_id=cell_id, workers=workers)
            _, cell_rows = _write_cell_outputs(cell_dir, cell_config, cfg, stats, manifest.hash)
            manifest.cells[name] = "done"
        manifest.save(out / "manifest.json")
        all_rows.extend(cell_rows)
        for row in cell_rows:
            estimates[(row[1], row[2], row[3], row[5])] = {"value": row[6], "error": row[7]}

    sweep_meta = {"format": "unravel asymptotic v1", "manifest_hash": manifest.hash}
    write_csv(out / "sweep_asymptotic.csv", sweep_meta, ASYMPTOTIC_COLUMNS, all_rows)

    sizes = sorted(config["sizes"])
    L_max = max(sizes)
    fit_rows = []
    fits_by_gamma: dict[float, dict[float, object]] = {}
    if len(sizes) >= 3:
        for gamma in config["gammas"]:
            for hf in config["hfs"]:
                points = [
                    (L, estimates[(gamma, hf, L, "entropy")]["value"], estimates[(gamma, hf, L, "entropy")]["error"])
                    for L in sizes
                ]
                fit = fit_tanh_log(points)
                fits_by_gamma.setdefault(gamma, {})[hf] = fit
                fit_rows.append(
                    (gamma, hf, fit.L_max, fit.lam, fit.lam_err, fit.amplitude, fit.residual, int(fit.converged))
                )
        write_csv(out / "tanh_fits.csv", dict(sweep_meta, format="unravel tanh fits v1"), FIT_COLUMNS, fit_rows)

        phase_rows = []
        for gamma in config["gammas"]:
            est = crossover_field(fits_by_gamma[gamma], L_max)
            phase_rows.append(
                (
                    gamma,
                    est.hf_c if est.hf_c is not None else "",
                    est.error if est.error is not None else "",
                    est.L_max,
                    est.verdict,
                )
            )
        write_csv(out / "phase_diagram.csv", dict(sweep_meta, format="unravel phase diagram v1"), PHASE_COLUMNS, phase_rows)
    else:
        print("note: fewer than 3 sizes in sweep; skipping scaling fits", file=sys.stderr)

    for hf in config["hfs"]:
        for L in sizes:
            by_gamma = {
                gamma: AsymptoticEstimate(
                    value=estimates[(gamma, hf, L, "entropy")]["value"],
                    error=estimates[(gamma, hf, L, "entropy")]["error"],
                    t_star=config["t_star"],
                    T=config["t_max"],
                )
                for gamma in config["gammas"]
            }
            for warning in gamma_monotonicity_warnings(by_gamma):
                print(f"warning [hf={hf} L={L}]: {warning}", file=sys.stderr)

    manifest.finish()
    manifest.save(out / "manifest.json")
    return out
