"""Fixtures supplying simulator CSVs to the renderer tests.

When the main acceptance artifacts exist (a prior run of the simulator's
acceptance suite), their combined scans are used directly; otherwise small
runs are produced through the installed ``unravel`` CLI, which is the
interface contract between the two packages.
"""

from __future__ import annotations

import json
import os
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parents[2]


def _acceptance_dir() -> Path | None:
    env = os.environ.get("UNRAVEL_ACCEPTANCE_DIR")
    path = Path(env) if env else REPO_ROOT / "artifacts" / "acceptance"
    return path if path.exists() else None


def _run_cli(args: list[str]):
    result = subprocess.run(
        [sys.executable, "-m", "unravel.cli", *args], capture_output=True, text=True
    )
    assert result.returncode == 0, result.stderr
    return result


@pytest.fixture(scope="session")
def acceptance():
    return _acceptance_dir()


@pytest.fixture(scope="session")
def sim_out(tmp_path_factory) -> Path:
    """A small simulate cell with correlation recording."""
    out = tmp_path_factory.mktemp("sim") / "cell"
    _run_cli([
        "simulate", "--unraveling", "qsd", "--L", "8", "--hf", "1.0", "--gamma", "1.0",
        "--n-traj", "4", "--t-max", "6.0", "--seed", "3", "--record-corr",
        "--out", str(out),
    ])
    return out


@pytest.fixture(scope="session")
def sweep_out(tmp_path_factory) -> Path:
    """A toy sweep providing asymptotic, fits and phase-diagram files."""
    base = tmp_path_factory.mktemp("sweep")
    config = {
        "unraveling": "qsd",
        "gammas": [1.0, 2.0],
        "hfs": [0.5, 1.0],
        "sizes": [8, 12, 16],
        "n_traj": 3,
        "t_max": 6.0,
        "seed": 5,
    }
    cfg = base / "cfg.json"
    cfg.write_text(json.dumps(config))
    out = base / "out"
    _run_cli(["sweep", "--config", str(cfg), "--out", str(out)])
    return out


@pytest.fixture(scope="session")
def timeseries_csv(acceptance, sim_out) -> Path:
    if acceptance:
        hits = sorted(acceptance.glob("*/timeseries.csv"))
        if hits:
            return hits[0]
    return sim_out / "timeseries.csv"


@pytest.fixture(scope="session")
def field_scan_csv(acceptance, sweep_out) -> Path:
    if acceptance and (acceptance / "c11_field_scan.csv").exists():
        return acceptance / "c11_field_scan.csv"
    return sweep_out / "sweep_asymptotic.csv"


@pytest.fixture(scope="session")
def size_scan_csv(acceptance, sweep_out) -> Path:
    if acceptance and (acceptance / "c12_size_scan.csv").exists():
        return acceptance / "c12_size_scan.csv"
    return sweep_out / "sweep_asymptotic.csv"


@pytest.fixture(scope="session")
def comparison_csv(acceptance, sweep_out) -> Path:
    if acceptance and (acceptance / "c13_comparison.csv").exists():
        return acceptance / "c13_comparison.csv"
    return sweep_out / "sweep_asymptotic.csv"


@pytest.fixture(scope="session")
def fits_csv(sweep_out) -> Path:
    return sweep_out / "tanh_fits.csv"


@pytest.fixture(scope="session")
def phase_csv(sweep_out) -> Path:
    return sweep_out / "phase_diagram.csv"


@pytest.fixture(scope="session")
def correlations_csv(acceptance, sim_out) -> Path:
    if acceptance:
        hits = sorted(acceptance.glob("*/correlations.csv"))
        if hits:
            return hits[0]
    return sim_out / "correlations.csv"


def drop_column(src: Path, dst: Path, column: str) -> Path:
    """Copy a CSV without one column (metadata lines kept verbatim)."""
    lines = src.read_text().splitlines()
    out = []
    idx = None
    for line in lines:
        if line.startswith("#"):
            out.append(line)
            continue
        cells = line.split(",")
        if idx is None:
            idx = cells.index(column)
        out.append(",".join(c for i, c in enumerate(cells) if i != idx))
    dst.write_text("\n".join(out) + "\n")
    return dst


def truncate_rows(src: Path, dst: Path) -> Path:
    """Copy a CSV keeping only metadata and the header row."""
    out = []
    for line in src.read_text().splitlines():
        out.append(line)
        if not line.startswith("#"):
            break
    dst.write_text("\n".join(out) + "\n")
    return dst


@pytest.fixture()
def mutate(tmp_path):
    return tmp_path, drop_column, truncate_rows


def pytest_configure(config):
    if shutil.which(sys.executable) is None:  # pragma: no cover
        raise RuntimeError("python executable not found")
