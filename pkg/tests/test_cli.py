"""CSV formats, manifests, CLI commands, sweep resumption."""

import json

import numpy as np
import pytest

from unravel import MissingColumnError, checks, pipeline
from unravel.cli import main
from unravel.runio import Manifest, config_hash, format_number, read_csv, require_columns, write_csv


def test_format_number_round_trips():
    rng = np.random.default_rng(0)
    for x in rng.normal(size=50) * 10.0 ** rng.integers(-12, 12, 50):
        assert float(format_number(float(x))) == float(x)
    assert format_number(3) == "3"
    assert format_number(True) == "1"


def test_csv_round_trip(tmp_path):
    path = tmp_path / "data.csv"
    write_csv(path, {"a": 1, "note": "hello"}, ["x", "y"], [(1.5, 2), (0.1, 3)])
    meta, rows = read_csv(path)
    assert meta["a"] == "1" and meta["note"] == "hello"
    assert [float(r["x"]) for r in rows] == [1.5, 0.1]
    require_columns(rows, ["x", "y"], path)
    with pytest.raises(MissingColumnError, match="z"):
        require_columns(rows, ["z"], path)


def test_manifest_hash_ignores_timestamps(tmp_path):
    m1 = Manifest({"L": 16, "gamma": 1.0})
    m2 = Manifest({"L": 16, "gamma": 1.0})
    assert m1.hash == m2.hash
    assert m1.hash != config_hash({"L": 32, "gamma": 1.0})
    path = tmp_path / "manifest.json"
    m1.finish()
    m1.save(path)
    loaded = Manifest.load(path)
    assert loaded.hash == m1.hash
    assert loaded.finished_utc == m1.finished_utc


def test_cli_version(capsys):
    assert main(["version"]) == 0
    assert "unravel" in capsys.readouterr().out


def test_cli_validate_quick(capsys):
    assert main(["validate", "--quick"]) == 0
    out = capsys.readouterr().out
    assert "PASS dispersion-match" in out
    assert "FAIL" not in out


def test_validate_catches_fault_injection(monkeypatch):
    import unravel.ising as ising_module

    real_build = ising_module.build_bdg

    def broken(params):
        H = real_build(params)
        flipped = H.B.copy()  # wrong boundary-bond sign (periodic chain)
        flipped[-1, 0] *= -1.0
        flipped[0, -1] *= -1.0
        from unravel.ising import BdgMatrix, _assemble

        return BdgMatrix(A=H.A, B=flipped, matrix=_assemble(H.A, flipped))

    monkeypatch.setattr(ising_module, "build_bdg", broken)
    name, ok, detail = checks.check_dispersion()
    assert name == "dispersion-match"
    assert not ok


def test_cli_simulate_and_nh_gamma0_collapse(tmp_path):
    common = ["--L", "8", "--hf", "1.0", "--gamma", "0.0", "--n-traj", "2",
              "--t-max", "3.0", "--seed", "5", "--record-every", "4"]
    out_qsd = tmp_path / "qsd"
    out_nh = tmp_path / "nh"
    assert main(["simulate", "--unraveling", "qsd", *common, "--out", str(out_qsd)]) == 0
    assert main(["simulate", "--unraveling", "nh", "--alpha", "1.0", *common, "--out", str(out_nh)]) == 0
    _, rows_qsd = read_csv(out_qsd / "timeseries.csv")
    _, rows_nh = read_csv(out_nh / "timeseries.csv")
    s_qsd = np.array([float(r["s_mean"]) for r in rows_qsd])
    s_nh = np.array([float(r["s_mean"]) for r in rows_nh])
    assert np.abs(s_qsd - s_nh).max() < 1e-10


def test_cli_qj_auto_dt_recorded(tmp_path):
    out = tmp_path / "qj"
    rc = main([
        "simulate", "--unraveling", "qj", "--alpha", "1.0", "--L", "8", "--hf", "1.0",
        "--gamma", "2.0", "--n-traj", "2", "--t-max", "1.0", "--seed", "1",
        "--out", str(out),
    ])
    assert rc == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["dt"] == pytest.approx(1.0 / (8 * 8 * 2.0 * 1.0))
    meta, _ = read_csv(out / "timeseries.csv")
    assert float(meta["dt"]) == pytest.approx(1.0 / 128.0)
    assert meta["manifest_hash"] == manifest["manifest_hash"]


def test_cli_configuration_errors_exit_2(tmp_path, capsys):
    rc = main([
        "simulate", "--unraveling", "qj", "--alpha", "1.0", "--L", "8", "--hf", "1.0",
        "--gamma", "5.0", "--n-traj", "1", "--t-max", "1.0", "--seed", "1",
        "--dt", "0.5", "--out", str(tmp_path / "x"),
    ])
    assert rc == 2
    assert "jump discretization" in capsys.readouterr().err
    rc = main([
        "simulate", "--unraveling", "qsd", "--L", "7", "--hf", "1.0", "--gamma", "1.0",
        "--n-traj", "1", "--t-max", "1.0", "--seed", "1", "--out", str(tmp_path / "y"),
    ])
    assert rc == 2


def test_sweep_toy_grid_and_resume(tmp_path):
    config = {
        "unraveling": "qsd",
        "gammas": [1.0, 2.0],
        "hfs": [0.5, 1.0],
        "sizes": [8, 16],
        "n_traj": 3,
        "t_max": 4.0,
        "seed": 9,
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(config))
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(cfg_path), "--out", str(out)]) == 0
    _, rows = read_csv(out / "sweep_asymptotic.csv")
    assert len(rows) == 2 * 2 * 2 * 2  # cells x quantities
    first = (out / "sweep_asymptotic.csv").read_bytes()
    manifest = json.loads((out / "manifest.json").read_text())
    assert len(manifest["cells"]) == 8
    assert all(v == "done" for v in manifest["cells"].values())

    # resume: all cells reused, outputs byte-identical
    assert main(["sweep", "--config", str(cfg_path), "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert all(v == "reused" for v in manifest["cells"].values())
    assert (out / "sweep_asymptotic.csv").read_bytes() == first


def test_sweep_with_three_sizes_emits_fits(tmp_path):
    config = {
        "unraveling": "qsd",
        "gammas": [1.0],
        "hfs": [1.0],
        "sizes": [8, 12, 16],
        "n_traj": 3,
        "t_max": 4.0,
        "seed": 9,
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(config))
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert (out / "tanh_fits.csv").exists()
    _, rows = read_csv(out / "phase_diagram.csv")
    assert rows[0]["verdict"] in {"subextensive", "area-law", "crossover"}


def test_sweep_missing_key_rejected(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"unraveling": "qsd"}))
    assert main(["sweep", "--config", str(cfg_path), "--out", str(tmp_path / "o")]) == 2


def test_cli_oracle_crosscheck(capsys):
    assert main(["oracle", "crosscheck", "--L", "4", "--n-traj", "150"]) == 0
    out = capsys.readouterr().out
    assert "PASS oracle-lindblad-consistency" in out
    assert "FAIL" not in out


def test_cli_validate_quick_is_fast(capsys):
    import time

    t0 = time.time()
    assert main(["validate", "--quick"]) == 0
    assert time.time() - t0 < 60.0
    capsys.readouterr()


def test_resolve_workers_env(monkeypatch):
    monkeypatch.delenv("UNRAVEL_THREADS", raising=False)
    assert pipeline.resolve_workers(None) == 1
    monkeypatch.setenv("UNRAVEL_THREADS", "6")
    assert pipeline.resolve_workers(None) == 6
    assert pipeline.resolve_workers(2) == 2
    monkeypatch.setenv("UNRAVEL_THREADS", "abc")
    from unravel.errors import ConfigurationError

    with pytest.raises(ConfigurationError):
        pipeline.resolve_workers(None)
