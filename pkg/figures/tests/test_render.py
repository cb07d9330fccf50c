"""Renderer tests: images from real simulator CSVs, named schema errors."""

from pathlib import Path

import pytest

from unravel_figures import (
    EmptyInputError,
    MissingColumnError,
    correlation_decay,
    entropy_vs_field,
    entropy_vs_size,
    entropy_vs_time,
    lambda_vs_field,
    nonhermitian_panels,
    phase_diagram,
    unraveling_comparison,
)
from unravel_figures.cli import main

from conftest import drop_column, truncate_rows


def assert_images(paths):
    exts = {p.suffix for p in paths}
    assert exts == {".png", ".svg"}
    for p in paths:
        assert Path(p).stat().st_size > 1000


def test_entropy_vs_time(timeseries_csv, tmp_path):
    assert_images(entropy_vs_time([timeseries_csv], tmp_path / "fig"))


def test_entropy_vs_time_missing_column(timeseries_csv, tmp_path):
    broken = drop_column(timeseries_csv, tmp_path / "broken.csv", "s_err")
    with pytest.raises(MissingColumnError, match="s_err"):
        entropy_vs_time([broken], tmp_path / "fig")
    assert not (tmp_path / "fig.png").exists()


def test_entropy_vs_time_empty_input(timeseries_csv, tmp_path):
    empty = truncate_rows(timeseries_csv, tmp_path / "empty.csv")
    with pytest.raises(EmptyInputError):
        entropy_vs_time([empty], tmp_path / "fig")
    assert not (tmp_path / "fig.png").exists()


def test_entropy_vs_field(field_scan_csv, tmp_path):
    assert_images(entropy_vs_field(field_scan_csv, tmp_path / "fig"))


def test_entropy_vs_field_missing_column(field_scan_csv, tmp_path):
    broken = drop_column(field_scan_csv, tmp_path / "broken.csv", "value")
    with pytest.raises(MissingColumnError, match="value"):
        entropy_vs_field(broken, tmp_path / "fig")


def test_entropy_vs_size(size_scan_csv, fits_csv, tmp_path):
    assert_images(entropy_vs_size(size_scan_csv, tmp_path / "plain"))
    assert_images(entropy_vs_size(size_scan_csv, tmp_path / "fits", fits_path=fits_csv))


def test_entropy_vs_size_missing_column(size_scan_csv, tmp_path):
    broken = drop_column(size_scan_csv, tmp_path / "broken.csv", "L")
    with pytest.raises(MissingColumnError, match="'L'"):
        entropy_vs_size(broken, tmp_path / "fig")


def test_lambda_vs_field(fits_csv, tmp_path):
    assert_images(lambda_vs_field(fits_csv, tmp_path / "fig"))


def test_lambda_vs_field_missing_column(fits_csv, tmp_path):
    broken = drop_column(fits_csv, tmp_path / "broken.csv", "lambda")
    with pytest.raises(MissingColumnError, match="lambda"):
        lambda_vs_field(broken, tmp_path / "fig")


def test_unraveling_comparison(comparison_csv, tmp_path):
    assert_images(unraveling_comparison(comparison_csv, tmp_path / "fig"))


def test_unraveling_comparison_missing_column(comparison_csv, tmp_path):
    broken = drop_column(comparison_csv, tmp_path / "broken.csv", "unraveling")
    with pytest.raises(MissingColumnError, match="unraveling"):
        unraveling_comparison(broken, tmp_path / "fig")


def test_nonhermitian_panels(timeseries_csv, size_scan_csv, tmp_path):
    assert_images(nonhermitian_panels([timeseries_csv], size_scan_csv, tmp_path / "fig"))


def test_correlation_decay(correlations_csv, tmp_path):
    assert_images(correlation_decay([correlations_csv], tmp_path / "fig"))


def test_correlation_decay_missing_column(correlations_csv, tmp_path):
    broken = drop_column(correlations_csv, tmp_path / "broken.csv", "r")
    with pytest.raises(MissingColumnError, match="'r'"):
        correlation_decay([broken], tmp_path / "fig")


def test_phase_diagram(phase_csv, tmp_path):
    assert_images(phase_diagram(phase_csv, tmp_path / "fig"))


def test_phase_diagram_missing_column(phase_csv, tmp_path):
    broken = drop_column(phase_csv, tmp_path / "broken.csv", "verdict")
    with pytest.raises(MissingColumnError, match="verdict"):
        phase_diagram(broken, tmp_path / "fig")


def test_cli_renders_and_reports_errors(timeseries_csv, tmp_path, capsys):
    out = tmp_path / "cli_fig"
    rc = main(["entropy-vs-time", "--timeseries", str(timeseries_csv), "--out", str(out)])
    assert rc == 0
    assert out.with_suffix(".png").exists()
    broken = drop_column(timeseries_csv, tmp_path / "broken.csv", "s_mean")
    rc = main(["entropy-vs-time", "--timeseries", str(broken), "--out", str(tmp_path / "x")])
    assert rc == 1
    assert "s_mean" in capsys.readouterr().err
