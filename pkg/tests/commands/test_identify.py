"""Tests for the identify command."""

from __future__ import annotations

import csv
import tomllib
from typing import TYPE_CHECKING
from unittest.mock import patch

import numpy as np
import pytest
from typer.testing import CliRunner

from viscofit.cli import app
from viscofit.config import HardeningParams
from viscofit.core.data_io import read_params_toml, write_data_csv, write_params_toml
from viscofit.services.identification import FitResult

if TYPE_CHECKING:
    from pathlib import Path

runner = CliRunner()
N = 10


@pytest.fixture
def data_file(tmp_path: Path) -> Path:
    path = tmp_path / "data.csv"
    strains = np.linspace(0.0, 0.2, N)
    write_data_csv(path, strains, 400.0 * np.tanh(20.0 * strains))
    return path


def _fit(*, converged: bool) -> FitResult:
    return FitResult(
        params=HardeningParams().scaled(1.1),
        phi=2.5,
        iterations=7 if converged else 200,
        jacobian=np.zeros((N, 6)),
        converged=converged,
        response=np.full(N, 100.0),
        message="relative decrease below tol_f" if converged else "maximum number of iterations reached",
    )


@patch("viscofit.services.identification.levenberg_marquardt")
def test_identify_writes_fit_files(mock_fit: pytest.MagicMock, data_file: Path, tmp_path: Path) -> None:
    mock_fit.return_value = _fit(converged=True)
    out = tmp_path / "out"
    result = runner.invoke(app, ["identify", str(data_file), "--weighting", "identity", "--out", str(out), "--quiet"])
    assert result.exit_code == 0, result.stdout
    assert result.stdout.startswith("gamma=")
    mock_fit.assert_called_once()

    assert read_params_toml(out / "fit.toml") == HardeningParams().scaled(1.1)
    with (out / "fit.toml").open("rb") as f:
        fit = tomllib.load(f)["fit"]
    assert fit["converged"] is True
    assert fit["iterations"] == 7
    assert fit["weighting"] == "identity"
    assert fit["rms"] == pytest.approx(np.sqrt(2.5 / N))

    with (out / "fit_curve.csv").open() as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == N
    assert set(rows[0]) == {"strain", "stress", "fitted"}


@patch("viscofit.services.identification.levenberg_marquardt")
def test_start_point_is_read_from_file(mock_fit: pytest.MagicMock, data_file: Path, tmp_path: Path) -> None:
    mock_fit.return_value = _fit(converged=True)
    start = HardeningParams().scaled(0.5)
    write_params_toml(tmp_path / "start.toml", start)

    runner.invoke(app, ["identify", str(data_file), "--out", str(tmp_path / "a"), "--quiet"])
    runner.invoke(
        app,
        ["identify", str(data_file), "--start", str(tmp_path / "start.toml"), "--out", str(tmp_path / "b"), "--quiet"],
    )
    assert mock_fit.call_count == 2
    assert mock_fit.call_args_list[0].args[0] == HardeningParams()
    assert mock_fit.call_args_list[1].args[0] == start


@patch("viscofit.services.identification.levenberg_marquardt")
def test_non_convergence_exits_with_code_4(mock_fit: pytest.MagicMock, data_file: Path, tmp_path: Path) -> None:
    mock_fit.return_value = _fit(converged=False)
    result = runner.invoke(app, ["identify", str(data_file), "--out", str(tmp_path), "--quiet"])
    assert result.exit_code == 4
    assert "No convergence" in result.stdout
    # The best point so far is still written.
    assert (tmp_path / "fit.toml").exists()


@patch("viscofit.services.identification.levenberg_marquardt")
def test_noise_free_weighting_falls_back_to_identity(
    mock_fit: pytest.MagicMock,
    data_file: Path,
    tmp_path: Path,
) -> None:
    mock_fit.return_value = _fit(converged=True)
    args = ["identify", str(data_file), "--weighting", "full_inv_cov", "--sigma1", "0", "--sigma2", "0"]
    result = runner.invoke(app, [*args, "--out", str(tmp_path), "--quiet"])
    assert result.exit_code == 0, result.stdout
    assert mock_fit.call_args.args[2].kind == "identity"


def test_missing_data_file_exits_with_code_3(tmp_path: Path) -> None:
    result = runner.invoke(app, ["identify", str(tmp_path / "missing.csv"), "--out", str(tmp_path), "--quiet"])
    assert result.exit_code == 3
    assert "not found" in result.stdout


def test_too_few_observations_exit_with_code_3(tmp_path: Path) -> None:
    path = tmp_path / "data.csv"
    write_data_csv(path, np.linspace(0.0, 0.1, 5), np.linspace(0.0, 100.0, 5))
    result = runner.invoke(app, ["identify", str(path), "--out", str(tmp_path), "--quiet"])
    assert result.exit_code == 3


def test_unknown_weighting_exits_with_code_2(data_file: Path, tmp_path: Path) -> None:
    result = runner.invoke(app, ["identify", str(data_file), "--weighting", "bogus", "--out", str(tmp_path), "--quiet"])
    assert result.exit_code == 2
    assert "Unknown weighting" in result.stdout
