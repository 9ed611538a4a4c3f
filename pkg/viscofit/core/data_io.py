"""Reading and writing data, parameter and result files."""

from __future__ import annotations

import csv
import json
import logging
import math
import tomllib
from typing import TYPE_CHECKING, Any

import numpy as np
from pydantic import ValidationError

from viscofit.config import HARDENING_FIELDS, HardeningParams
from viscofit.core.errors import DataError
from viscofit.services.identification import ExperimentData

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping, Sequence
    from pathlib import Path

    import numpy.typing as npt

    from viscofit.services.sensitivity import CloudReport

LOGGER = logging.getLogger(__name__)

DATA_HEADER = ("strain", "stress")


def fmt(x: float) -> str:
    """Round-trip exact float formatting."""
    return f"{float(x):.17g}"


def _write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, float | np.floating) else v for v in row])
    LOGGER.debug("Wrote %s", path)


def write_data_csv(path: Path, strains: npt.ArrayLike, stresses: npt.ArrayLike) -> None:
    """Write a ``strain,stress`` file."""
    _write_rows(path, DATA_HEADER, zip(np.asarray(strains, dtype=float), np.asarray(stresses, dtype=float), strict=True))


def read_data_csv(path: Path) -> ExperimentData:
    """Read a ``strain,stress`` file; row order is the observation order."""
    if not path.is_file():
        msg = f"Data file not found: {path}"
        raise DataError(msg)
    strains: list[float] = []
    stresses: list[float] = []
    with path.open(encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != DATA_HEADER:
            msg = f"{path}: expected header 'strain,stress', got {header!r}."
            raise DataError(msg)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(DATA_HEADER):
                msg = f"{path}:{lineno}: expected 2 columns, got {len(row)}."
                raise DataError(msg)
            try:
                strain, stress = float(row[0]), float(row[1])
            except ValueError as e:
                msg = f"{path}:{lineno}: cannot parse {row!r} as numbers."
                raise DataError(msg) from e
            if not (math.isfinite(strain) and math.isfinite(stress)):
                msg = f"{path}:{lineno}: non-finite value."
                raise DataError(msg)
            strains.append(strain)
            stresses.append(stress)
    return ExperimentData(np.array(stresses), np.array(strains), provenance="file")


def write_params_toml(
    path: Path,
    hardening: HardeningParams,
    fit: Mapping[str, float | int | bool | str] | None = None,
) -> None:
    """Write a parameter file with a ``[hardening]`` and an optional ``[fit]`` table."""
    lines = ["[hardening]"]
    lines += [f"{name} = {fmt(getattr(hardening, name))}" for name in HARDENING_FIELDS]
    if fit:
        lines += ["", "[fit]"]
        for key, value in fit.items():
            if isinstance(value, bool):
                text = "true" if value else "false"
            elif isinstance(value, int):
                text = str(value)
            elif isinstance(value, float):
                text = fmt(value)
            else:
                text = json.dumps(str(value), ensure_ascii=False).replace("\x7f", "\\u007f")
            lines.append(f"{key} = {text}")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_params_toml(path: Path) -> HardeningParams:
    """Read the ``[hardening]`` table of a parameter file."""
    if not path.is_file():
        msg = f"Parameter file not found: {path}"
        raise DataError(msg)
    try:
        with path.open("rb") as f:
            content = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        msg = f"Cannot parse {path}: {e}"
        raise DataError(msg) from e
    table = content.get("hardening")
    if not isinstance(table, dict):
        msg = f"{path}: missing [hardening] table."
        raise DataError(msg)
    try:
        return HardeningParams(**table)
    except ValidationError as e:
        problems = "; ".join(f"hardening.{'.'.join(map(str, err['loc']))}: {err['msg']}" for err in e.errors())
        msg = f"{path}: {problems}"
        raise DataError(msg) from e


def write_fit_curve(
    path: Path,
    strains: npt.ArrayLike,
    observed: npt.ArrayLike,
    fitted: npt.ArrayLike,
) -> None:
    """Plot-ready measured and fitted curves."""
    columns = [np.asarray(c, dtype=float) for c in (strains, observed, fitted)]
    _write_rows(path, ("strain", "stress", "fitted"), zip(*columns, strict=True))


def write_cloud_csv(path: Path, report: CloudReport) -> None:
    """One row per cloud member, parameters in the fixed order plus the admissibility flag."""
    rows = ([*row, int(ok)] for row, ok in zip(report.cloud, report.admissible, strict=True))
    _write_rows(path, (*HARDENING_FIELDS, "admissible"), rows)


def write_summary_csv(path: Path, reports: Mapping[str, CloudReport]) -> None:
    """One row per (scheme, history) with the Size and the normalized variances."""
    header = ("scheme", "history", "size", "instances", "seed", *(f"var_{n}" for n in HARDENING_FIELDS))
    rows = []
    for kind, report in reports.items():
        for which, size in sorted(report.size_per_history.items()):
            rows.append((kind, which, float(size), report.n_instances, report.seed, *map(float, report.variances)))
    _write_rows(path, header, rows)
