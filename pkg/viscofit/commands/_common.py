"""Shared orchestration for the viscofit commands."""

from __future__ import annotations

import logging
from contextlib import contextmanager
from typing import TYPE_CHECKING

import numpy as np
import typer

from viscofit import config, constants
from viscofit.core.data_io import read_params_toml
from viscofit.core.errors import ConfigError, ViscofitError
from viscofit.core.utils import print_error_message
from viscofit.services import identification, noise
from viscofit.services.loading import StrainProgram, torsion_program

if TYPE_CHECKING:
    from collections.abc import Generator, Sequence
    from pathlib import Path

    import numpy.typing as npt

LOGGER = logging.getLogger(__name__)

_SUGGESTIONS = {
    constants.EXIT_CONFIG: "Check the options and the configuration file.",
    constants.EXIT_DATA: "Check the data and parameter files.",
    constants.EXIT_NON_CONVERGENCE: "Try another start point or a larger --max-iter.",
    constants.EXIT_NUMERICAL: "Try more --substeps or --metric-steps, or parameters closer to the data.",
}


@contextmanager
def handle_errors(*, quiet: bool) -> Generator[None, None, None]:
    """Report viscofit errors and exit with the code of their family."""
    try:
        yield
    except ViscofitError as e:
        LOGGER.debug("Command failed", exc_info=True)
        if quiet:
            print(f"❌ {e}")
        else:
            print_error_message(str(e), _SUGGESTIONS.get(e.exit_code))
        raise typer.Exit(code=e.exit_code) from e


def material_params(
    *,
    bulk_modulus: float,
    shear_modulus: float,
    viscosity: float,
    stress_exponent: float,
    yield_stress: float,
    hardening: config.HardeningParams,
) -> config.MaterialParams:
    return config.build(
        config.MaterialParams,
        k=bulk_modulus,
        mu=shear_modulus,
        eta=viscosity,
        m=stress_exponent,
        K=yield_stress,
        hardening=hardening,
    )


def hardening_params(
    *,
    gamma: float,
    beta: float,
    c1: float,
    c2: float,
    kappa1: float,
    kappa2: float,
) -> config.HardeningParams:
    return config.build(config.HardeningParams, gamma=gamma, beta=beta, c1=c1, c2=c2, kappa1=kappa1, kappa2=kappa2)


def program_config(
    *,
    reversal: Sequence[float] | None,
    max_shear: float,
    points: int,
    duration: float,
    substeps: int,
) -> config.ProgramConfig:
    return config.build(
        config.ProgramConfig,
        reversals=tuple(reversal) if reversal else constants.TORSION_REVERSALS,
        max_shear=max_shear,
        n_points=points,
        duration=duration,
        substeps=substeps,
    )


def noise_model(*, noise_kind: str, sigma: float, alpha: float, sigma1: float, sigma2: float) -> config.NoiseModel:
    return config.build(
        config.NoiseModel,
        kind=noise_kind.strip().lower().replace("-", "_"),
        sigma=sigma,
        alpha=alpha,
        sigma1=sigma1,
        sigma2=sigma2,
    )


def metric_config(*, history: Sequence[int] | None, metric_duration: float, metric_steps: int) -> config.MetricConfig:
    return config.build(
        config.MetricConfig,
        histories=tuple(history) if history else constants.METRIC_HISTORIES,
        duration=metric_duration,
        n_steps=metric_steps,
    )


def weighting_kinds(name: str, *, allow_all: bool = False) -> list[str]:
    """Validate a ``--weighting`` value; 'all' expands to every kind where allowed."""
    normalized = config.normalize_weighting(name)
    if allow_all and normalized == "all":
        return list(config.WEIGHTING_KINDS)
    if normalized not in config.WEIGHTING_KINDS:
        allowed = ", ".join((*config.WEIGHTING_KINDS, "all") if allow_all else config.WEIGHTING_KINDS)
        msg = f"Unknown weighting '{name}'; choose one of {allowed}."
        raise ConfigError(msg)
    return [normalized]


def build_program(cfg: config.ProgramConfig) -> StrainProgram:
    program, _ = torsion_program(cfg.max_shear, cfg.reversals, cfg.n_points, cfg.duration, cfg.substeps)
    return program


def weighting_scheme(
    kind: str,
    model: config.NoiseModel,
    observations: npt.NDArray,
) -> identification.WeightingScheme:
    """Weighting of the given kind built from the noise covariance of the observations.

    A vanishing covariance leaves only the identity.
    """
    if kind == "identity":
        return identification.WeightingScheme.identity(len(observations))
    cov = noise.covariance(model, observations)
    if not np.any(cov):
        LOGGER.warning("The noise covariance vanishes; using identity weighting instead of %s", kind)
        return identification.WeightingScheme.identity(len(observations))
    return identification.WeightingScheme.from_covariance(kind, cov)


def params_or_default(path: Path | None, default: config.HardeningParams) -> config.HardeningParams:
    return read_params_toml(path) if path is not None else default
