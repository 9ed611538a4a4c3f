"""Identify the hardening parameters from a data file."""

from __future__ import annotations

from pathlib import Path  # noqa: TC003

import typer

from viscofit import config, opts
from viscofit.cli import app
from viscofit.commands import _common
from viscofit.config import HARDENING_FIELDS
from viscofit.core.data_io import read_data_csv, write_fit_curve, write_params_toml
from viscofit.core.errors import NonConvergenceError
from viscofit.core.run_logger import IterationLogger
from viscofit.core.utils import (
    create_status,
    print_command_line_args,
    print_table,
    print_with_style,
    setup_logging,
)
from viscofit.services import identification
from viscofit.services.loading import StrainProgram


@app.command("identify")
def identify(
    *,
    data: Path = typer.Argument(
        ...,
        help="CSV file with header 'strain,stress'.",
        rich_help_panel="General Options",
    ),
    # --- Material Parameters ---
    bulk_modulus: float = opts.BULK_MODULUS,
    shear_modulus: float = opts.SHEAR_MODULUS,
    viscosity: float = opts.VISCOSITY,
    stress_exponent: float = opts.STRESS_EXPONENT,
    yield_stress: float = opts.YIELD_STRESS,
    # --- Hardening Parameters ---
    gamma: float = opts.GAMMA,
    beta: float = opts.BETA,
    c1: float = opts.C1,
    c2: float = opts.C2,
    kappa1: float = opts.KAPPA1,
    kappa2: float = opts.KAPPA2,
    # --- Strain Program ---
    duration: float = opts.DURATION,
    substeps: int = opts.SUBSTEPS,
    # --- Noise Model ---
    noise_kind: str = opts.NOISE_KIND,
    sigma: float = opts.SIGMA,
    alpha: float = opts.ALPHA,
    sigma1: float = opts.SIGMA1,
    sigma2: float = opts.SIGMA2,
    # --- Identification ---
    weighting: str = opts.WEIGHTING,
    start: Path | None = opts.START,
    rel_step: float = opts.REL_STEP,
    tol_g: float = opts.TOL_G,
    tol_f: float = opts.TOL_F,
    max_iter: int = opts.MAX_ITER,
    # --- General Options ---
    out: Path = opts.OUT,
    log_level: str = opts.LOG_LEVEL,
    log_file: str | None = opts.LOG_FILE,
    quiet: bool = opts.QUIET,
    config_file: str | None = opts.CONFIG_FILE,
    print_args: bool = opts.PRINT_ARGS,
) -> None:
    """Fit the six hardening parameters to the shear stresses in DATA.

    Writes fit.toml, fit_log.jsonl and fit_curve.csv; exits with code 4 when the
    iteration does not converge.
    """
    if print_args:
        print_command_line_args(locals())
    setup_logging(log_level, log_file, quiet=quiet)
    with _common.handle_errors(quiet=quiet):
        [kind] = _common.weighting_kinds(weighting)
        options_hardening = _common.hardening_params(
            gamma=gamma,
            beta=beta,
            c1=c1,
            c2=c2,
            kappa1=kappa1,
            kappa2=kappa2,
        )
        material = _common.material_params(
            bulk_modulus=bulk_modulus,
            shear_modulus=shear_modulus,
            viscosity=viscosity,
            stress_exponent=stress_exponent,
            yield_stress=yield_stress,
            hardening=options_hardening,
        )
        noise_cfg = _common.noise_model(noise_kind=noise_kind, sigma=sigma, alpha=alpha, sigma1=sigma1, sigma2=sigma2)
        fit_opts = config.build(config.FitOptions, rel_step=rel_step, tol_g=tol_g, tol_f=tol_f, max_iter=max_iter)
        start_params = _common.params_or_default(start, options_hardening)

        experiment = read_data_csv(data)
        experiment.require_identifiable()
        program = StrainProgram.from_strains(experiment.abscissae, duration, substeps)
        scheme = _common.weighting_scheme(kind, noise_cfg, experiment.observations)

        logger = IterationLogger(out / "fit_log.jsonl", truncate=True)
        with create_status(f"Fitting {experiment.n} observations ({kind})...", quiet=quiet):
            result = identification.levenberg_marquardt(
                start_params, experiment, scheme, material, program, fit_opts, logger=logger
            )

        write_params_toml(
            out / "fit.toml",
            result.params,
            {
                "phi": result.phi,
                "iterations": result.iterations,
                "converged": result.converged,
                "weighting": kind,
                "rms": result.rms,
                "message": result.message,
            },
        )
        write_fit_curve(out / "fit_curve.csv", experiment.abscissae, experiment.observations, result.response)

        if quiet:
            print(" ".join(f"{name}={getattr(result.params, name):.17g}" for name in HARDENING_FIELDS))
        else:
            print_table(
                "Identified hardening parameters",
                ("Parameter", "Value"),
                [(name, float(getattr(result.params, name))) for name in HARDENING_FIELDS],
            )
            print_with_style(f"Φ = {result.phi:.6g} after {result.iterations} iterations ({result.message})")
        if not result.converged:
            msg = f"No convergence after {result.iterations} iterations; best point written to {out / 'fit.toml'}."
            raise NonConvergenceError(msg)
