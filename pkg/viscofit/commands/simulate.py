"""Generate a synthetic torsion experiment from the model."""

from __future__ import annotations

from pathlib import Path  # noqa: TC003

import numpy as np

from viscofit import config, opts
from viscofit.cli import app
from viscofit.commands import _common
from viscofit.core.data_io import write_data_csv
from viscofit.core.utils import create_status, print_command_line_args, print_output_panel, setup_logging
from viscofit.services import identification, noise


@app.command("simulate")
def simulate(
    *,
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
    reversal: list[float] | None = opts.REVERSAL,
    max_shear: float = opts.MAX_SHEAR,
    points: int = opts.POINTS,
    duration: float = opts.DURATION,
    substeps: int = opts.SUBSTEPS,
    # --- Noise Model ---
    with_noise: bool = opts.WITH_NOISE,
    noise_kind: str = opts.NOISE_KIND,
    sigma: float = opts.SIGMA,
    alpha: float = opts.ALPHA,
    sigma1: float = opts.SIGMA1,
    sigma2: float = opts.SIGMA2,
    seed: int = opts.SEED,
    # --- General Options ---
    out: Path = opts.OUT,
    log_level: str = opts.LOG_LEVEL,
    log_file: str | None = opts.LOG_FILE,
    quiet: bool = opts.QUIET,
    config_file: str | None = opts.CONFIG_FILE,
    print_args: bool = opts.PRINT_ARGS,
) -> None:
    """Write the model's shear stress along the torsion program to data.csv."""
    if print_args:
        print_command_line_args(locals())
    setup_logging(log_level, log_file, quiet=quiet)
    with _common.handle_errors(quiet=quiet):
        hardening = _common.hardening_params(gamma=gamma, beta=beta, c1=c1, c2=c2, kappa1=kappa1, kappa2=kappa2)
        run = config.build(
            config.RunConfig,
            material=_common.material_params(
                bulk_modulus=bulk_modulus,
                shear_modulus=shear_modulus,
                viscosity=viscosity,
                stress_exponent=stress_exponent,
                yield_stress=yield_stress,
                hardening=hardening,
            ),
            truth_hardening=hardening,
            program=_common.program_config(
                reversal=reversal,
                max_shear=max_shear,
                points=points,
                duration=duration,
                substeps=substeps,
            ),
            noise=_common.noise_model(noise_kind=noise_kind, sigma=sigma, alpha=alpha, sigma1=sigma1, sigma2=sigma2),
            general=config.build(config.General, log_level=log_level, log_file=log_file, quiet=quiet, output_dir=out),
        )
        program = _common.build_program(run.program)

        with create_status(f"Integrating {program.n_points} points...", quiet=quiet):
            stresses = identification.model_response(run.truth_hardening, run.material, program)
        if with_noise:
            stresses = stresses + noise.sample_noise(run.noise, stresses, seed)

        path = run.general.output_dir / "data.csv"
        write_data_csv(path, np.asarray(program.shear_values), stresses)

    if quiet:
        print(path)
    else:
        print_output_panel(
            f"{program.n_points} observations, max |stress| {np.max(np.abs(stresses)):.2f} MPa",
            title="📈 Synthetic experiment",
            subtitle=f"[dim]{path}[/dim]",
        )
