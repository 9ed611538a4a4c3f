"""Monte Carlo comparison of weighting schemes."""

from __future__ import annotations

from pathlib import Path  # noqa: TC003

import numpy as np
import typer

from viscofit import config, opts
from viscofit.cli import app
from viscofit.commands import _common
from viscofit.core.data_io import read_data_csv, write_cloud_csv, write_summary_csv
from viscofit.core.utils import (
    create_status,
    print_command_line_args,
    print_output_panel,
    print_table,
    setup_logging,
)
from viscofit.services import metric, sensitivity
from viscofit.services.loading import StrainProgram


@app.command("montecarlo")
def montecarlo(
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
    noise_kind: str = opts.NOISE_KIND,
    sigma: float = opts.SIGMA,
    alpha: float = opts.ALPHA,
    sigma1: float = opts.SIGMA1,
    sigma2: float = opts.SIGMA2,
    seed: int = opts.SEED,
    # --- Identification ---
    weighting: str = typer.Option(
        "all",
        "--weighting",
        help="Weighting to compare: 'identity', 'diag_inv_cov', 'full_inv_cov' or 'all'.",
        envvar="VISCOFIT_WEIGHTING",
        rich_help_panel="Identification",
    ),
    rel_step: float = opts.REL_STEP,
    tol_g: float = opts.TOL_G,
    tol_f: float = opts.TOL_F,
    max_iter: int = opts.MAX_ITER,
    # --- Monte Carlo ---
    instances: int = opts.INSTANCES,
    workers: int = opts.WORKERS,
    chunk_size: int = opts.CHUNK_SIZE,
    nonlinear: bool = opts.NONLINEAR,
    params: Path | None = opts.PARAMS,
    data: Path | None = opts.DATA,
    # --- Metric ---
    history: list[int] | None = opts.HISTORY,
    metric_duration: float = opts.METRIC_DURATION,
    metric_steps: int = opts.METRIC_STEPS,
    # --- General Options ---
    out: Path = opts.OUT,
    log_level: str = opts.LOG_LEVEL,
    log_file: str | None = opts.LOG_FILE,
    quiet: bool = opts.QUIET,
    config_file: str | None = opts.CONFIG_FILE,
    print_args: bool = opts.PRINT_ARGS,
) -> None:
    """Re-identify noisy copies of the data under each weighting and compare the clouds.

    Every scheme sees the same noise draws. Writes cloud_<scheme>.csv and summary.csv.
    """
    if print_args:
        print_command_line_args(locals())
    setup_logging(log_level, log_file, quiet=quiet)
    with _common.handle_errors(quiet=quiet):
        kinds = _common.weighting_kinds(weighting, allow_all=True)
        options_hardening = _common.hardening_params(
            gamma=gamma,
            beta=beta,
            c1=c1,
            c2=c2,
            kappa1=kappa1,
            kappa2=kappa2,
        )
        p_star = _common.params_or_default(params, options_hardening)
        material = _common.material_params(
            bulk_modulus=bulk_modulus,
            shear_modulus=shear_modulus,
            viscosity=viscosity,
            stress_exponent=stress_exponent,
            yield_stress=yield_stress,
            hardening=p_star,
        )
        noise_cfg = _common.noise_model(noise_kind=noise_kind, sigma=sigma, alpha=alpha, sigma1=sigma1, sigma2=sigma2)
        fit_opts = config.build(config.FitOptions, rel_step=rel_step, tol_g=tol_g, tol_f=tol_f, max_iter=max_iter)
        mc_cfg = config.build(
            config.MonteCarloConfig,
            n_instances=instances,
            master_seed=seed,
            workers=workers,
            chunk_size=chunk_size,
            nonlinear=nonlinear,
        )
        metric_cfg = _common.metric_config(history=history, metric_duration=metric_duration, metric_steps=metric_steps)

        if data is not None:
            experiment = read_data_csv(data)
            experiment.require_identifiable()
            program = StrainProgram.from_strains(experiment.abscissae, duration, substeps)
            observations = experiment.observations
        else:
            program_cfg = _common.program_config(
                reversal=reversal,
                max_shear=max_shear,
                points=points,
                duration=duration,
                substeps=substeps,
            )
            program = _common.build_program(program_cfg)
            observations = None

        specs = metric.benchmark_specs(material, metric_cfg)
        path = sensitivity.NonlinearPath(material, program, fit_opts) if mc_cfg.nonlinear else None
        status = f"Re-identifying {mc_cfg.n_instances} instances under {len(kinds)} weighting(s)..."
        with create_status(status, quiet=quiet):
            lin = sensitivity.linearize_at(p_star, material, program, fit_opts)
            exp = lin.mod_star if observations is None else observations
            reports = sensitivity.compare_schemes(
                lin,
                noise_cfg,
                exp,
                kinds,
                mc_cfg.n_instances,
                mc_cfg.master_seed,
                specs=specs,
                chunk_size=mc_cfg.chunk_size,
                workers=mc_cfg.workers,
                nonlinear=path,
            )

        for kind, report in reports.items():
            write_cloud_csv(out / f"cloud_{kind}.csv", report)
        write_summary_csv(out / "summary.csv", reports)

    if quiet:
        for kind, report in reports.items():
            sizes = " ".join(f"size{which}={size:.17g}" for which, size in sorted(report.size_per_history.items()))
            print(f"{kind} {sizes}")
        return
    print_table(
        "Cloud size per weighting (MPa)",
        ("Weighting", "History", "Size", "Admissible"),
        [
            (kind, which, float(size), f"{np.mean(report.admissible):.1%}")
            for kind, report in reports.items()
            for which, size in sorted(report.size_per_history.items())
        ],
    )
    print_output_panel(
        "\n".join(
            f"{kind}: " + ", ".join(f"{v:.3g}" for v in report.variances) for kind, report in reports.items()
        ),
        title="📊 Normalized variances (γ, β, c1, c2, κ1, κ2)",
        subtitle=f"[dim]{out / 'summary.csv'}[/dim]",
    )
