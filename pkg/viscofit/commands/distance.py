"""Distances between two hardening parameter sets."""

from __future__ import annotations

from pathlib import Path  # noqa: TC003

import typer

from viscofit import opts
from viscofit.cli import app
from viscofit.commands import _common
from viscofit.core.data_io import read_params_toml
from viscofit.core.utils import create_status, print_command_line_args, print_table, setup_logging
from viscofit.services import metric


@app.command("distance")
def distance(
    *,
    first: Path = typer.Argument(..., help="First parameter file.", rich_help_panel="General Options"),
    second: Path = typer.Argument(..., help="Second parameter file.", rich_help_panel="General Options"),
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
    # --- Metric ---
    history: list[int] | None = opts.HISTORY,
    metric_duration: float = opts.METRIC_DURATION,
    metric_steps: int = opts.METRIC_STEPS,
    reference: Path | None = opts.REFERENCE,
    # --- General Options ---
    log_level: str = opts.LOG_LEVEL,
    log_file: str | None = opts.LOG_FILE,
    quiet: bool = opts.QUIET,
    config_file: str | None = opts.CONFIG_FILE,
    print_args: bool = opts.PRINT_ARGS,
) -> None:
    """Print the Euclidean, non-dimensional and mechanics distances between FIRST and SECOND.

    The metric axioms are checked on the two sets together with the reference.
    """
    if print_args:
        print_command_line_args(locals())
    setup_logging(log_level, log_file, quiet=quiet)
    with _common.handle_errors(quiet=quiet):
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
        metric_cfg = _common.metric_config(history=history, metric_duration=metric_duration, metric_steps=metric_steps)
        p1 = read_params_toml(first)
        p2 = read_params_toml(second)
        ref = _common.params_or_default(reference, options_hardening)

        specs = {
            "euclidean": metric.MetricSpec.euclidean(),
            "euclidean_nondim": metric.MetricSpec.euclidean_nondim(ref),
        }
        specs |= {f"mechanics_{which}": spec for which, spec in metric.benchmark_specs(material, metric_cfg).items()}
        with create_status("Integrating the benchmark histories...", quiet=quiet):
            values = {name: metric.distance(p1, p2, spec) for name, spec in specs.items()}
            axioms = {name: metric.check_metric_axioms(spec, [p1, p2, ref]) for name, spec in specs.items()}

    if quiet:
        for name, value in values.items():
            print(f"{name}={value:.17g}")
        return
    print_table(
        f"Distance between {first.name} and {second.name}",
        ("Metric", "Distance", "Axioms"),
        [
            (name, value, "✓" if axioms[name].passed else _failed_axioms(axioms[name]))
            for name, value in values.items()
        ],
    )


def _failed_axioms(report: metric.AxiomReport) -> str:
    checks = {
        "non-negativity": report.non_negative,
        "symmetry": report.symmetric,
        "triangle": report.triangle,
        "separation": report.separation,
    }
    return "✗ " + ", ".join(name for name, ok in checks.items() if not ok)
