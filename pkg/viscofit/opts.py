"""Shared Typer options for the viscofit commands."""

from pathlib import Path

import typer

from viscofit import constants

# --- Material Parameters ---
BULK_MODULUS: float = typer.Option(
    constants.BULK_MODULUS,
    "--bulk-modulus",
    help="Bulk modulus k in MPa.",
    envvar="VISCOFIT_BULK_MODULUS",
    rich_help_panel="Material Parameters",
)
SHEAR_MODULUS: float = typer.Option(
    constants.SHEAR_MODULUS,
    "--shear-modulus",
    help="Shear modulus mu in MPa.",
    envvar="VISCOFIT_SHEAR_MODULUS",
    rich_help_panel="Material Parameters",
)
VISCOSITY: float = typer.Option(
    constants.VISCOSITY,
    "--viscosity",
    help="Viscosity eta of the Perzyna law in s.",
    envvar="VISCOFIT_VISCOSITY",
    rich_help_panel="Material Parameters",
)
STRESS_EXPONENT: float = typer.Option(
    constants.STRESS_EXPONENT,
    "--stress-exponent",
    help="Exponent m of the Perzyna law.",
    envvar="VISCOFIT_STRESS_EXPONENT",
    rich_help_panel="Material Parameters",
)
YIELD_STRESS: float = typer.Option(
    constants.YIELD_STRESS,
    "--yield-stress",
    help="Initial yield stress K in MPa.",
    envvar="VISCOFIT_YIELD_STRESS",
    rich_help_panel="Material Parameters",
)

# --- Hardening Parameters ---
GAMMA: float = typer.Option(
    constants.HARDENING_FULL_INV_COV[0],
    "--gamma",
    help="Isotropic hardening modulus gamma in MPa (synthetic truth).",
    envvar="VISCOFIT_GAMMA",
    rich_help_panel="Hardening Parameters",
)
BETA: float = typer.Option(
    constants.HARDENING_FULL_INV_COV[1],
    "--beta",
    help="Saturation parameter beta of isotropic hardening (synthetic truth).",
    envvar="VISCOFIT_BETA",
    rich_help_panel="Hardening Parameters",
)
C1: float = typer.Option(
    constants.HARDENING_FULL_INV_COV[2],
    "--c1",
    help="First kinematic hardening modulus c1 in MPa (synthetic truth).",
    envvar="VISCOFIT_C1",
    rich_help_panel="Hardening Parameters",
)
C2: float = typer.Option(
    constants.HARDENING_FULL_INV_COV[3],
    "--c2",
    help="Second kinematic hardening modulus c2 in MPa (synthetic truth).",
    envvar="VISCOFIT_C2",
    rich_help_panel="Hardening Parameters",
)
KAPPA1: float = typer.Option(
    constants.HARDENING_FULL_INV_COV[4],
    "--kappa1",
    help="First dynamic recovery parameter kappa1 in 1/MPa (synthetic truth).",
    envvar="VISCOFIT_KAPPA1",
    rich_help_panel="Hardening Parameters",
)
KAPPA2: float = typer.Option(
    constants.HARDENING_FULL_INV_COV[5],
    "--kappa2",
    help="Second dynamic recovery parameter kappa2 in 1/MPa (synthetic truth).",
    envvar="VISCOFIT_KAPPA2",
    rich_help_panel="Hardening Parameters",
)

# --- Strain Program ---
REVERSAL: list[float] | None = typer.Option(
    None,
    "--reversal",
    help="Shear target of the torsion program; repeat for every reversal. Default: 0.4, -0.2, 0.5.",
    envvar="VISCOFIT_REVERSAL",
    rich_help_panel="Strain Program",
)
MAX_SHEAR: float = typer.Option(
    constants.TORSION_MAX_SHEAR,
    "--max-shear",
    help="Largest admissible |shear| of the program.",
    envvar="VISCOFIT_MAX_SHEAR",
    rich_help_panel="Strain Program",
)
POINTS: int = typer.Option(
    constants.TORSION_POINTS,
    "--points",
    help="Number of observation points along the program.",
    envvar="VISCOFIT_POINTS",
    rich_help_panel="Strain Program",
)
DURATION: float = typer.Option(
    constants.TORSION_DURATION,
    "--duration",
    help="Duration of the program in s; the default keeps the shear rate at 1e-3 1/s.",
    envvar="VISCOFIT_DURATION",
    rich_help_panel="Strain Program",
)
SUBSTEPS: int = typer.Option(
    constants.TORSION_SUBSTEPS,
    "--substeps",
    help="Minimum integration steps between consecutive observation points; steps never exceed 1e-3 shear.",
    envvar="VISCOFIT_SUBSTEPS",
    rich_help_panel="Strain Program",
)

# --- Noise Model ---
NOISE_KIND: str = typer.Option(
    "two_source",
    "--noise-kind",
    help="Noise model: 'white', 'ar' or 'two_source'.",
    envvar="VISCOFIT_NOISE_KIND",
    rich_help_panel="Noise Model",
)
SIGMA: float = typer.Option(
    constants.SIGMA_UNCORRELATED,
    "--sigma",
    help="Standard deviation of white or autoregressive noise in MPa.",
    envvar="VISCOFIT_SIGMA",
    rich_help_panel="Noise Model",
)
ALPHA: float = typer.Option(
    0.0,
    "--alpha",
    help="Autoregression coefficient in [0, 1).",
    envvar="VISCOFIT_ALPHA",
    rich_help_panel="Noise Model",
)
SIGMA1: float = typer.Option(
    constants.SIGMA_UNCORRELATED,
    "--sigma1",
    help="Uncorrelated part of the two-source noise in MPa.",
    envvar="VISCOFIT_SIGMA1",
    rich_help_panel="Noise Model",
)
SIGMA2: float = typer.Option(
    constants.SIGMA_CORRELATED,
    "--sigma2",
    help="Correlated part of the two-source noise in MPa.",
    envvar="VISCOFIT_SIGMA2",
    rich_help_panel="Noise Model",
)
SEED: int = typer.Option(
    0,
    "--seed",
    help="Seed of the noise generator (master seed for Monte Carlo).",
    envvar="VISCOFIT_SEED",
    rich_help_panel="Noise Model",
)

# --- Identification ---
WEIGHTING: str = typer.Option(
    "full_inv_cov",
    "--weighting",
    help="Weighting matrix: 'identity', 'diag_inv_cov' (W = diag 1/Cov_ii) or 'full_inv_cov' (W = Cov^-1).",
    envvar="VISCOFIT_WEIGHTING",
    rich_help_panel="Identification",
)
START: Path | None = typer.Option(
    None,
    "--start",
    help="Parameter file with the start point. Default: the hardening parameters given as options.",
    envvar="VISCOFIT_START",
    rich_help_panel="Identification",
)
REL_STEP: float = typer.Option(
    constants.FD_REL_STEP,
    "--rel-step",
    help="Relative finite-difference step of the Jacobian.",
    envvar="VISCOFIT_REL_STEP",
    rich_help_panel="Identification",
)
TOL_G: float = typer.Option(
    constants.LM_TOL_G,
    "--tol-g",
    help="Gradient tolerance of the Levenberg-Marquardt iteration.",
    envvar="VISCOFIT_TOL_G",
    rich_help_panel="Identification",
)
TOL_F: float = typer.Option(
    constants.LM_TOL_F,
    "--tol-f",
    help="Relative decrease of the error functional below which the iteration stops.",
    envvar="VISCOFIT_TOL_F",
    rich_help_panel="Identification",
)
MAX_ITER: int = typer.Option(
    constants.LM_MAX_ITER,
    "--max-iter",
    help="Maximum number of Levenberg-Marquardt iterations.",
    envvar="VISCOFIT_MAX_ITER",
    rich_help_panel="Identification",
)

# --- Monte Carlo ---
INSTANCES: int = typer.Option(
    constants.N_NOISE,
    "--instances",
    help="Number of noisy data instances.",
    envvar="VISCOFIT_INSTANCES",
    rich_help_panel="Monte Carlo",
)
WORKERS: int = typer.Option(
    1,
    "--workers",
    help="Worker processes; results do not depend on this number.",
    envvar="VISCOFIT_WORKERS",
    rich_help_panel="Monte Carlo",
)
CHUNK_SIZE: int = typer.Option(
    constants.MC_CHUNK_SIZE,
    "--chunk-size",
    help="Cloud members integrated together as one batch.",
    envvar="VISCOFIT_CHUNK_SIZE",
    rich_help_panel="Monte Carlo",
)
NONLINEAR: bool = typer.Option(
    False,  # noqa: FBT003
    "--nonlinear/--linear",
    help="Re-identify each instance with the full model instead of the closed form (slow).",
    envvar="VISCOFIT_NONLINEAR",
    rich_help_panel="Monte Carlo",
)
PARAMS: Path | None = typer.Option(
    None,
    "--params",
    help="Parameter file of the base solution p*. Default: the hardening parameters given as options.",
    envvar="VISCOFIT_PARAMS",
    rich_help_panel="Monte Carlo",
)
DATA: Path | None = typer.Option(
    None,
    "--data",
    help="Data file whose stresses are noised. Default: the model response at p*.",
    envvar="VISCOFIT_DATA",
    rich_help_panel="Monte Carlo",
)

# --- Metric ---
HISTORY: list[int] | None = typer.Option(
    None,
    "--history",
    help="Benchmark history (1 or 2) for the mechanics distance; repeat for both. Default: 1 and 2.",
    envvar="VISCOFIT_HISTORY",
    rich_help_panel="Metric",
)
METRIC_DURATION: float = typer.Option(
    constants.METRIC_DURATION,
    "--metric-duration",
    help="Physical duration in s of the benchmark cycle.",
    envvar="VISCOFIT_METRIC_DURATION",
    rich_help_panel="Metric",
)
METRIC_STEPS: int = typer.Option(
    constants.METRIC_STEPS,
    "--metric-steps",
    help="Time steps of the benchmark cycle.",
    envvar="VISCOFIT_METRIC_STEPS",
    rich_help_panel="Metric",
)
REFERENCE: Path | None = typer.Option(
    None,
    "--reference",
    help="Parameter file used to make the Euclidean distance non-dimensional. Default: the hardening options.",
    envvar="VISCOFIT_REFERENCE",
    rich_help_panel="Metric",
)

# --- Simulation ---
WITH_NOISE: bool = typer.Option(
    False,  # noqa: FBT003
    "--with-noise",
    help="Add one sampled noise instance to the synthetic stresses.",
    envvar="VISCOFIT_WITH_NOISE",
    rich_help_panel="Simulation",
)

# --- General Options ---


def _conf_callback(ctx: typer.Context, param: typer.CallbackParam, value: str) -> str:  # noqa: ARG001
    from viscofit.cli import set_config_defaults  # noqa: PLC0415

    set_config_defaults(ctx, value)
    return value


CONFIG_FILE: str | None = typer.Option(
    None,
    "--config",
    help="Path to a TOML configuration file.",
    is_eager=True,
    callback=_conf_callback,
    rich_help_panel="General Options",
)
PRINT_ARGS: bool = typer.Option(
    False,  # noqa: FBT003
    "--print-args",
    help="Print the command line arguments, including variables taken from the configuration file.",
    is_eager=True,
    rich_help_panel="General Options",
)
OUT: Path = typer.Option(
    Path("viscofit-out"),
    "--out",
    help="Directory for all output files.",
    envvar="VISCOFIT_OUT",
    rich_help_panel="General Options",
)
LOG_LEVEL: str = typer.Option(
    "WARNING",
    "--log-level",
    help="Set logging level.",
    case_sensitive=False,
    envvar="VISCOFIT_LOG_LEVEL",
    rich_help_panel="General Options",
)
LOG_FILE: str | None = typer.Option(
    None,
    "--log-file",
    help="Path to a file to write logs to.",
    rich_help_panel="General Options",
)
QUIET: bool = typer.Option(
    False,  # noqa: FBT003
    "-q",
    "--quiet",
    help="Suppress console output from rich.",
    rich_help_panel="General Options",
)
