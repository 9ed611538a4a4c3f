"""Pydantic models for viscofit configurations, aligned with CLI option groups."""

from __future__ import annotations

import tomllib
from pathlib import Path
from typing import TYPE_CHECKING, Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from viscofit import constants
from viscofit.core.errors import ConfigError

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping, Sequence

    import numpy.typing as npt

CONFIG_PATHS = [
    Path("viscofit-config.toml"),
    Path.home() / ".config" / "viscofit" / "config.toml",
]

HARDENING_FIELDS = ("gamma", "beta", "c1", "c2", "kappa1", "kappa2")

WeightingKind = Literal["identity", "diag_inv_cov", "full_inv_cov"]
WEIGHTING_KINDS: tuple[WeightingKind, ...] = ("identity", "diag_inv_cov", "full_inv_cov")
_WEIGHTING_ALIASES = {
    "diag_inverse_cov": "diag_inv_cov",
    "full_inverse_cov": "full_inv_cov",
}


class _Strict(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)


# --- Panel: Hardening Parameters ---


class HardeningParams(_Strict):
    """Identified hardening parameters, in the fixed order (γ, β, c₁, c₂, ϰ₁, ϰ₂)."""

    gamma: float = Field(constants.HARDENING_FULL_INV_COV[0], ge=0.0)
    beta: float = Field(constants.HARDENING_FULL_INV_COV[1], ge=0.0)
    c1: float = Field(constants.HARDENING_FULL_INV_COV[2], ge=0.0)
    c2: float = Field(constants.HARDENING_FULL_INV_COV[3], ge=0.0)
    kappa1: float = Field(constants.HARDENING_FULL_INV_COV[4], ge=0.0)
    kappa2: float = Field(constants.HARDENING_FULL_INV_COV[5], ge=0.0)

    def as_array(self) -> npt.NDArray[np.float64]:
        """Return the parameter vector p."""
        return np.array([getattr(self, name) for name in HARDENING_FIELDS])

    @classmethod
    def from_array(cls, values: Sequence[float] | npt.NDArray[np.float64]) -> HardeningParams:
        """Build from a vector in the fixed order."""
        values = np.asarray(values, dtype=float)
        if values.shape != (len(HARDENING_FIELDS),):
            msg = f"Expected {len(HARDENING_FIELDS)} hardening values, got shape {values.shape}."
            raise ValueError(msg)
        return cls(**{name: float(v) for name, v in zip(HARDENING_FIELDS, values, strict=True)})

    def scaled(self, factor: float | Sequence[float]) -> HardeningParams:
        """Componentwise scaling."""
        return HardeningParams.from_array(self.as_array() * np.asarray(factor, dtype=float))


# --- Panel: Material Parameters ---


class MaterialParams(_Strict):
    """Pre-identified elastic and viscous parameters plus the hardening record."""

    k: float = Field(constants.BULK_MODULUS, gt=0.0)
    mu: float = Field(constants.SHEAR_MODULUS, gt=0.0)
    eta: float = Field(constants.VISCOSITY, gt=0.0)
    m: float = Field(constants.STRESS_EXPONENT, ge=1.0)
    K: float = Field(constants.YIELD_STRESS, gt=0.0)
    k0: float = Field(constants.OVERSTRESS_NORMALIZER, gt=0.0)
    hardening: HardeningParams = HardeningParams()

    def with_hardening(self, hardening: HardeningParams) -> MaterialParams:
        """Return a copy carrying other hardening parameters."""
        return self.model_copy(update={"hardening": hardening})


# --- Panel: Noise Model ---


class NoiseModel(_Strict):
    """Stochastic description of the measurement error (all σ in MPa)."""

    kind: Literal["white", "ar", "two_source"] = "two_source"
    sigma: float = Field(constants.SIGMA_UNCORRELATED, ge=0.0)
    alpha: float = Field(0.0, ge=0.0, lt=1.0)
    sigma1: float = Field(constants.SIGMA_UNCORRELATED, ge=0.0)
    sigma2: float = Field(constants.SIGMA_CORRELATED, ge=0.0)

    @classmethod
    def white(cls, sigma: float) -> NoiseModel:
        """Independent normal errors."""
        return cls(kind="white", sigma=sigma)

    @classmethod
    def ar(cls, alpha: float, sigma: float) -> NoiseModel:
        """First-order autoregressive errors."""
        return cls(kind="ar", alpha=alpha, sigma=sigma)

    @classmethod
    def two_source(cls, sigma1: float, sigma2: float) -> NoiseModel:
        """White noise plus a correlated term proportional to the signal."""
        return cls(kind="two_source", sigma1=sigma1, sigma2=sigma2)


# --- Panel: Strain Program ---


class ProgramConfig(_Strict):
    """Synthetic non-monotonic torsion experiment."""

    reversals: tuple[float, ...] = constants.TORSION_REVERSALS
    max_shear: float = Field(constants.TORSION_MAX_SHEAR, gt=0.0)
    n_points: int = Field(constants.TORSION_POINTS, ge=2)
    duration: float = Field(constants.TORSION_DURATION, gt=0.0)
    substeps: int = Field(constants.TORSION_SUBSTEPS, ge=1)


# --- Panel: Metric ---


class MetricConfig(_Strict):
    """Deformation histories used by the mechanics-based distance."""

    histories: tuple[int, ...] = constants.METRIC_HISTORIES
    duration: float = Field(constants.METRIC_DURATION, gt=0.0)
    n_steps: int = Field(constants.METRIC_STEPS, ge=1)

    @field_validator("histories")
    @classmethod
    def _known_histories(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        if not v:
            msg = "At least one history is required."
            raise ValueError(msg)
        unknown = sorted(set(v) - {1, 2})
        if unknown:
            msg = f"Unknown history id(s) {unknown}; allowed are 1 and 2."
            raise ValueError(msg)
        return tuple(dict.fromkeys(v))


# --- Panel: Identification ---


class FitOptions(_Strict):
    """Levenberg-Marquardt and finite-difference settings."""

    rel_step: float = Field(constants.FD_REL_STEP, gt=0.0)
    abs_step: float = Field(constants.FD_ABS_STEP, gt=0.0)
    tol_g: float = Field(constants.LM_TOL_G, gt=0.0)
    tol_f: float = Field(constants.LM_TOL_F, gt=0.0)
    max_iter: int = Field(constants.LM_MAX_ITER, ge=1)
    lambda0: float = Field(constants.LM_LAMBDA0, gt=0.0)


# --- Panel: Monte Carlo ---


class MonteCarloConfig(_Strict):
    """Size and reproducibility of the parameter cloud."""

    n_instances: int = Field(constants.N_NOISE, ge=1)
    master_seed: int = Field(0, ge=0)
    workers: int = Field(1, ge=1)
    chunk_size: int = Field(constants.MC_CHUNK_SIZE, ge=1)
    nonlinear: bool = False


# --- Panel: General Options ---


class General(_Strict):
    """General configuration parameters for logging and I/O."""

    log_level: str = "WARNING"
    log_file: str | None = None
    quiet: bool = False
    output_dir: Path = Path("viscofit-out")

    @field_validator("output_dir", mode="before")
    @classmethod
    def _expand_user_path(cls, v: str | Path) -> Path:
        return Path(v).expanduser()


class RunConfig(_Strict):
    """Everything a run needs; re-validated on every load."""

    material: MaterialParams = MaterialParams()
    truth_hardening: HardeningParams = HardeningParams()
    program: ProgramConfig = ProgramConfig()
    noise: NoiseModel = NoiseModel()
    scheme: WeightingKind = "full_inv_cov"
    metric: MetricConfig = MetricConfig()
    fit: FitOptions = FitOptions()
    montecarlo: MonteCarloConfig = MonteCarloConfig()
    general: General = General()


def normalize_weighting(name: str) -> str:
    """Map the long weighting aliases onto the short names."""
    key = name.strip().lower().replace("-", "_")
    return _WEIGHTING_ALIASES.get(key, key)


def build(model: type[BaseModel], **values: Any) -> Any:
    """Validate ``values`` into ``model`` and turn failures into a ConfigError with field paths."""
    try:
        return model(**values)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        msg = f"Invalid {model.__name__}: {problems}"
        raise ConfigError(msg) from e


def _config_path(config_path_str: str | None = None) -> Path | None:
    if config_path_str:
        return Path(config_path_str)
    return next((p for p in CONFIG_PATHS if p.exists()), None)


def load_config(config_path_str: str | None = None) -> dict[str, Any]:
    """Load the TOML configuration file and normalize dashed keys."""
    config_path = _config_path(config_path_str)
    if config_path is None:
        return {}
    if not config_path.exists():
        msg = f"Config file not found at {config_path_str}"
        raise ConfigError(msg)
    with config_path.open("rb") as f:
        try:
            cfg = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            msg = f"Cannot parse {config_path}: {e}"
            raise ConfigError(msg) from e
    for section, values in cfg.items():
        if not isinstance(values, dict):
            msg = f"Top-level key '{section}' must be a table such as [defaults] or [identify]."
            raise ConfigError(msg)
    return {k: _replace_dashed_keys(v) for k, v in cfg.items()}


def _replace_dashed_keys(cfg: dict[str, Any]) -> dict[str, Any]:
    return {k.replace("-", "_"): v for k, v in cfg.items()}


def check_config_keys(
    config: Mapping[str, Mapping[str, Any]],
    known: Mapping[str, Iterable[str]],
) -> None:
    """Reject sections and keys that no command understands.

    ``known`` maps each command name to its option names.
    """
    every_option = set().union(*(set(v) for v in known.values())) if known else set()
    for section, values in config.items():
        if section == "defaults":
            allowed = every_option
        elif section in known:
            allowed = set(known[section])
        else:
            msg = f"Unknown config section [{section}]."
            raise ConfigError(msg)
        for key in values:
            if key not in allowed:
                msg = f"Unknown config key '{section}.{key}'."
                raise ConfigError(msg)
