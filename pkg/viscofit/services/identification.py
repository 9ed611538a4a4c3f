"""Weighted least-squares identification of the hardening parameters."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Literal

import numpy as np
from scipy import linalg

from viscofit import constants
from viscofit.config import HARDENING_FIELDS, FitOptions, HardeningParams
from viscofit.core.errors import (
    DegenerateDataError,
    DimensionMismatchError,
    FactorizationFailureError,
    NonFiniteJacobianError,
    NonFiniteResidualError,
)
from viscofit.services import constitutive
from viscofit.services.loading import simple_shear

if TYPE_CHECKING:
    from collections.abc import Callable

    import numpy.typing as npt

    from viscofit.config import MaterialParams
    from viscofit.core.run_logger import IterationLogger
    from viscofit.services.loading import StrainProgram

LOGGER = logging.getLogger(__name__)

N_PARAMS = len(HARDENING_FIELDS)
SchemeKind = Literal["identity", "diag_inv_cov", "full_inv_cov", "custom"]


@dataclass(frozen=True)
class ExperimentData:
    """Measured (or synthetic) shear stresses at the program's shear strains."""

    observations: npt.NDArray[np.float64]
    abscissae: npt.NDArray[np.float64]
    provenance: Literal["synthetic", "file"] = "synthetic"

    def __post_init__(self) -> None:
        obs = np.asarray(self.observations, dtype=float)
        absc = np.asarray(self.abscissae, dtype=float)
        if obs.ndim != 1 or obs.shape != absc.shape:
            msg = f"Observations {obs.shape} and strains {absc.shape} must be equal-length vectors."
            raise DimensionMismatchError(msg)
        if obs.size < 2:
            msg = f"At least two observations are required, got {obs.size}."
            raise DegenerateDataError(msg)
        if not (np.all(np.isfinite(obs)) and np.all(np.isfinite(absc))):
            msg = "Experimental data contains non-finite values."
            raise DegenerateDataError(msg)
        object.__setattr__(self, "observations", obs)
        object.__setattr__(self, "abscissae", absc)

    @property
    def n(self) -> int:
        return int(self.observations.size)

    def require_identifiable(self, n_params: int = N_PARAMS) -> None:
        """Raise unless there are more observations than parameters."""
        if self.n <= n_params:
            msg = f"Identification of {n_params} parameters needs more than {n_params} observations, got {self.n}."
            raise DegenerateDataError(msg)


@dataclass(frozen=True)
class WeightingScheme:
    """Symmetric positive definite weighting W of the residual.

    Identity and diagonal kinds keep only their diagonal; the dense matrix is
    built on first access.
    """

    kind: SchemeKind
    n: int
    diagonal: npt.NDArray[np.float64] | None = None
    dense: npt.NDArray[np.float64] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.kind in ("full_inv_cov", "custom"):
            w = np.asarray(self.dense, dtype=float)
            if w.shape != (self.n, self.n):
                msg = f"Weighting matrix must be {self.n}x{self.n}, got {w.shape}."
                raise DimensionMismatchError(msg)
            _check_spd(w)
        elif self.kind == "diag_inv_cov":
            d = np.asarray(self.diagonal, dtype=float)
            if d.shape != (self.n,):
                msg = f"Weighting diagonal must have {self.n} entries, got {d.shape}."
                raise DimensionMismatchError(msg)
            if not np.all(d > 0.0) or not np.all(np.isfinite(d)):
                msg = "Diagonal weights must be positive and finite."
                raise FactorizationFailureError(msg)

    @classmethod
    def identity(cls, n: int) -> WeightingScheme:
        return cls("identity", n)

    @classmethod
    def custom(cls, matrix: npt.ArrayLike) -> WeightingScheme:
        w = np.asarray(matrix, dtype=float)
        return cls("custom", w.shape[0], dense=w)

    @classmethod
    def from_covariance(cls, kind: str, cov: npt.ArrayLike) -> WeightingScheme:
        """Identity, W = diag(1/Covᵢᵢ) or W = Cov⁻¹."""
        cov = np.asarray(cov, dtype=float)
        n = cov.shape[0]
        if kind == "identity":
            return cls.identity(n)
        if kind == "diag_inv_cov":
            return cls("diag_inv_cov", n, diagonal=1.0 / np.diag(cov))
        if kind == "full_inv_cov":
            try:
                factor = linalg.cho_factor(cov)
            except linalg.LinAlgError as e:
                msg = "The covariance matrix is not positive definite; W = Cov⁻¹ is undefined."
                raise FactorizationFailureError(msg) from e
            w = linalg.cho_solve(factor, np.eye(n))
            return cls("full_inv_cov", n, dense=0.5 * (w + w.T))
        msg = f"Unknown weighting kind '{kind}'."
        raise ValueError(msg)

    @property
    def is_diagonal(self) -> bool:
        return self.kind in ("identity", "diag_inv_cov")

    @cached_property
    def matrix(self) -> npt.NDArray[np.float64]:
        if self.kind == "identity":
            return np.eye(self.n)
        if self.kind == "diag_inv_cov":
            return np.diag(self.diagonal)
        return np.asarray(self.dense, dtype=float)

    @cached_property
    def factor(self) -> npt.NDArray[np.float64]:
        """Symmetric root M of W (MᵀM = W); a vector of square roots for diagonal kinds."""
        if self.kind == "identity":
            return np.ones(self.n)
        if self.kind == "diag_inv_cov":
            return np.sqrt(self.diagonal)
        eigenvalues, vectors = linalg.eigh(self.matrix)
        if eigenvalues[0] <= 0.0:
            msg = f"Weighting matrix is not positive definite (smallest eigenvalue {eigenvalues[0]:.3e})."
            raise FactorizationFailureError(msg)
        return (vectors * np.sqrt(eigenvalues)) @ vectors.T

    def apply(self, x: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        """W·x for a vector or a matrix with N rows."""
        x = np.asarray(x, dtype=float)
        if x.shape[0] != self.n:
            msg = f"Expected {self.n} rows, got {x.shape[0]}."
            raise DimensionMismatchError(msg)
        if self.kind == "identity":
            return x
        if self.kind == "diag_inv_cov":
            return self.diagonal.reshape(-1, *([1] * (x.ndim - 1))) * x
        return self.matrix @ x


def _check_spd(w: npt.NDArray[np.float64]) -> None:
    if not np.all(np.isfinite(w)):
        msg = "Weighting matrix contains non-finite entries."
        raise FactorizationFailureError(msg)
    scale = max(float(np.max(np.abs(w))), np.finfo(float).tiny)
    if np.max(np.abs(w - w.T)) > 1e-10 * scale:
        msg = "Weighting matrix is not symmetric."
        raise FactorizationFailureError(msg)
    try:
        linalg.cholesky(w)
    except linalg.LinAlgError as e:
        msg = "Weighting matrix is not positive definite."
        raise FactorizationFailureError(msg) from e


@dataclass(frozen=True)
class FitResult:
    """Outcome of a weighted least-squares fit."""

    params: HardeningParams
    phi: float
    iterations: int
    jacobian: npt.NDArray[np.float64]
    converged: bool
    response: npt.NDArray[np.float64]
    message: str = ""

    @property
    def rms(self) -> float:
        """Root mean square of the whitened residual."""
        return float(np.sqrt(self.phi / self.response.size))


# --- Model response ---


def model_response_batch(
    hardening: npt.ArrayLike,
    fixed: MaterialParams,
    program: StrainProgram,
) -> npt.NDArray[np.float64]:
    """Cauchy shear stress T₁₂ at every observation point, one row per hardening vector."""
    h = np.atleast_2d(np.asarray(hardening, dtype=float))
    if h.shape[1] != N_PARAMS:
        msg = f"Hardening matrix must have {N_PARAMS} columns, got {h.shape[1]}."
        raise DimensionMismatchError(msg)
    times, shears, observed = program.integration_grid()
    columns = {int(k): i for i, k in enumerate(observed)}
    out = np.empty((h.shape[0], program.n_points))
    for k, step in enumerate(constitutive.drive(list(simple_shear(shears)), times, fixed, h)):
        if k in columns:
            out[:, columns[k]] = step.cauchy[..., 0, 1]
    return out


def model_response(
    p: HardeningParams | npt.ArrayLike,
    fixed: MaterialParams,
    program: StrainProgram,
) -> npt.NDArray[np.float64]:
    """Cauchy shear stress T₁₂ at every observation point."""
    vector = p.as_array() if isinstance(p, HardeningParams) else np.asarray(p, dtype=float)
    return model_response_batch(vector[None, :], fixed, program)[0]


def error_functional(resid: npt.ArrayLike, scheme: WeightingScheme) -> float:
    """Φ = rᵀ W r."""
    r = np.asarray(resid, dtype=float)
    if r.shape != (scheme.n,):
        msg = f"Residual of shape {r.shape} does not match a {scheme.n}x{scheme.n} weighting."
        raise DimensionMismatchError(msg)
    return float(r @ scheme.apply(r))


def whiten(resid: npt.ArrayLike, scheme: WeightingScheme) -> npt.NDArray[np.float64]:
    """W^{1/2}·r, whose squared norm equals the error functional."""
    r = np.asarray(resid, dtype=float)
    if r.shape != (scheme.n,):
        msg = f"Residual of shape {r.shape} does not match a {scheme.n}x{scheme.n} weighting."
        raise DimensionMismatchError(msg)
    root = scheme.factor
    return root * r if root.ndim == 1 else root @ r


# --- Jacobian ---


def fd_steps(p: npt.ArrayLike, rel_step: float, abs_step: float = constants.FD_ABS_STEP) -> npt.NDArray[np.float64]:
    """Per-parameter difference steps: relative, with an absolute floor."""
    return np.maximum(rel_step * np.abs(np.asarray(p, dtype=float)), abs_step)


def response_and_jacobian(
    p: npt.ArrayLike,
    fixed: MaterialParams,
    program: StrainProgram,
    rel_step: float = constants.FD_REL_STEP,
    abs_step: float = constants.FD_ABS_STEP,
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Model response and its central-difference Jacobian, from one batched integration."""
    p = np.asarray(p, dtype=float)
    h = fd_steps(p, rel_step, abs_step)
    shifts = np.diag(h)
    batch = np.vstack([p, p + shifts, p - shifts])
    rows = model_response_batch(batch, fixed, program)
    mod = rows[0]
    jac = ((rows[1 : 1 + N_PARAMS] - rows[1 + N_PARAMS :]) / (2.0 * h[:, None])).T
    if not np.all(np.isfinite(jac)):
        msg = "The finite-difference Jacobian contains non-finite entries."
        raise NonFiniteJacobianError(msg)
    return mod, jac


def jacobian_fd(
    p: HardeningParams | npt.ArrayLike,
    fixed: MaterialParams,
    program: StrainProgram,
    rel_step: float = constants.FD_REL_STEP,
    abs_step: float = constants.FD_ABS_STEP,
) -> npt.NDArray[np.float64]:
    """N×6 central-difference Jacobian ∂Mod/∂p, columns in the fixed parameter order."""
    vector = p.as_array() if isinstance(p, HardeningParams) else p
    return response_and_jacobian(vector, fixed, program, rel_step, abs_step)[1]


# --- Levenberg-Marquardt ---


@dataclass(frozen=True)
class MinimizeResult:
    """Raw result of :func:`lm_minimize`."""

    x: npt.NDArray[np.float64]
    phi: float
    iterations: int
    jacobian: npt.NDArray[np.float64]
    response: npt.NDArray[np.float64]
    converged: bool
    message: str


def _projected(g: npt.NDArray[np.float64], x: npt.NDArray[np.float64], nonnegative: bool) -> npt.NDArray[np.float64]:
    """Drop descent components that point out of x ≥ 0 at active bounds."""
    if not nonnegative:
        return g
    return np.where((x <= 0.0) & (g < 0.0), 0.0, g)


def lm_minimize(  # noqa: PLR0912, PLR0915
    evaluate: Callable[[npt.NDArray[np.float64]], tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]],
    exp: npt.NDArray[np.float64],
    scheme: WeightingScheme,
    x0: npt.ArrayLike,
    opts: FitOptions | None = None,
    *,
    nonnegative: bool = True,
    logger: IterationLogger | None = None,
) -> MinimizeResult:
    """Minimize (exp − mod(x))ᵀ W (exp − mod(x)) given ``evaluate(x) -> (mod, ∂mod/∂x)``.

    Marquardt damping A + λ·diag(A) with λ multiplied by ten on rejection and
    divided by ten on acceptance. With ``nonnegative`` every trial point is
    projected onto x ≥ 0 and the gradient test ignores active bounds. When λ
    saturates without an acceptable step the result only counts as converged
    if the Gauss-Newton predicted decrease is below ``tol_f``.
    """
    opts = opts or FitOptions()
    x = np.asarray(x0, dtype=float).copy()
    exp = np.asarray(exp, dtype=float)

    def residual_of(mod: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        r = exp - mod
        if not np.all(np.isfinite(r)):
            msg = "The model produced non-finite residuals."
            raise NonFiniteResidualError(msg)
        return r

    mod, jac = evaluate(x)
    r = residual_of(mod)
    phi = error_functional(r, scheme)
    phi_floor = 1e-20 * error_functional(exp, scheme)
    damping = opts.lambda0
    converged = False
    message = "maximum number of iterations reached"
    iteration = 0

    if phi <= phi_floor:
        converged, message = True, "residual vanishes at the start point"
    while not converged and iteration < opts.max_iter:
        wj = scheme.apply(jac)
        a = jac.T @ wj
        g = wj.T @ r
        scale = np.maximum(np.abs(x), opts.abs_step)
        if np.max(np.abs(scale * _projected(g, x, nonnegative))) <= opts.tol_g * max(phi, 1.0):
            converged, message = True, "gradient below tolerance"
            break
        iteration += 1
        diag = np.maximum(np.diag(a), np.finfo(float).eps * max(float(np.max(np.diag(a))), 1.0))
        trial, phi_t = x, np.inf
        try:
            delta = linalg.solve(a + damping * np.diag(diag), g, assume_a="sym")
        except linalg.LinAlgError:
            LOGGER.debug("Damped normal matrix is singular at lambda=%.1e", damping)
        else:
            trial = x + delta
            if nonnegative:
                trial = np.maximum(trial, 0.0)
            mod_t, jac_t = evaluate(trial)
            r_t = residual_of(mod_t)
            phi_t = error_functional(r_t, scheme)
        accepted = phi_t < phi
        if logger is not None:
            logger.log_iteration(
                iteration=iteration,
                phi=phi_t,
                damping=damping,
                accepted=accepted,
                params=trial,
            )
        LOGGER.debug("LM iteration %d: phi=%.6e lambda=%.1e accepted=%s", iteration, phi, damping, accepted)
        if accepted:
            decrease = (phi - phi_t) / phi
            x, mod, jac, r, phi = trial, mod_t, jac_t, r_t, phi_t
            damping /= constants.LM_LAMBDA_FACTOR
            if phi <= phi_floor:
                converged, message = True, "residual vanishes"
            elif decrease < opts.tol_f:
                converged, message = True, "relative decrease of phi below tolerance"
        else:
            damping *= constants.LM_LAMBDA_FACTOR
            if damping > constants.LM_LAMBDA_MAX:
                # Gauss-Newton model decrease gᵀA⁺g; a wrong Jacobian leaves it large.
                free_g = _projected(g, x, nonnegative)
                predicted = float(free_g @ linalg.lstsq(a, free_g)[0])
                if predicted <= opts.tol_f * phi:
                    converged, message = True, "predicted decrease below tolerance"
                else:
                    message = "damping saturated"
                    LOGGER.warning("LM damping saturated with a predicted decrease of %.3e", predicted)
                    break

    LOGGER.info("LM finished after %d iterations: phi=%.6e (%s)", iteration, phi, message)
    return MinimizeResult(x, float(phi), iteration, jac, mod, converged, message)


def levenberg_marquardt(
    start: HardeningParams,
    data: ExperimentData,
    scheme: WeightingScheme,
    fixed: MaterialParams,
    program: StrainProgram,
    opts: FitOptions | None = None,
    *,
    logger: IterationLogger | None = None,
) -> FitResult:
    """Identify the hardening parameters from ``data``.

    Returns the best point found; ``converged`` is False when the iteration
    budget ran out.
    """
    opts = opts or FitOptions()
    data.require_identifiable()
    if program.n_points != data.n or scheme.n != data.n:
        msg = f"{data.n} observations, {program.n_points} program points and a {scheme.n}x{scheme.n} weighting disagree."
        raise DimensionMismatchError(msg)
    LOGGER.info("Fitting %d observations with %s weighting", data.n, scheme.kind)

    def evaluate(x: npt.NDArray[np.float64]) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
        return response_and_jacobian(x, fixed, program, opts.rel_step, opts.abs_step)

    raw = lm_minimize(evaluate, data.observations, scheme, start.as_array(), opts, logger=logger)
    return FitResult(
        params=HardeningParams.from_array(raw.x),
        phi=raw.phi,
        iterations=raw.iterations,
        jacobian=raw.jacobian,
        converged=raw.converged,
        response=raw.response,
        message=raw.message,
    )
