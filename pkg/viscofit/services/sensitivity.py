"""Noise sensitivity of identified parameters by linearized Monte Carlo re-identification."""

from __future__ import annotations

import logging
import multiprocessing
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from scipy import linalg

from viscofit import constants
from viscofit.config import FitOptions, HardeningParams
from viscofit.core.errors import (
    DimensionMismatchError,
    NonConvergenceError,
    NonFiniteJacobianError,
    SingularNormalMatrixError,
    ZeroReferenceParameterError,
)
from viscofit.services import identification, metric, noise

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping

    import numpy.typing as npt

    from viscofit.config import MaterialParams, NoiseModel
    from viscofit.services.identification import FitResult, WeightingScheme
    from viscofit.services.loading import StrainProgram
    from viscofit.services.metric import MetricSpec

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinearizedModel:
    """First-order expansion Mod(p) ≈ Mod(p*) + J·(p − p*)."""

    p_star: HardeningParams
    mod_star: npt.NDArray[np.float64]
    jacobian: npt.NDArray[np.float64] = field(repr=False)

    def __post_init__(self) -> None:
        n = self.mod_star.shape[0]
        if self.jacobian.shape != (n, identification.N_PARAMS):
            msg = f"Jacobian shape {self.jacobian.shape} does not match {n} observations."
            raise DimensionMismatchError(msg)
        if not np.all(np.isfinite(self.jacobian)):
            msg = "The Jacobian of the linearized model is not finite."
            raise NonFiniteJacobianError(msg)

    @property
    def n(self) -> int:
        return int(self.mod_star.shape[0])

    def response(self, p: HardeningParams | npt.ArrayLike) -> npt.NDArray[np.float64]:
        """Linearized model response at p."""
        vector = p.as_array() if isinstance(p, HardeningParams) else np.asarray(p, dtype=float)
        return self.mod_star + self.jacobian @ (vector - self.p_star.as_array())


def linearize_at(
    p: HardeningParams,
    fixed: MaterialParams,
    program: StrainProgram,
    opts: FitOptions | None = None,
) -> LinearizedModel:
    """Expand the model around an arbitrary parameter set (e.g. the synthetic truth)."""
    opts = opts or FitOptions()
    mod, jac = identification.response_and_jacobian(p.as_array(), fixed, program, opts.rel_step, opts.abs_step)
    return LinearizedModel(p, mod, jac)


def linearize(
    fit: FitResult,
    fixed: MaterialParams,
    program: StrainProgram,
    opts: FitOptions | None = None,
) -> LinearizedModel:
    """Expand the model around a converged fit."""
    if not fit.converged:
        msg = f"Cannot linearize around an unconverged fit ({fit.message})."
        raise NonConvergenceError(msg)
    return linearize_at(fit.params, fixed, program, opts)


class NormalEquations:
    """Factorized normal matrix JᵀWJ for repeated closed-form solves.

    The matrix is equilibrated to unit diagonal before the condition check so
    that parameter units do not matter.
    """

    def __init__(self, lin: LinearizedModel, scheme: WeightingScheme) -> None:
        if scheme.n != lin.n:
            msg = f"A {scheme.n}x{scheme.n} weighting does not fit {lin.n} observations."
            raise DimensionMismatchError(msg)
        self.lin = lin
        self.wj = scheme.apply(lin.jacobian)
        normal = lin.jacobian.T @ self.wj
        diagonal = np.diag(normal)
        if np.any(diagonal <= 0.0):
            invisible = [identification.HARDENING_FIELDS[i] for i in np.flatnonzero(diagonal <= 0.0)]
            msg = f"Parameters {invisible} do not influence the response; JᵀWJ is singular."
            raise SingularNormalMatrixError(msg)
        self._scale = np.sqrt(diagonal)
        equilibrated = normal / np.outer(self._scale, self._scale)
        condition = np.linalg.cond(equilibrated)
        if not condition < constants.CONDITION_LIMIT:
            msg = f"JᵀWJ is too ill-conditioned (condition {condition:.3e})."
            raise SingularNormalMatrixError(msg)
        try:
            self._factor = linalg.cho_factor(equilibrated)
        except linalg.LinAlgError as e:
            msg = "JᵀWJ is not positive definite."
            raise SingularNormalMatrixError(msg) from e
        LOGGER.debug("Equilibrated normal matrix condition: %.3e", condition)

    def solve(self, rhs: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        """(JᵀWJ)⁻¹·rhs for a vector or a (6, B) matrix."""
        scale = self._scale.reshape(-1, *([1] * (rhs.ndim - 1)))
        return linalg.cho_solve(self._factor, rhs / scale) / scale

    def reidentify(self, exp: npt.ArrayLike, noises: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        """Closed-form parameters for each row of ``noises``, shape (B, 6)."""
        exp = np.asarray(exp, dtype=float)
        offsets = exp[None, :] + noises - self.lin.mod_star[None, :]
        delta = self.solve(self.wj.T @ offsets.T)
        return self.lin.p_star.as_array()[None, :] + delta.T


def reidentify_linear(
    lin: LinearizedModel,
    scheme: WeightingScheme,
    exp: npt.ArrayLike,
    noise_vector: npt.ArrayLike,
) -> npt.NDArray[np.float64]:
    """Minimizer of the linearized weighted problem for data ``exp + noise``.

    Evaluated as p* + (JᵀWJ)⁻¹JᵀW(Exp + Noise − Mod(p*)); the result is the raw
    vector and may leave the non-negative cone.
    """
    noises = np.atleast_2d(np.asarray(noise_vector, dtype=float))
    return NormalEquations(lin, scheme).reidentify(exp, noises)[0]


def reidentify_linear_batch(
    lin: LinearizedModel,
    scheme: WeightingScheme,
    exp: npt.ArrayLike,
    noises: npt.ArrayLike,
) -> npt.NDArray[np.float64]:
    """Closed-form re-identification for every row of ``noises`` with one factorization."""
    return NormalEquations(lin, scheme).reidentify(exp, np.atleast_2d(np.asarray(noises, dtype=float)))


def normalized_variances(
    cloud: npt.ArrayLike,
    p_star: HardeningParams | npt.ArrayLike,
) -> npt.NDArray[np.float64]:
    """Variance of pᵢ/pᵢ* over the cloud per component, divisor n."""
    ref = p_star.as_array() if isinstance(p_star, HardeningParams) else np.asarray(p_star, dtype=float)
    if np.any(ref == 0.0):
        msg = "Normalized variances need nonzero reference parameters."
        raise ZeroReferenceParameterError(msg)
    ratios = np.atleast_2d(np.asarray(cloud, dtype=float)) / ref
    return np.var(ratios - ratios[0], axis=0)


@dataclass(frozen=True)
class NonlinearPath:
    """Settings for full re-identification of every noisy instance."""

    fixed: MaterialParams
    program: StrainProgram
    opts: FitOptions = field(default_factory=FitOptions)


@dataclass(frozen=True)
class CloudReport:
    """Monte Carlo parameter cloud and its statistics."""

    scheme: str
    seed: int
    p_star: HardeningParams
    cloud: npt.NDArray[np.float64] = field(repr=False)
    size_per_history: dict[int, float]
    variances: npt.NDArray[np.float64]

    @property
    def admissible(self) -> npt.NDArray[np.bool_]:
        """Members with every component non-negative."""
        return np.all(self.cloud >= 0.0, axis=1)

    @property
    def n_instances(self) -> int:
        return int(self.cloud.shape[0])


def _nonlinear_chunk(
    args: tuple[NonlinearPath, WeightingScheme, npt.NDArray[np.float64], npt.NDArray[np.float64], npt.NDArray[np.float64]],
) -> npt.NDArray[np.float64]:
    path, scheme, start, exp, noises = args

    def evaluate(x: npt.NDArray[np.float64]) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
        return identification.response_and_jacobian(
            x, path.fixed, path.program, path.opts.rel_step, path.opts.abs_step
        )

    rows = []
    for row in noises:
        result = identification.lm_minimize(evaluate, exp + row, scheme, start, path.opts, nonnegative=False)
        if not result.converged:
            LOGGER.warning("Nonlinear re-identification did not converge: %s", result.message)
        rows.append(result.x)
    return np.array(rows)


def generate_cloud(
    lin: LinearizedModel,
    scheme: WeightingScheme,
    noise_model: NoiseModel,
    exp: npt.ArrayLike,
    n_instances: int,
    master_seed: int,
    *,
    chunk_size: int = constants.MC_CHUNK_SIZE,
    workers: int = 1,
    nonlinear: NonlinearPath | None = None,
) -> npt.NDArray[np.float64]:
    """Re-identified parameter vectors, one row per noisy instance."""
    if n_instances < 1:
        msg = f"n_instances must be at least 1, got {n_instances}."
        raise ValueError(msg)
    exp = np.asarray(exp, dtype=float)
    ranges = [range(s, min(s + chunk_size, n_instances)) for s in range(0, n_instances, chunk_size)]
    if nonlinear is None:
        solver = NormalEquations(lin, scheme)
        parts = [solver.reidentify(exp, noise.sample_noise_batch(noise_model, exp, master_seed, r)) for r in ranges]
        return np.vstack(parts)
    tasks = [
        (nonlinear, scheme, lin.p_star.as_array(), exp, noise.sample_noise_batch(noise_model, exp, master_seed, r))
        for r in ranges
    ]
    if workers > 1 and len(tasks) > 1:
        with multiprocessing.Pool(processes=workers) as pool:
            parts = pool.map(_nonlinear_chunk, tasks)
    else:
        parts = [_nonlinear_chunk(task) for task in tasks]
    return np.vstack(parts)


def monte_carlo_cloud(
    lin: LinearizedModel,
    scheme: WeightingScheme,
    noise_model: NoiseModel,
    exp: npt.ArrayLike,
    n_instances: int,
    master_seed: int,
    *,
    specs: Mapping[int, MetricSpec] | None = None,
    chunk_size: int = constants.MC_CHUNK_SIZE,
    workers: int = 1,
    nonlinear: NonlinearPath | None = None,
) -> CloudReport:
    """Sample noise, re-identify every instance and summarize the cloud.

    ``specs`` maps history ids to mechanics metrics for the Size statistic.
    """
    LOGGER.info("Monte Carlo: %d instances, %s weighting, seed %d", n_instances, scheme.kind, master_seed)
    cloud = generate_cloud(
        lin,
        scheme,
        noise_model,
        exp,
        n_instances,
        master_seed,
        chunk_size=chunk_size,
        workers=workers,
        nonlinear=nonlinear,
    )
    inadmissible = int(np.sum(~np.all(cloud >= 0.0, axis=1)))
    if inadmissible:
        LOGGER.info("%d of %d cloud members leave the non-negative cone", inadmissible, n_instances)
    sizes = {
        which: metric.cloud_size(lin.p_star, cloud, spec, chunk_size=chunk_size, workers=workers)
        for which, spec in (specs or {}).items()
    }
    return CloudReport(
        scheme=scheme.kind,
        seed=master_seed,
        p_star=lin.p_star,
        cloud=cloud,
        size_per_history=sizes,
        variances=normalized_variances(cloud, lin.p_star),
    )


def _collapsed_report(
    kind: str,
    p_star: HardeningParams,
    n_instances: int,
    master_seed: int,
    specs: Mapping[int, MetricSpec] | None,
) -> CloudReport:
    return CloudReport(
        scheme=kind,
        seed=master_seed,
        p_star=p_star,
        cloud=np.tile(p_star.as_array(), (n_instances, 1)),
        size_per_history=dict.fromkeys(specs or {}, 0.0),
        variances=np.zeros(identification.N_PARAMS),
    )


def compare_schemes(
    lin: LinearizedModel,
    noise_model: NoiseModel,
    exp: npt.ArrayLike,
    kinds: Iterable[str],
    n_instances: int,
    master_seed: int,
    *,
    specs: Mapping[int, MetricSpec] | None = None,
    chunk_size: int = constants.MC_CHUNK_SIZE,
    workers: int = 1,
    nonlinear: NonlinearPath | None = None,
) -> dict[str, CloudReport]:
    """Run the same noise draws under each weighting built from the noise covariance.

    Without noise every instance re-identifies to p*, whatever the weighting.
    """
    cov = noise.covariance(noise_model, exp)
    if not np.any(cov):
        LOGGER.info("The noise covariance vanishes; every cloud collapses to p*")
        return {kind: _collapsed_report(kind, lin.p_star, n_instances, master_seed, specs) for kind in kinds}
    reports = {}
    for kind in kinds:
        scheme = identification.WeightingScheme.from_covariance(kind, cov)
        reports[kind] = monte_carlo_cloud(
            lin,
            scheme,
            noise_model,
            exp,
            n_instances,
            master_seed,
            specs=specs,
            chunk_size=chunk_size,
            workers=workers,
            nonlinear=nonlinear,
        )
    return reports
