"""Distances between hardening parameter sets.

Besides the Euclidean baselines, the mechanics-based distance compares the
Cauchy-stress responses of two parameter sets along a prescribed
deformation history and reports the largest discrepancy in MPa.
"""

from __future__ import annotations

import logging
import multiprocessing
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Literal

import numpy as np

from viscofit import constants
from viscofit.config import HardeningParams
from viscofit.core import tensor as tn
from viscofit.core.errors import ConfigError, InvalidTimeGridError, ZeroReferenceParameterError
from viscofit.services import constitutive
from viscofit.services.loading import DeformationHistory, benchmark_history

if TYPE_CHECKING:
    from collections.abc import Sequence

    import numpy.typing as npt

    from viscofit.config import MaterialParams, MetricConfig

LOGGER = logging.getLogger(__name__)

AXIOM_SLACK = 1e-9


def _vector(p: HardeningParams | npt.ArrayLike) -> npt.NDArray[np.float64]:
    return p.as_array() if isinstance(p, HardeningParams) else np.asarray(p, dtype=float)


def _matrix(ps: Sequence[HardeningParams] | npt.ArrayLike) -> npt.NDArray[np.float64]:
    if isinstance(ps, np.ndarray):
        return np.atleast_2d(ps.astype(float))
    return np.atleast_2d(np.array([_vector(p) for p in ps]))


@dataclass(frozen=True)
class MetricSpec:
    """Which distance to evaluate and what it needs."""

    kind: Literal["euclidean", "euclidean_nondim", "mechanics"]
    reference: HardeningParams | None = None
    history: DeformationHistory | None = field(default=None, repr=False)
    fixed: MaterialParams | None = field(default=None, repr=False)
    n_steps: int = constants.METRIC_STEPS
    duration: float = constants.METRIC_DURATION
    label: str = ""

    def __post_init__(self) -> None:
        if self.kind == "euclidean_nondim":
            if self.reference is None or np.any(self.reference.as_array() == 0.0):
                msg = "The non-dimensional distance needs a reference with nonzero components."
                raise ZeroReferenceParameterError(msg)
        elif self.kind == "mechanics":
            if self.history is None or self.fixed is None:
                msg = "The mechanics distance needs a deformation history and material parameters."
                raise ConfigError(msg)
            if self.n_steps < 1 or not self.duration > 0.0:
                msg = f"Invalid metric grid: {self.n_steps} steps over {self.duration} s."
                raise InvalidTimeGridError(msg)

    @classmethod
    def euclidean(cls) -> MetricSpec:
        return cls("euclidean")

    @classmethod
    def euclidean_nondim(cls, reference: HardeningParams) -> MetricSpec:
        return cls("euclidean_nondim", reference=reference)

    @classmethod
    def mechanics(
        cls,
        history: DeformationHistory,
        fixed: MaterialParams,
        n_steps: int = constants.METRIC_STEPS,
        duration: float = constants.METRIC_DURATION,
        label: str = "",
    ) -> MetricSpec:
        return cls("mechanics", history=history, fixed=fixed, n_steps=n_steps, duration=duration, label=label)

    def grid(self) -> tuple[npt.NDArray[np.float64], list[npt.NDArray[np.float64]]]:
        """Physical grid times and the deformation gradient at each of them."""
        times = np.linspace(0.0, self.duration, self.n_steps + 1)
        history = self.history.rescaled(self.duration)  # type: ignore[union-attr]
        return times, [history.sample(float(t)) for t in times]


def benchmark_specs(fixed: MaterialParams, metric: MetricConfig) -> dict[int, MetricSpec]:
    """Mechanics distances for the configured benchmark histories, keyed by history id."""
    return {
        which: MetricSpec.mechanics(
            benchmark_history(which),
            fixed,
            n_steps=metric.n_steps,
            duration=metric.duration,
            label=f"history {which}",
        )
        for which in metric.histories
    }


def dist_euclidean(p1: HardeningParams | npt.ArrayLike, p2: HardeningParams | npt.ArrayLike) -> float:
    """Plain Euclidean distance; mixes physical units, kept as a baseline."""
    return float(np.linalg.norm(_vector(p1) - _vector(p2)))


def dist_euclidean_nondim(
    p1: HardeningParams | npt.ArrayLike,
    p2: HardeningParams | npt.ArrayLike,
    ref: HardeningParams | npt.ArrayLike,
) -> float:
    """Euclidean distance of the differences divided componentwise by ``ref``."""
    r = _vector(ref)
    if np.any(r == 0.0):
        msg = "Reference parameters must all be nonzero."
        raise ZeroReferenceParameterError(msg)
    return float(np.linalg.norm((_vector(p1) - _vector(p2)) / r))


def stress_histories(
    params: Sequence[HardeningParams] | npt.ArrayLike,
    spec: MetricSpec,
) -> npt.NDArray[np.float64]:
    """Cauchy stress along the metric's history, shape (B, n_steps + 1, 3, 3)."""
    if spec.kind != "mechanics":
        msg = f"Stress histories need a mechanics metric, got '{spec.kind}'."
        raise ConfigError(msg)
    h = _matrix(params)
    times, gradients = spec.grid()
    out = np.empty((h.shape[0], len(times), 3, 3))
    for k, step in enumerate(constitutive.drive(gradients, times, spec.fixed, h)):
        out[:, k] = step.cauchy
    return out


def _max_discrepancy(a: npt.NDArray[np.float64], b: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    return np.max(tn.frobenius_norm(a - b), axis=-1)


def dist_mechanics(
    p1: HardeningParams | npt.ArrayLike,
    p2: HardeningParams | npt.ArrayLike,
    spec: MetricSpec,
) -> float:
    """Largest Frobenius norm of the Cauchy-stress difference over the history grid (MPa)."""
    stresses = stress_histories(np.vstack([_vector(p1), _vector(p2)]), spec)
    return float(_max_discrepancy(stresses[0], stresses[1]))


def distance(
    p1: HardeningParams | npt.ArrayLike,
    p2: HardeningParams | npt.ArrayLike,
    spec: MetricSpec,
) -> float:
    """Dispatch on ``spec.kind``."""
    if spec.kind == "euclidean":
        return dist_euclidean(p1, p2)
    if spec.kind == "euclidean_nondim":
        return dist_euclidean_nondim(p1, p2, spec.reference)
    return dist_mechanics(p1, p2, spec)


def _chunk_distances(
    args: tuple[MetricSpec, npt.NDArray[np.float64], npt.NDArray[np.float64]],
) -> npt.NDArray[np.float64]:
    spec, chunk, reference = args
    return _max_discrepancy(stress_histories(chunk, spec), reference[None])


def mechanics_distances(
    p_ref: HardeningParams | npt.ArrayLike,
    cloud: npt.ArrayLike,
    spec: MetricSpec,
    chunk_size: int = constants.MC_CHUNK_SIZE,
    workers: int = 1,
) -> npt.NDArray[np.float64]:
    """Mechanics distance of every cloud member to ``p_ref``.

    The cloud is split into fixed-size chunks integrated as batches; the result
    does not depend on ``workers``.
    """
    members = np.atleast_2d(np.asarray(cloud, dtype=float))
    reference = stress_histories(_vector(p_ref)[None], spec)[0]
    tasks = [
        (spec, members[start : start + chunk_size], reference)
        for start in range(0, len(members), chunk_size)
    ]
    if workers > 1 and len(tasks) > 1:
        with multiprocessing.Pool(processes=workers) as pool:
            parts = pool.map(_chunk_distances, tasks)
    else:
        parts = [_chunk_distances(task) for task in tasks]
    return np.concatenate(parts) if parts else np.empty(0)


def cloud_size(
    p_ref: HardeningParams | npt.ArrayLike,
    cloud: npt.ArrayLike,
    spec: MetricSpec,
    chunk_size: int = constants.MC_CHUNK_SIZE,
    workers: int = 1,
) -> float:
    """Mean mechanics distance of the cloud to ``p_ref`` (MPa)."""
    return float(np.mean(mechanics_distances(p_ref, cloud, spec, chunk_size, workers)))


def distance_matrix(
    samples: Sequence[HardeningParams] | npt.ArrayLike,
    spec: MetricSpec,
) -> npt.NDArray[np.float64]:
    """All pairwise distances."""
    h = _matrix(samples)
    if spec.kind == "mechanics":
        stresses = stress_histories(h, spec)
        return _max_discrepancy(stresses[:, None], stresses[None, :])
    return np.array([[distance(a, b, spec) for b in h] for a in h])


@dataclass(frozen=True)
class AxiomReport:
    """Findings of a metric-axiom check on a sample set."""

    n_samples: int
    min_distance: float
    max_asymmetry: float
    worst_triangle_excess: float
    separation_violations: tuple[tuple[int, int], ...]
    slack: float = AXIOM_SLACK

    @property
    def non_negative(self) -> bool:
        return self.min_distance >= -self.slack

    @property
    def symmetric(self) -> bool:
        return self.max_asymmetry <= self.slack

    @property
    def triangle(self) -> bool:
        return self.worst_triangle_excess <= self.slack

    @property
    def separation(self) -> bool:
        return not self.separation_violations

    @property
    def passed(self) -> bool:
        return self.non_negative and self.symmetric and self.triangle and self.separation


def check_metric_axioms(
    spec: MetricSpec,
    samples: Sequence[HardeningParams] | npt.ArrayLike,
    slack: float = AXIOM_SLACK,
) -> AxiomReport:
    """Evaluate non-negativity, separation, symmetry and the triangle inequality.

    Violations are reported, never raised: separation in particular fails by
    construction when the history stays elastic.
    """
    h = _matrix(samples)
    if len(h) < 3:  # noqa: PLR2004
        msg = f"At least three samples are required, got {len(h)}."
        raise ValueError(msg)
    d = distance_matrix(h, spec)
    excess = d[:, None, :] - d[:, :, None] - d[None, :, :]
    violations = tuple(
        (i, j)
        for i in range(len(h))
        for j in range(i + 1, len(h))
        if not np.array_equal(h[i], h[j]) and d[i, j] <= slack
    )
    if violations:
        LOGGER.info("Separation fails for %d distinct pair(s)", len(violations))
    return AxiomReport(
        n_samples=len(h),
        min_distance=float(np.min(d)),
        max_asymmetry=float(np.max(np.abs(d - d.T))),
        worst_triangle_excess=float(np.max(excess)),
        separation_violations=violations,
        slack=slack,
    )
