"""Deformation programs: the closed benchmark cycles and the torsion experiment."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from viscofit import constants
from viscofit.core import tensor as tn
from viscofit.core.errors import InvalidProgramError, OutOfRangeError

if TYPE_CHECKING:
    from collections.abc import Sequence

    import numpy.typing as npt

    from viscofit.core.tensor import Tensor2

LOGGER = logging.getLogger(__name__)

BENCHMARK_STRETCH = 1.2
BENCHMARK_SHEAR = 0.2


@dataclass(frozen=True)
class DeformationHistory:
    """Piecewise-linear deformation gradient through key-points, optionally made isochoric."""

    times: tuple[float, ...]
    keypoints: tuple[Tensor2, ...]
    projection: bool = True

    def __post_init__(self) -> None:
        if len(self.times) != len(self.keypoints) or len(self.times) < 2:
            msg = "A deformation history needs at least two (time, F) key-points."
            raise InvalidProgramError(msg)
        if np.any(np.diff(self.times) <= 0.0):
            msg = "Key-point times must be strictly increasing."
            raise InvalidProgramError(msg)
        for f in self.keypoints:
            if not tn.det(f) > 0.0:
                msg = "Every key-point F must have det F > 0."
                raise InvalidProgramError(msg)

    @property
    def start(self) -> float:
        return self.times[0]

    @property
    def end(self) -> float:
        return self.times[-1]

    def sample(self, t: float) -> Tensor2:
        """Interpolate F at time t."""
        return sample(self, t)

    def rescaled(self, duration: float) -> DeformationHistory:
        """Same key-points stretched over ``[0, duration]`` seconds."""
        if not duration > 0.0:
            msg = f"Duration must be positive, got {duration}."
            raise InvalidProgramError(msg)
        t = np.asarray(self.times)
        scaled = (t - t[0]) * (duration / (t[-1] - t[0]))
        return DeformationHistory(tuple(float(x) for x in scaled), self.keypoints, self.projection)


def sample(history: DeformationHistory, t: float) -> Tensor2:
    """Linear interpolation between the bracketing key-points, then unimodular projection if flagged.

    Raises:
        OutOfRangeError: if t lies outside the key-point times.

    """
    if not history.start <= t <= history.end:
        msg = f"t = {t} is outside [{history.start}, {history.end}]."
        raise OutOfRangeError(msg)
    i = int(np.searchsorted(history.times, t, side="right")) - 1
    i = min(i, len(history.times) - 2)
    t0, t1 = history.times[i], history.times[i + 1]
    w = (t - t0) / (t1 - t0)
    f = (1.0 - w) * history.keypoints[i] + w * history.keypoints[i + 1]
    return tn.unimodular(f) if history.projection else f


def benchmark_history(which: int, amplitude: float = 1.0) -> DeformationHistory:
    """Closed four-segment cycle over t ∈ [0, 4] through F₁, F₂, F₃, F₄, F₁.

    History 1 alternates two uniaxial stretches through the identity; history 2
    visits a simple-shear state instead. ``amplitude`` scales every key-point's
    deviation from the identity (amplitude 1 gives the standard cycle).
    """
    stretch = BENCHMARK_STRETCH
    lateral = stretch**-0.5
    f1 = tn.identity()
    f2 = np.diag([stretch, lateral, lateral])
    f4 = np.diag([lateral, stretch, lateral])
    if which == 1:
        f3 = tn.identity()
    elif which == 2:
        f3 = tn.identity() + BENCHMARK_SHEAR * tn.dyad(tn.basis(1), tn.basis(2))
    else:
        msg = f"Unknown benchmark history {which}; allowed are 1 and 2."
        raise InvalidProgramError(msg)
    keys = [f1, f2, f3, f4, f1]
    if amplitude != 1.0:
        keys = [tn.IDENTITY + amplitude * (f - tn.IDENTITY) for f in keys]
    return DeformationHistory(
        times=(0.0, 1.0, 2.0, 3.0, 4.0),
        keypoints=tuple(np.array(f, dtype=float) for f in keys),
        projection=True,
    )


def simple_shear(gamma: npt.ArrayLike) -> Tensor2:
    """F = 1 + γ e₁⊗e₂, broadcasting over an array of shears."""
    g = np.asarray(gamma, dtype=float)
    f = np.broadcast_to(np.eye(3), (*g.shape, 3, 3)).copy()
    f[..., 0, 1] = g
    return f


@dataclass(frozen=True)
class StrainProgram:
    """Shear-strain-controlled experiment sampled at the observation points.

    Between consecutive observations the shear changes linearly at a constant
    rate; the time per observation interval is proportional to its strain
    increment. Each interval is integrated in at least ``substeps`` steps, and
    in more when needed to keep every shear step within ``max_increment``.
    """

    shear_values: tuple[float, ...]
    duration: float
    substeps: int = 1
    max_increment: float = constants.MAX_SHEAR_INCREMENT

    def __post_init__(self) -> None:
        if len(self.shear_values) < 2:
            msg = "A strain program needs at least two sample points."
            raise InvalidProgramError(msg)
        if not np.all(np.isfinite(self.shear_values)):
            msg = "Shear values must be finite."
            raise InvalidProgramError(msg)
        if not self.duration > 0.0:
            msg = f"Duration must be positive, got {self.duration}."
            raise InvalidProgramError(msg)
        if self.substeps < 1:
            msg = f"Substeps must be at least 1, got {self.substeps}."
            raise InvalidProgramError(msg)
        if not self.max_increment > 0.0:
            msg = f"The maximum shear increment must be positive, got {self.max_increment}."
            raise InvalidProgramError(msg)

    @classmethod
    def from_strains(
        cls,
        strains: Sequence[float] | npt.NDArray[np.float64],
        duration: float,
        substeps: int = 1,
    ) -> StrainProgram:
        """Program whose observation points are the given strains, in row order."""
        return cls(tuple(float(s) for s in strains), duration, substeps)

    @property
    def n_points(self) -> int:
        return len(self.shear_values)

    @property
    def path_length(self) -> float:
        """Total shear arc length along the path."""
        return float(np.sum(np.abs(np.diff(self.shear_values))))

    def times(self) -> npt.NDArray[np.float64]:
        """Observation times in seconds."""
        steps = np.abs(np.diff(self.shear_values))
        total = steps.sum()
        if total == 0.0:
            return np.linspace(0.0, self.duration, self.n_points)
        return np.concatenate([[0.0], np.cumsum(steps) * (self.duration / total)])

    def steps_per_interval(self) -> npt.NDArray[np.int_]:
        """Integration steps in each observation interval."""
        increments = np.abs(np.diff(self.shear_values))
        refined = np.ceil(increments / self.max_increment - 1e-9).astype(int)
        return np.maximum(refined, self.substeps)

    def integration_grid(
        self,
    ) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64], npt.NDArray[np.int_]]:
        """Fine grid ``(times, shears, observed)``; observation i sits at index ``observed[i]``."""
        t = self.times()
        g = np.asarray(self.shear_values)
        counts = self.steps_per_interval()
        w = np.concatenate([np.arange(c) / c for c in counts])
        start = np.repeat(np.arange(counts.size), counts)
        fine_t = t[start] + w * np.diff(t)[start]
        fine_g = g[start] + w * np.diff(g)[start]
        observed = np.concatenate([[0], np.cumsum(counts)])
        return np.append(fine_t, t[-1]), np.append(fine_g, g[-1]), observed

    def deformation_gradients(self) -> list[Tensor2]:
        """Simple-shear F at every observation point."""
        return list(simple_shear(np.asarray(self.shear_values)))


def torsion_program(
    max_shear: float,
    reversals: Sequence[float],
    n_points: int,
    duration: float,
    substeps: int = 1,
) -> tuple[StrainProgram, list[Tensor2]]:
    """Evenly spaced samples along the shear path 0 → reversals[0] → reversals[1] → ...

    Raises:
        InvalidProgramError: on an empty reversal list, targets beyond ``max_shear``,
            a zero-length path, fewer than two points or a non-positive duration.

    """
    if not reversals:
        msg = "The torsion program needs at least one shear target."
        raise InvalidProgramError(msg)
    if n_points < 2:
        msg = f"n_points must be at least 2, got {n_points}."
        raise InvalidProgramError(msg)
    nodes = np.array([0.0, *reversals], dtype=float)
    if np.any(np.abs(nodes) > max_shear):
        msg = f"Shear targets {list(reversals)} exceed the maximum |shear| of {max_shear}."
        raise InvalidProgramError(msg)
    arc = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(nodes)))])
    if arc[-1] == 0.0:
        msg = "The torsion program has zero length."
        raise InvalidProgramError(msg)
    s = np.linspace(0.0, arc[-1], n_points)
    shears = np.interp(s, arc, nodes)
    program = StrainProgram.from_strains(shears, duration, substeps)
    LOGGER.debug("Torsion program: %d points over %.3g of shear path", n_points, arc[-1])
    return program, program.deformation_gradients()
