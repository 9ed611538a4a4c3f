"""Measurement-error generators and the two-source covariance matrix."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
from scipy import signal

from viscofit.core.errors import DegenerateDataError, UnsupportedModelError

if TYPE_CHECKING:
    from collections.abc import Iterable

    import numpy.typing as npt

    from viscofit.config import NoiseModel


def instance_rng(master_seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for Monte Carlo instance ``index``; independent of the worker layout."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([master_seed, index])))


def _observations(exp: npt.ArrayLike) -> npt.NDArray[np.float64]:
    values = np.asarray(exp, dtype=float)
    if values.ndim != 1 or values.size == 0:
        msg = "Noise needs a non-empty one-dimensional observation vector."
        raise DegenerateDataError(msg)
    return values


def _normalizer(values: npt.NDArray[np.float64]) -> float:
    scale = float(np.max(np.abs(values)))
    if scale == 0.0:
        msg = "Two-source noise is undefined for data that is identically zero."
        raise DegenerateDataError(msg)
    return scale


def sample_noise(
    model: NoiseModel,
    exp: npt.ArrayLike,
    seed: int | np.random.Generator,
) -> npt.NDArray[np.float64]:
    """One realization of the additive noise for the observations ``exp``.

    ``seed`` is either an integer or a ready generator (see :func:`instance_rng`).
    """
    values = _observations(exp)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n = values.size
    if model.kind == "white":
        return model.sigma * rng.standard_normal(n)
    if model.kind == "ar":
        eps = model.sigma * rng.standard_normal(n)
        # Start from the stationary distribution N(0, σ²/(1 − α²)).
        first = eps[0] / np.sqrt(1.0 - model.alpha**2)
        if n == 1:
            return np.array([first])
        rest, _ = signal.lfilter([1.0], [1.0, -model.alpha], eps[1:], zi=[model.alpha * first])
        return np.concatenate([[first], rest])
    scale = _normalizer(values)
    uncorrelated = model.sigma1 * rng.standard_normal(n)
    shared = model.sigma2 * rng.standard_normal()
    return uncorrelated + shared * values / scale


def sample_noise_batch(
    model: NoiseModel,
    exp: npt.ArrayLike,
    master_seed: int,
    indices: Iterable[int],
) -> npt.NDArray[np.float64]:
    """Stack one realization per instance index, each from its own stream."""
    return np.stack([sample_noise(model, exp, instance_rng(master_seed, j)) for j in indices])


def covariance(model: NoiseModel, exp: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Covariance of the white or two-source noise for the observations ``exp``.

    Raises:
        UnsupportedModelError: for autoregressive noise.

    """
    values = _observations(exp)
    n = values.size
    if model.kind == "white":
        return model.sigma**2 * np.eye(n)
    if model.kind == "ar":
        msg = "No covariance matrix is derived for autoregressive noise; use white or two_source."
        raise UnsupportedModelError(msg)
    scale = _normalizer(values)
    u = values / scale
    return model.sigma1**2 * np.eye(n) + model.sigma2**2 * np.outer(u, u)
