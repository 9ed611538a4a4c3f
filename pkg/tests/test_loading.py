"""Tests for deformation histories and strain programs."""

from __future__ import annotations

import numpy as np
import pytest

from viscofit import constants
from viscofit.core import tensor as tn
from viscofit.core.errors import InvalidProgramError, OutOfRangeError
from viscofit.services import loading


@pytest.mark.parametrize("which", [1, 2])
def test_benchmark_history_is_closed_and_isochoric(which: int) -> None:
    history = loading.benchmark_history(which)
    np.testing.assert_allclose(history.sample(0.0), np.eye(3), atol=1e-15)
    np.testing.assert_allclose(history.sample(4.0), np.eye(3), atol=1e-15)
    for t in np.linspace(0.0, 4.0, 17):
        assert tn.det(history.sample(float(t))) == pytest.approx(1.0, abs=1e-12)


def test_benchmark_histories_differ_in_the_middle() -> None:
    f1 = loading.benchmark_history(1).sample(2.0)
    f2 = loading.benchmark_history(2).sample(2.0)
    np.testing.assert_allclose(f1, np.eye(3), atol=1e-15)
    assert f2[0, 1] == pytest.approx(loading.BENCHMARK_SHEAR)


def test_unknown_history_is_rejected() -> None:
    with pytest.raises(InvalidProgramError):
        loading.benchmark_history(3)


@pytest.mark.parametrize("t", [-0.1, 4.5])
def test_sample_outside_history(t: float) -> None:
    with pytest.raises(OutOfRangeError):
        loading.benchmark_history(1).sample(t)


def test_rescaled_history_keeps_keypoints() -> None:
    history = loading.benchmark_history(2)
    scaled = history.rescaled(400.0)
    assert scaled.end == pytest.approx(400.0)
    np.testing.assert_allclose(scaled.sample(200.0), history.sample(2.0))


def test_history_validation() -> None:
    with pytest.raises(InvalidProgramError):
        loading.DeformationHistory((0.0,), (np.eye(3),))
    with pytest.raises(InvalidProgramError):
        loading.DeformationHistory((0.0, 0.0), (np.eye(3), np.eye(3)))
    with pytest.raises(InvalidProgramError):
        loading.DeformationHistory((0.0, 1.0), (np.eye(3), np.diag([1.0, 1.0, -1.0])))


def test_simple_shear_broadcasts() -> None:
    f = loading.simple_shear([0.0, 0.1, 0.2])
    assert f.shape == (3, 3, 3)
    assert f[2, 0, 1] == 0.2
    np.testing.assert_array_equal(tn.det(f), 1.0)


def test_torsion_program_follows_reversals() -> None:
    program, gradients = loading.torsion_program(0.3, (0.2, -0.1, 0.25), n_points=100, duration=850.0)
    shears = np.asarray(program.shear_values)
    assert program.n_points == 100
    assert len(gradients) == 100
    assert shears[0] == 0.0
    assert shears[-1] == pytest.approx(0.25)
    assert shears.max() <= 0.25 + 1e-12
    assert shears.min() >= -0.1 - 1e-12
    assert gradients[10][0, 1] == shears[10]


@pytest.mark.parametrize(
    ("reversals", "n_points"),
    [((), 10), ((0.5,), 10), ((0.0,), 10), ((0.2,), 1)],
)
def test_torsion_program_validation(reversals: tuple[float, ...], n_points: int) -> None:
    with pytest.raises(InvalidProgramError):
        loading.torsion_program(0.3, reversals, n_points=n_points, duration=100.0)


def test_program_times_follow_strain_increments() -> None:
    program = loading.StrainProgram.from_strains([0.0, 0.1, 0.3, 0.2], duration=40.0)
    np.testing.assert_allclose(program.times(), [0.0, 10.0, 30.0, 40.0])
    assert program.path_length == pytest.approx(0.4)


def test_constant_program_uses_uniform_times() -> None:
    program = loading.StrainProgram.from_strains([0.1, 0.1, 0.1], duration=10.0)
    np.testing.assert_allclose(program.times(), [0.0, 5.0, 10.0])


def test_integration_grid_contains_observations() -> None:
    program = loading.StrainProgram.from_strains([0.0, 0.001, 0.003, 0.002], duration=40.0, substeps=4)
    times, shears, observed = program.integration_grid()
    assert len(times) == 3 * 4 + 1
    np.testing.assert_array_equal(observed, [0, 4, 8, 12])
    np.testing.assert_allclose(times[observed], program.times())
    np.testing.assert_allclose(shears[observed], program.shear_values)
    assert np.all(np.diff(times) >= 0.0)


def test_coarse_substeps_are_refined_to_the_largest_shear_step() -> None:
    program = loading.StrainProgram.from_strains([0.0, 0.0105, 0.0095, 0.0095], duration=10.0, substeps=2)
    np.testing.assert_array_equal(program.steps_per_interval(), [11, 2, 2])
    times, shears, observed = program.integration_grid()
    np.testing.assert_array_equal(observed, [0, 11, 13, 15])
    np.testing.assert_allclose(shears[observed], program.shear_values)
    assert np.max(np.abs(np.diff(shears))) <= program.max_increment
    np.testing.assert_allclose(times[-1], 10.0)


def test_default_torsion_program_steps_stay_below_the_largest_increment() -> None:
    program, _ = loading.torsion_program(
        constants.TORSION_MAX_SHEAR,
        constants.TORSION_REVERSALS,
        n_points=constants.TORSION_POINTS,
        duration=constants.TORSION_DURATION,
        substeps=constants.TORSION_SUBSTEPS,
    )
    _, shears, observed = program.integration_grid()
    assert observed.size == constants.TORSION_POINTS
    assert np.max(np.abs(np.diff(shears))) <= constants.MAX_SHEAR_INCREMENT
    assert program.path_length == pytest.approx(1.7)


@pytest.mark.parametrize(
    ("strains", "duration", "substeps"),
    [([0.0], 1.0, 1), ([0.0, 0.1], 0.0, 1), ([0.0, 0.1], 1.0, 0), ([0.0, float("nan")], 1.0, 1)],
)
def test_program_validation(strains: list[float], duration: float, substeps: int) -> None:
    with pytest.raises(InvalidProgramError):
        loading.StrainProgram.from_strains(strains, duration, substeps)
