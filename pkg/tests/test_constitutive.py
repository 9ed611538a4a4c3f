"""Tests for the viscoplastic constitutive model."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
import pytest

from viscofit.core import tensor as tn
from viscofit.core.errors import InvalidTimeGridError, NonPositiveDeterminantError
from viscofit.services import constitutive as cm
from viscofit.services.loading import simple_shear

if TYPE_CHECKING:
    from viscofit.config import HardeningParams, MaterialParams


def _sym_unit(i: int, j: int) -> np.ndarray:
    e = np.zeros((3, 3))
    e[i, j] += 0.5
    e[j, i] += 0.5
    return e


def _spd_near_identity(rng: np.random.Generator, scale: float = 0.02) -> np.ndarray:
    f = np.eye(3) + scale * rng.standard_normal((3, 3))
    return f.T @ f


def test_virgin_state_is_stress_free(material: MaterialParams) -> None:
    state = cm.InternalState.virgin()
    np.testing.assert_allclose(cm.cauchy_stress(np.eye(3), state, material), 0.0, atol=1e-12)
    x1, x2, x = cm.backstresses(state, material)
    np.testing.assert_allclose(x, 0.0, atol=1e-12)
    assert cm.isotropic_hardening(state, material) == 0.0


def test_small_shear_gives_shear_modulus(material: MaterialParams) -> None:
    gamma = 1e-4
    stress = cm.cauchy_stress(simple_shear(gamma), cm.InternalState.virgin(), material)
    assert stress[0, 1] == pytest.approx(material.mu * gamma, rel=1e-9)
    assert tn.symmetry_residual(stress) < 1e-9


def test_second_pk_is_derivative_of_elastic_energy(material: MaterialParams, rng: np.random.Generator) -> None:
    c = _spd_near_identity(rng)
    t = cm.second_pk_stress(c, cm.InternalState.virgin(), material)
    h = 1e-6
    for i in range(3):
        for j in range(i, 3):
            e = _sym_unit(i, j)
            dpsi = (cm.elastic_energy(c + h * e, material) - cm.elastic_energy(c - h * e, material)) / (2 * h)
            assert 2.0 * dpsi == pytest.approx(np.sum(t * e), rel=1e-5, abs=1e-3)


def test_backstress_is_derivative_of_kinematic_energy(
    material: MaterialParams,
    rng: np.random.Generator,
) -> None:
    ci = tn.unimodular(_spd_near_identity(rng, 0.05))
    state = cm.InternalState(Ci=ci, C1i=np.eye(3), C2i=np.eye(3), s=np.array(0.0), sd=np.array(0.0))
    x1, _, _ = cm.backstresses(state, material)
    c1 = material.hardening.c1
    h = 1e-7
    for i in range(3):
        for j in range(i, 3):
            e = _sym_unit(i, j)
            dpsi = (cm.kinematic_energy(ci + h * e, c1) - cm.kinematic_energy(ci - h * e, c1)) / (2 * h)
            assert 2.0 * dpsi == pytest.approx(np.sum(x1 * e), rel=1e-5, abs=1e-3)


def test_elastic_step_leaves_state_untouched(material: MaterialParams) -> None:
    f = simple_shear(1e-3)
    state = cm.InternalState.virgin()
    new, rate = cm.advance(f.T @ f, state, material, 1.0)
    assert new is state
    assert rate == 0.0


def test_zero_step_copies_state(material: MaterialParams) -> None:
    f = simple_shear(0.05)
    state = cm.InternalState.virgin()
    new, _ = cm.advance(f.T @ f, state, material, 0.0)
    assert new is state


def test_negative_step_is_rejected(material: MaterialParams) -> None:
    with pytest.raises(InvalidTimeGridError):
        cm.advance(np.eye(3), cm.InternalState.virgin(), material, -1.0)


def test_inelastic_step_keeps_invariants(material: MaterialParams) -> None:
    f = simple_shear(0.01)
    c = f.T @ f
    state = cm.InternalState.virgin()
    f_trial, _, _ = cm.overstress_and_multiplier(c, state, material)
    assert f_trial > 0.0

    new, rate = cm.advance(c, state, material, 1.0)

    assert rate > 0.0
    for name in ("Ci", "C1i", "C2i"):
        tensor = getattr(new, name)
        assert tn.det(tensor) == pytest.approx(1.0, abs=1e-10)
        assert tn.symmetry_residual(tensor) < 1e-12
        assert tn.is_positive_definite(tensor)
    assert new.s > 0.0
    assert 0.0 <= new.sd <= new.s
    f_after, _, _ = cm.overstress_and_multiplier(c, new, material)
    assert f_after < f_trial


def test_cauchy_rejects_inverted_gradient(material: MaterialParams) -> None:
    with pytest.raises(NonPositiveDeterminantError):
        cm.cauchy_stress(np.diag([1.0, 1.0, -1.0]), cm.InternalState.virgin(), material)


def test_batched_drive_matches_single_runs(material: MaterialParams, truth: HardeningParams) -> None:
    times = np.linspace(0.0, 20.0, 21)
    gradients = list(simple_shear(np.linspace(0.0, 0.02, 21)))
    batch = np.vstack([truth.as_array(), truth.scaled(1.5).as_array()])

    together = [step.cauchy for step in cm.drive(gradients, times, material, batch)]
    for member in range(2):
        alone = [step.cauchy for step in cm.drive(gradients, times, material, batch[member][None])]
        np.testing.assert_allclose(
            np.array([s[member] for s in together]),
            np.array([s[0] for s in alone]),
            rtol=1e-9,
            atol=1e-9,
        )


def test_drive_allows_repeated_times(material: MaterialParams) -> None:
    times = [0.0, 1.0, 1.0, 2.0]
    gradients = list(simple_shear([0.0, 0.01, 0.01, 0.0]))
    steps = list(cm.drive(gradients, times, material))
    assert len(steps) == 4
    np.testing.assert_array_equal(steps[2].state.Ci, steps[1].state.Ci)


def test_drive_rejects_decreasing_times(material: MaterialParams) -> None:
    with pytest.raises(InvalidTimeGridError):
        list(cm.drive(list(simple_shear([0.0, 0.01])), [1.0, 0.0], material))


def test_simulate_yields_every_grid_time(material: MaterialParams) -> None:
    times = np.linspace(0.0, 10.0, 11)
    steps = list(cm.simulate(lambda t: simple_shear(1e-3 * t), times, material))
    assert [s.time for s in steps] == pytest.approx(list(times))


def test_evolve_state_returns_trajectory(material: MaterialParams) -> None:
    trajectory = cm.evolve_state(
        lambda t: simple_shear(2e-3 * t).T @ simple_shear(2e-3 * t),
        cm.InternalState.virgin(),
        material,
        0.0,
        10.0,
        1.0,
    )
    assert len(trajectory) == 11
    assert trajectory[-1].s >= trajectory[0].s


@pytest.mark.parametrize(("t0", "t1", "dt"), [(0.0, 1.0, 0.0), (1.0, 1.0, 0.1), (2.0, 1.0, 0.1)])
def test_time_grid_rejects_bad_input(t0: float, t1: float, dt: float) -> None:
    with pytest.raises(InvalidTimeGridError):
        cm.time_grid(t0, t1, dt)


def test_time_grid_ends_exactly() -> None:
    grid = cm.time_grid(0.0, 1.0, 0.3)
    assert grid[0] == 0.0
    assert grid[-1] == 1.0
    assert np.all(np.diff(grid) <= 0.3 + 1e-12)
