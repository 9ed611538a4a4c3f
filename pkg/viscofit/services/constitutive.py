"""Finite-strain viscoplasticity with combined isotropic and two-backstress kinematic hardening.

The model is formulated on the reference configuration: a hyperelastic stress
response in ``C·Cᵢ⁻¹``, two backstresses from the kinematic potentials in
``Cᵢ·C₁ᵢ⁻¹`` and ``Cᵢ·C₂ᵢ⁻¹``, quadratic isotropic hardening and a Perzyna flow
rule. Every function accepts a batch of parameter sets (leading axis) so that
finite-difference Jacobians and parameter clouds are integrated in one pass.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from itertools import pairwise
from typing import TYPE_CHECKING

import numpy as np

from viscofit import constants
from viscofit.core import tensor as tn
from viscofit.core.errors import (
    InvalidTimeGridError,
    NonPositiveDefiniteError,
    NonPositiveDeterminantError,
    StepFailureError,
)

if TYPE_CHECKING:
    from collections.abc import Callable, Iterator, Sequence

    import numpy.typing as npt

    from viscofit import config
    from viscofit.core.tensor import Tensor2

LOGGER = logging.getLogger(__name__)

SQRT_2_3 = math.sqrt(2.0 / 3.0)
_EPS = np.finfo(float).eps


def _t(x: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Lift a scalar or batch vector so it multiplies tensors."""
    return np.asarray(x, dtype=float)[..., None, None]


@dataclass(frozen=True)
class Coefficients:
    """Material constants as arrays; hardening entries may carry a batch axis."""

    k: float
    mu: float
    eta: float
    m: float
    K: float
    k0: float
    gamma: npt.NDArray[np.float64]
    beta: npt.NDArray[np.float64]
    c1: npt.NDArray[np.float64]
    c2: npt.NDArray[np.float64]
    kappa1: npt.NDArray[np.float64]
    kappa2: npt.NDArray[np.float64]

    @classmethod
    def of(
        cls,
        params: config.MaterialParams | Coefficients,
        hardening: npt.ArrayLike | None = None,
    ) -> Coefficients:
        """Build from a parameter record, optionally replacing the hardening by a (B, 6) matrix."""
        if isinstance(params, Coefficients):
            if hardening is None:
                return params
            base = params
        else:
            base = None
        if hardening is None:
            h = params.hardening.as_array()  # type: ignore[union-attr]
        else:
            h = np.asarray(hardening, dtype=float)
        gamma, beta, c1, c2, kappa1, kappa2 = np.moveaxis(h, -1, 0)
        src = base if base is not None else params
        return cls(
            k=src.k,
            mu=src.mu,
            eta=src.eta,
            m=src.m,
            K=src.K,
            k0=src.k0,
            gamma=gamma,
            beta=beta,
            c1=c1,
            c2=c2,
            kappa1=kappa1,
            kappa2=kappa2,
        )

    @property
    def batch(self) -> int | None:
        """Number of parameter sets, or None for a single set."""
        return None if np.ndim(self.gamma) == 0 else int(np.shape(self.gamma)[0])


@dataclass(frozen=True)
class InternalState:
    """Internal variables ``(Cᵢ, C₁ᵢ, C₂ᵢ, s, s_d)``, optionally batched."""

    Ci: Tensor2
    C1i: Tensor2
    C2i: Tensor2
    s: npt.NDArray[np.float64]
    sd: npt.NDArray[np.float64]

    @classmethod
    def virgin(cls, batch: int | None = None) -> InternalState:
        """Isotropic, undeformed and stress-free initial state."""
        shape = () if batch is None else (batch,)
        return cls(
            Ci=tn.identity(batch),
            C1i=tn.identity(batch),
            C2i=tn.identity(batch),
            s=np.zeros(shape),
            sd=np.zeros(shape),
        )

    def member(self, index: int) -> InternalState:
        """Extract one member of a batched state."""

        def pick(a: npt.NDArray[np.float64], rank: int) -> npt.NDArray[np.float64]:
            return a[index] if a.ndim > rank else a

        return InternalState(
            Ci=pick(self.Ci, 2),
            C1i=pick(self.C1i, 2),
            C2i=pick(self.C2i, 2),
            s=pick(np.asarray(self.s), 0),
            sd=pick(np.asarray(self.sd), 0),
        )


@dataclass(frozen=True)
class StressOutput:
    """Stress-like quantities at one instant."""

    second_pk: Tensor2
    cauchy: Tensor2
    backstress_total: Tensor2
    R: npt.NDArray[np.float64]
    overstress_f: npt.NDArray[np.float64]
    driving_force_F: npt.NDArray[np.float64]
    lambda_i: npt.NDArray[np.float64]


@dataclass(frozen=True)
class StepResult:
    """Output of one grid time of :func:`simulate`."""

    time: float
    F: Tensor2
    state: InternalState
    cauchy: Tensor2
    lambda_i: npt.NDArray[np.float64]


@dataclass(frozen=True)
class _Response:
    T: Tensor2
    X1: Tensor2
    X2: Tensor2
    X: Tensor2
    R: npt.NDArray[np.float64]
    M: Tensor2  # (C·T̃ − Cᵢ·X̃)ᴰ
    F: npt.NDArray[np.float64]
    f: npt.NDArray[np.float64]


# --- Potentials ---


def elastic_energy(a: Tensor2, params: config.MaterialParams | Coefficients) -> float:
    """Stored elastic energy per reference volume for ``A = C·Cᵢ⁻¹``."""
    co = Coefficients.of(params)
    if not np.all(tn.is_positive_definite(a)):
        msg = "Elastic energy needs a symmetric positive definite argument."
        raise NonPositiveDefiniteError(msg)
    d = tn.det(a)
    volumetric = 0.5 * co.k * (0.5 * np.log(d)) ** 2
    isochoric = 0.5 * co.mu * (tn.trace(a) * d ** (-1.0 / 3.0) - 3.0)
    return volumetric + isochoric


def kinematic_energy(a: Tensor2, c: float) -> float:
    """Energy of one kinematic-hardening mechanism, ``(c/4)(tr Ā − 3)``."""
    if not np.all(tn.is_positive_definite(a)):
        msg = "Kinematic energy needs a symmetric positive definite argument."
        raise NonPositiveDefiniteError(msg)
    return 0.25 * c * (tn.trace(tn.unimodular(a)) - 3.0)


# --- Stresses ---


def _second_pk(c: Tensor2, ci_inv: Tensor2, co: Coefficients) -> Tensor2:
    c_inv = tn.inverse(c)
    a = c @ ci_inv
    d = tn.det(a)
    t = _t(0.5 * co.k * np.log(d)) * c_inv + _t(co.mu * d ** (-1.0 / 3.0)) * (
        ci_inv - _t(tn.trace(a) / 3.0) * c_inv
    )
    return tn.sym(t)


def _backstress(ci: Tensor2, ci_inv: Tensor2, cai: Tensor2, c: npt.ArrayLike) -> Tensor2:
    cai_inv = tn.inverse(cai)
    b = ci @ cai_inv
    d = tn.det(b)
    x = _t(0.5 * np.asarray(c) * d ** (-1.0 / 3.0)) * (cai_inv - _t(tn.trace(b) / 3.0) * ci_inv)
    return tn.sym(x)


def second_pk_stress(
    c: Tensor2,
    state: InternalState,
    params: config.MaterialParams | Coefficients,
) -> Tensor2:
    """Second Piola-Kirchhoff stress T̃ = 2 ∂ψ_el(C·Cᵢ⁻¹)/∂C at fixed Cᵢ."""
    co = Coefficients.of(params)
    return _second_pk(c, tn.inverse(state.Ci), co)


def backstresses(
    state: InternalState,
    params: config.MaterialParams | Coefficients,
) -> tuple[Tensor2, Tensor2, Tensor2]:
    """Return ``(X̃₁, X̃₂, X̃₁ + X̃₂)``."""
    co = Coefficients.of(params)
    ci_inv = tn.inverse(state.Ci)
    x1 = _backstress(state.Ci, ci_inv, state.C1i, co.c1)
    x2 = _backstress(state.Ci, ci_inv, state.C2i, co.c2)
    return x1, x2, x1 + x2


def isotropic_hardening(
    state: InternalState,
    params: config.MaterialParams | Coefficients,
) -> npt.NDArray[np.float64]:
    """R = γ·(s − s_d)."""
    co = Coefficients.of(params)
    return co.gamma * (np.asarray(state.s) - np.asarray(state.sd))


def _multiplier(f: npt.ArrayLike, co: Coefficients) -> npt.NDArray[np.float64]:
    ratio = np.maximum(np.asarray(f, dtype=float) / co.k0, 0.0)
    return ratio**co.m / co.eta


def _evaluate(c: Tensor2, state: InternalState, co: Coefficients) -> _Response:
    ci_inv = tn.inverse(state.Ci)
    t = _second_pk(c, ci_inv, co)
    x1 = _backstress(state.Ci, ci_inv, state.C1i, co.c1)
    x2 = _backstress(state.Ci, ci_inv, state.C2i, co.c2)
    x = x1 + x2
    r = co.gamma * (np.asarray(state.s) - np.asarray(state.sd))
    m = tn.deviator(c @ t - state.Ci @ x)
    big_f = tn.frobenius_norm(m)
    f = big_f - SQRT_2_3 * (co.K + r)
    return _Response(T=t, X1=x1, X2=x2, X=x, R=r, M=m, F=big_f, f=f)


def overstress_and_multiplier(
    c: Tensor2,
    state: InternalState,
    params: config.MaterialParams | Coefficients,
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Return the overstress f, the driving force 𝔉 and the Perzyna multiplier λᵢ."""
    co = Coefficients.of(params)
    resp = _evaluate(c, state, co)
    return resp.f, resp.F, _multiplier(resp.f, co)


def _cauchy(f_def: Tensor2, t: Tensor2) -> Tensor2:
    j = tn.det(f_def)
    return tn.sym(f_def @ t @ tn.transpose(f_def) / _t(j))


def cauchy_stress(
    f_def: Tensor2,
    state: InternalState,
    params: config.MaterialParams | Coefficients,
) -> Tensor2:
    """Push-forward T = (det F)⁻¹ F·T̃·Fᵀ."""
    if np.any(~(np.asarray(tn.det(f_def)) > 0.0)):
        msg = "Cauchy stress requires det F > 0."
        raise NonPositiveDeterminantError(msg)
    co = Coefficients.of(params)
    c = tn.transpose(f_def) @ f_def
    return _cauchy(f_def, second_pk_stress(c, state, co))


def stress_output(
    f_def: Tensor2,
    state: InternalState,
    params: config.MaterialParams | Coefficients,
) -> StressOutput:
    """Collect every stress-like quantity for a deformation gradient and state."""
    co = Coefficients.of(params)
    c = tn.transpose(f_def) @ f_def
    resp = _evaluate(c, state, co)
    return StressOutput(
        second_pk=resp.T,
        cauchy=_cauchy(f_def, resp.T),
        backstress_total=resp.X,
        R=resp.R,
        overstress_f=resp.f,
        driving_force_F=resp.F,
        lambda_i=_multiplier(resp.f, co),
    )


# --- Time integration ---


def _flowed(state: InternalState, rates: tuple[Tensor2, Tensor2, Tensor2], xi: npt.NDArray[np.float64], co: Coefficients) -> InternalState:
    """Apply an inelastic increment ξ along frozen rate directions, then restore det = 1."""
    d_i, d_1, d_2 = rates
    xi_t = _t(xi)
    ci = tn.unimodular(tn.sym(state.Ci + xi_t * (d_i @ state.Ci)))
    c1i = tn.unimodular(tn.sym(state.C1i + xi_t * (d_1 @ state.C1i)))
    c2i = tn.unimodular(tn.sym(state.C2i + xi_t * (d_2 @ state.C2i)))
    s = np.asarray(state.s) + SQRT_2_3 * xi
    b = co.beta * SQRT_2_3 * xi
    sd = (np.asarray(state.sd) + b * s) / (1.0 + b)
    return InternalState(Ci=ci, C1i=c1i, C2i=c2i, s=s, sd=sd)


def _solve_increment(
    probe: Callable[[npt.NDArray[np.float64]], tuple[npt.NDArray[np.float64], npt.NDArray[np.bool_]]],
    f_trial: npt.NDArray[np.float64],
    xi_hi: npt.NDArray[np.float64],
    active: npt.NDArray[np.bool_],
) -> npt.NDArray[np.float64]:
    """Illinois iteration on [0, xi_hi] for every active member; members freeze once converged.

    ``probe(xi)`` returns the residual and whether the flowed driving force has
    reversed against the trial direction. A reversed upper end is halved until
    it either brackets the root or stops overshooting.
    """

    def residual(xi: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        return probe(xi)[0]

    a = np.zeros_like(xi_hi)
    fa = np.where(active, f_trial, 1.0)
    b = np.where(active, xi_hi, 0.0)
    r, reversed_ = probe(b)
    for _ in range(constants.ILLINOIS_MAX_ITER):
        shrink = active & (r >= 0.0) & reversed_
        if not np.any(shrink):
            break
        b = np.where(shrink, 0.5 * b, b)
        r, reversed_ = probe(b)
    fb = np.where(active, r, -1.0)
    tol = 1e-12 * np.maximum(np.abs(f_trial), 1.0)

    # No sign change below the cap: take the capped increment.
    capped = active & (fb >= 0.0)
    if np.any(capped):
        LOGGER.debug("Inelastic increment capped for %d member(s)", int(np.sum(capped)))
    done = ~active | capped
    xi = np.where(capped, b, 0.0)

    for _ in range(constants.ILLINOIS_MAX_ITER):
        if np.all(done):
            break
        with np.errstate(divide="ignore", invalid="ignore"):
            c = b - fb * (b - a) / (fb - fa)
        c = np.where(done | ~np.isfinite(c), b, c)
        fc = residual(c)
        converged = (np.abs(fc) <= tol) | (np.abs(c - b) <= 4.0 * _EPS * np.abs(c))
        same_side = fc * fb > 0.0
        live = ~done
        a = np.where(live, np.where(same_side, a, b), a)
        fa = np.where(live, np.where(same_side, 0.5 * fa, fb), fa)
        b = np.where(live, c, b)
        fb = np.where(live, fc, fb)
        newly = live & converged
        xi = np.where(newly, c, xi)
        done = done | converged
    if not np.all(done):
        LOGGER.debug("Illinois iteration hit the limit for %d member(s)", int(np.sum(~done)))
        xi = np.where(done, xi, b)
    return xi


def advance(
    c: Tensor2,
    state: InternalState,
    params: config.MaterialParams | Coefficients,
    dt: float,
) -> tuple[InternalState, npt.NDArray[np.float64]]:
    """Advance the internal state over one step to the right Cauchy-Green tensor ``c``.

    Returns the new state and the step-averaged multiplier ξ/Δt.

    Raises:
        StepFailureError: if det = 1 or positive definiteness cannot be restored.

    """
    if dt < 0.0:
        msg = f"Time step must not be negative, got {dt}."
        raise InvalidTimeGridError(msg)
    co = Coefficients.of(params)
    trial = _evaluate(c, state, co)
    active = np.asarray(trial.f > 0.0)
    if dt == 0.0 or not np.any(active):
        return state, np.zeros(np.shape(trial.f))

    big_f = np.where(active, trial.F, 1.0)
    d_i = 2.0 * trial.M / _t(big_f)
    d_1 = 2.0 * _t(co.kappa1) * tn.deviator(state.Ci @ trial.X1)
    d_2 = 2.0 * _t(co.kappa2) * tn.deviator(state.Ci @ trial.X2)
    rates = (d_i, d_1, d_2)

    # ξ·‖D‖ < 1 keeps every linear update positive definite.
    largest = np.maximum(
        tn.frobenius_norm(d_i),
        np.maximum(tn.frobenius_norm(d_1), tn.frobenius_norm(d_2)),
    )
    xi_explicit = dt * _multiplier(trial.f, co)
    xi_hi = np.minimum(xi_explicit, constants.FLOW_CAP / largest)

    def probe(xi: npt.NDArray[np.float64]) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.bool_]]:
        resp = _evaluate(c, _flowed(state, rates, xi, co), co)
        r = resp.f - co.k0 * (co.eta * np.maximum(xi, 0.0) / dt) ** (1.0 / co.m)
        return r, np.sum(resp.M * trial.M, axis=(-2, -1)) < 0.0

    xi = _solve_increment(probe, trial.f, xi_hi, active)
    xi = np.where(active, xi, 0.0)
    flowed = _flowed(state, rates, xi, co)

    sel = _t(active) > 0.0
    new = InternalState(
        Ci=np.where(sel, flowed.Ci, state.Ci),
        C1i=np.where(sel, flowed.C1i, state.C1i),
        C2i=np.where(sel, flowed.C2i, state.C2i),
        s=np.where(active, flowed.s, state.s),
        sd=np.where(active, flowed.sd, state.sd),
    )
    _check_state(new)
    return new, xi / dt


def _check_state(state: InternalState) -> None:
    for name in ("Ci", "C1i", "C2i"):
        a = getattr(state, name)
        d = np.asarray(tn.det(a))
        if not np.all(np.isfinite(a)):
            msg = f"{name} became non-finite; reduce the time step."
            raise StepFailureError(msg)
        if np.any(np.abs(d - 1.0) > constants.DET_TOLERANCE):
            msg = f"det {name} deviates from 1 by {np.max(np.abs(d - 1.0)):.3e}; reduce the time step."
            raise StepFailureError(msg)
        if not np.all(tn.is_positive_definite(a)):
            msg = f"{name} lost positive definiteness; reduce the time step."
            raise StepFailureError(msg)


def time_grid(t0: float, t1: float, dt: float) -> npt.NDArray[np.float64]:
    """Uniform grid from t0 to t1 with spacing no larger than dt."""
    if not dt > 0.0:
        msg = f"Time step must be positive, got {dt}."
        raise InvalidTimeGridError(msg)
    if not t1 > t0:
        msg = f"End time {t1} must exceed start time {t0}."
        raise InvalidTimeGridError(msg)
    n = max(1, math.ceil((t1 - t0) / dt - 1e-9))
    return np.linspace(t0, t1, n + 1)


def evolve_state(
    c_of_t: Callable[[float], Tensor2],
    state0: InternalState,
    params: config.MaterialParams | Coefficients,
    t0: float,
    t1: float,
    dt: float,
) -> list[InternalState]:
    """Integrate the evolution equations and return the state at every grid time."""
    co = Coefficients.of(params)
    times = time_grid(t0, t1, dt)
    trajectory = [state0]
    state = state0
    for t_prev, t in pairwise(times):
        state, _ = advance(c_of_t(float(t)), state, co, float(t - t_prev))
        trajectory.append(state)
    return trajectory


def simulate(
    deformation: Callable[[float], Tensor2],
    times: Sequence[float] | npt.NDArray[np.float64],
    params: config.MaterialParams | Coefficients,
    hardening: npt.ArrayLike | None = None,
    state0: InternalState | None = None,
) -> Iterator[StepResult]:
    """Drive the model along ``deformation(t)`` and yield the response at each grid time.

    ``hardening`` may be a (B, 6) matrix to integrate B parameter sets at once.
    """
    times = np.asarray(times, dtype=float)
    gradients = [deformation(float(t)) for t in times]
    yield from drive(gradients, times, params, hardening, state0)


def drive(
    gradients: Sequence[Tensor2],
    times: Sequence[float] | npt.NDArray[np.float64],
    params: config.MaterialParams | Coefficients,
    hardening: npt.ArrayLike | None = None,
    state0: InternalState | None = None,
) -> Iterator[StepResult]:
    """Like :func:`simulate` for precomputed deformation gradients; repeated times are allowed."""
    co = Coefficients.of(params, hardening)
    state = state0 if state0 is not None else InternalState.virgin(co.batch)
    times = np.asarray(times, dtype=float)
    if len(gradients) != len(times):
        msg = f"{len(gradients)} deformation gradients for {len(times)} grid times."
        raise InvalidTimeGridError(msg)
    if np.any(np.diff(times) < 0.0):
        msg = "Grid times must be non-decreasing."
        raise InvalidTimeGridError(msg)
    f_def = gradients[0]
    c = tn.transpose(f_def) @ f_def
    lam0 = _multiplier(_evaluate(c, state, co).f, co)
    t_pk = _second_pk(c, tn.inverse(state.Ci), co)
    yield StepResult(float(times[0]), f_def, state, _cauchy(f_def, t_pk), lam0)
    for k in range(1, len(times)):
        f_def = gradients[k]
        c = tn.transpose(f_def) @ f_def
        state, lam = advance(c, state, co, float(times[k] - times[k - 1]))
        t_pk = _second_pk(c, tn.inverse(state.Ci), co)
        yield StepResult(float(times[k]), f_def, state, _cauchy(f_def, t_pk), lam)
