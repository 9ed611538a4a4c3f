"""Tests for the linearized Monte Carlo sensitivity analysis."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
import pytest

from viscofit import constants
from viscofit.config import HardeningParams, MaterialParams, MetricConfig, NoiseModel
from viscofit.core import data_io
from viscofit.core.errors import (
    DimensionMismatchError,
    NonConvergenceError,
    SingularNormalMatrixError,
    ZeroReferenceParameterError,
)
from viscofit.services import identification as ident
from viscofit.services import metric, noise, sensitivity
from viscofit.services.loading import torsion_program

if TYPE_CHECKING:
    from pathlib import Path

    from viscofit.services.loading import StrainProgram

N = 30


@pytest.fixture
def lin(truth: HardeningParams) -> sensitivity.LinearizedModel:
    """A well-conditioned toy linearization whose columns are scaled to the parameters."""
    rng = np.random.default_rng(99)
    jac = rng.standard_normal((N, 6)) * (1e4 / truth.as_array())
    mod_star = 300.0 * np.sin(np.linspace(0.0, 3.0, N)) + 50.0
    return sensitivity.LinearizedModel(truth, mod_star, jac)


def test_zero_noise_returns_base_solution(lin: sensitivity.LinearizedModel) -> None:
    scheme = ident.WeightingScheme.identity(N)
    p = sensitivity.reidentify_linear(lin, scheme, lin.mod_star, np.zeros(N))
    np.testing.assert_allclose(p, lin.p_star.as_array(), rtol=1e-10)


@pytest.mark.parametrize("kind", ["identity", "diag_inv_cov", "full_inv_cov"])
def test_linear_model_is_reidentified_exactly(kind: str, lin: sensitivity.LinearizedModel) -> None:
    shift = lin.p_star.as_array() * np.array([0.01, -0.02, 0.03, 0.0, 0.01, -0.01])
    exp = lin.response(lin.p_star.as_array() + shift)
    scheme = ident.WeightingScheme.from_covariance(kind, noise.covariance(NoiseModel.two_source(10.0, 5.0), exp))
    p = sensitivity.reidentify_linear(lin, scheme, exp, np.zeros(N))
    np.testing.assert_allclose(p, lin.p_star.as_array() + shift, rtol=1e-8)


def test_batch_matches_single_solves(lin: sensitivity.LinearizedModel, rng: np.random.Generator) -> None:
    scheme = ident.WeightingScheme.identity(N)
    noises = rng.standard_normal((4, N))
    batch = sensitivity.reidentify_linear_batch(lin, scheme, lin.mod_star, noises)
    for row, vector in zip(batch, noises, strict=True):
        np.testing.assert_allclose(row, sensitivity.reidentify_linear(lin, scheme, lin.mod_star, vector), rtol=1e-12)


def test_invisible_parameter_makes_normal_matrix_singular(lin: sensitivity.LinearizedModel) -> None:
    jac = lin.jacobian.copy()
    jac[:, 3] = 0.0
    flat = sensitivity.LinearizedModel(lin.p_star, lin.mod_star, jac)
    with pytest.raises(SingularNormalMatrixError):
        sensitivity.NormalEquations(flat, ident.WeightingScheme.identity(N))


def test_collinear_columns_are_ill_conditioned(lin: sensitivity.LinearizedModel) -> None:
    jac = lin.jacobian.copy()
    jac[:, 5] = 2.0 * jac[:, 4]
    with pytest.raises(SingularNormalMatrixError):
        sensitivity.NormalEquations(
            sensitivity.LinearizedModel(lin.p_star, lin.mod_star, jac),
            ident.WeightingScheme.identity(N),
        )


def test_weighting_must_match_observations(lin: sensitivity.LinearizedModel) -> None:
    with pytest.raises(DimensionMismatchError):
        sensitivity.NormalEquations(lin, ident.WeightingScheme.identity(N + 1))


def test_normalized_variances(truth: HardeningParams) -> None:
    p = truth.as_array()
    cloud = np.vstack([p * 0.9, p * 1.1])
    np.testing.assert_allclose(sensitivity.normalized_variances(cloud, truth), 0.01, rtol=1e-10)
    with pytest.raises(ZeroReferenceParameterError):
        sensitivity.normalized_variances(cloud, np.zeros(6))


def test_cloud_does_not_depend_on_chunking(lin: sensitivity.LinearizedModel) -> None:
    model = NoiseModel.two_source(10.0, 5.0)
    scheme = ident.WeightingScheme.from_covariance("full_inv_cov", noise.covariance(model, lin.mod_star))
    one = sensitivity.generate_cloud(lin, scheme, model, lin.mod_star, 300, 17, chunk_size=300)
    many = sensitivity.generate_cloud(lin, scheme, model, lin.mod_star, 300, 17, chunk_size=64)
    np.testing.assert_allclose(one, many, rtol=1e-12)


def test_cloud_covariance_matches_theory(lin: sensitivity.LinearizedModel) -> None:
    model = NoiseModel.two_source(10.0, 5.0)
    cov = noise.covariance(model, lin.mod_star)
    scheme = ident.WeightingScheme.from_covariance("full_inv_cov", cov)
    report = sensitivity.monte_carlo_cloud(lin, scheme, model, lin.mod_star, 4000, 3)
    expected = np.linalg.inv(lin.jacobian.T @ np.linalg.solve(cov, lin.jacobian))
    np.testing.assert_allclose(np.var(report.cloud, axis=0), np.diag(expected), rtol=0.15)
    assert report.n_instances == 4000
    assert report.size_per_history == {}
    assert report.admissible.all()


def test_compare_schemes_uses_the_same_draws(lin: sensitivity.LinearizedModel) -> None:
    model = NoiseModel.two_source(10.0, 5.0)
    reports = sensitivity.compare_schemes(lin, model, lin.mod_star, ["identity", "full_inv_cov"], 2000, 5)
    assert set(reports) == {"identity", "full_inv_cov"}
    assert {r.seed for r in reports.values()} == {5}
    # The inverse-covariance weighting is the minimum-variance linear estimator.
    assert np.sum(reports["full_inv_cov"].variances) < np.sum(reports["identity"].variances)


def test_noise_free_clouds_have_zero_size(lin: sensitivity.LinearizedModel, material: MaterialParams) -> None:
    specs = metric.benchmark_specs(material, MetricConfig())
    kinds = ["identity", "diag_inv_cov", "full_inv_cov"]
    reports = sensitivity.compare_schemes(lin, NoiseModel.two_source(0.0, 0.0), lin.mod_star, kinds, 50, 2, specs=specs)
    for report in reports.values():
        np.testing.assert_array_equal(report.cloud, np.tile(lin.p_star.as_array(), (50, 1)))
        assert report.size_per_history == {1: 0.0, 2: 0.0}
        np.testing.assert_array_equal(report.variances, 0.0)
    assert [r.scheme for r in reports.values()] == kinds


def _normalized_covariance(
    lin: sensitivity.LinearizedModel,
    scheme: ident.WeightingScheme,
    cov: np.ndarray,
) -> np.ndarray:
    """Covariance of p/p* for the closed-form estimator under noise covariance ``cov``."""
    jac = lin.jacobian * lin.p_star.as_array()
    wj = scheme.apply(jac)
    gain = np.linalg.solve(jac.T @ wj, wj.T)
    return gain @ cov @ gain.T


@pytest.mark.parametrize("kind", ["identity", "diag_inv_cov"])
def test_inverse_covariance_weighting_has_the_smallest_covariance(
    kind: str,
    lin: sensitivity.LinearizedModel,
) -> None:
    model = NoiseModel.two_source(10.0, 5.0)
    cov = noise.covariance(model, lin.mod_star)
    scheme = ident.WeightingScheme.from_covariance(kind, cov)
    best = _normalized_covariance(lin, ident.WeightingScheme.from_covariance("full_inv_cov", cov), cov)
    other = _normalized_covariance(lin, scheme, cov)
    # The difference is positive semi-definite: every component and every combination loses.
    assert np.min(np.linalg.eigvalsh(other - best)) > -1e-12 * np.max(np.diag(other))
    assert np.all(np.diag(best) < np.diag(other))

    report = sensitivity.monte_carlo_cloud(lin, scheme, model, lin.mod_star, 4000, 8)
    np.testing.assert_allclose(report.variances, np.diag(other), rtol=0.15)


@pytest.mark.parametrize("kind", ["diag_inv_cov", "full_inv_cov"])
def test_closed_form_does_not_depend_on_the_weighting_root(
    kind: str,
    lin: sensitivity.LinearizedModel,
    rng: np.random.Generator,
) -> None:
    cov = noise.covariance(NoiseModel.two_source(10.0, 5.0), lin.mod_star)
    scheme = ident.WeightingScheme.from_covariance(kind, cov)
    noise_vector = 10.0 * rng.standard_normal(N)
    expected = sensitivity.reidentify_linear(lin, scheme, lin.mod_star, noise_vector)

    p_star = lin.p_star.as_array()
    jac = lin.jacobian * p_star
    b = noise_vector + jac @ np.ones(ident.N_PARAMS)
    symmetric = scheme.factor if scheme.factor.ndim == 2 else np.diag(scheme.factor)
    cholesky = np.linalg.cholesky(scheme.matrix).T
    np.testing.assert_allclose(symmetric.T @ symmetric, scheme.matrix, rtol=1e-10, atol=1e-14)
    np.testing.assert_allclose(cholesky.T @ cholesky, scheme.matrix, rtol=1e-10, atol=1e-14)
    # A scaled root whitens W up to a constant factor, which leaves the minimizer unchanged.
    for root in (symmetric, cholesky, 3.0 * cholesky):
        q, *_ = np.linalg.lstsq(root @ jac, root @ b, rcond=None)
        np.testing.assert_allclose(q * p_star, expected, rtol=1e-8)


def test_closed_form_equals_lm_on_the_linearized_model(lin: sensitivity.LinearizedModel) -> None:
    model = NoiseModel.two_source(10.0, 5.0)
    scheme = ident.WeightingScheme.from_covariance("full_inv_cov", noise.covariance(model, lin.mod_star))
    noises = noise.sample_noise_batch(model, lin.mod_star, 21, range(50))
    closed = sensitivity.reidentify_linear_batch(lin, scheme, lin.mod_star, noises)

    def evaluate(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return lin.response(x), lin.jacobian

    for row, expected in zip(noises, closed, strict=True):
        result = ident.lm_minimize(evaluate, lin.mod_star + row, scheme, lin.p_star.as_array(), nonnegative=False)
        assert result.converged
        np.testing.assert_allclose(result.x, expected, rtol=1e-8)


@pytest.mark.timeout(120)
def test_cloud_files_do_not_depend_on_workers(
    lin: sensitivity.LinearizedModel,
    material: MaterialParams,
    tmp_path: Path,
) -> None:
    model = NoiseModel.two_source(10.0, 5.0)
    specs = metric.benchmark_specs(material, MetricConfig(n_steps=8))
    texts = []
    for workers in (1, 2):
        reports = sensitivity.compare_schemes(
            lin, model, lin.mod_star, ["identity", "full_inv_cov"], 60, 13, specs=specs, chunk_size=16, workers=workers
        )
        out = tmp_path / str(workers)
        for kind, report in reports.items():
            data_io.write_cloud_csv(out / f"cloud_{kind}.csv", report)
        data_io.write_summary_csv(out / "summary.csv", reports)
        texts.append({path.name: path.read_bytes() for path in sorted(out.iterdir())})
    assert texts[0] == texts[1]


def test_linearize_requires_converged_fit(
    truth: HardeningParams,
    material: MaterialParams,
    small_program: StrainProgram,
) -> None:
    fit = ident.FitResult(truth, 1.0, 200, np.zeros((20, 6)), converged=False, response=np.zeros(20), message="budget")
    with pytest.raises(NonConvergenceError):
        sensitivity.linearize(fit, material, small_program)


@pytest.mark.timeout(120)
def test_linearize_at_builds_model(
    truth: HardeningParams,
    material: MaterialParams,
    small_program: StrainProgram,
) -> None:
    lin = sensitivity.linearize_at(truth, material, small_program)
    assert lin.n == small_program.n_points
    np.testing.assert_allclose(lin.response(truth), lin.mod_star)


@pytest.mark.slow
@pytest.mark.timeout(600)
def test_nonlinear_path_agrees_with_linear_for_small_noise(
    truth: HardeningParams,
    material: MaterialParams,
    small_program: StrainProgram,
) -> None:
    lin = sensitivity.linearize_at(truth, material, small_program)
    model = NoiseModel.white(0.01)
    scheme = ident.WeightingScheme.identity(lin.n)
    linear = sensitivity.generate_cloud(lin, scheme, model, lin.mod_star, 2, 0)
    path = sensitivity.NonlinearPath(material, small_program)
    nonlinear = sensitivity.generate_cloud(lin, scheme, model, lin.mod_star, 2, 0, nonlinear=path)
    np.testing.assert_allclose(
        nonlinear / truth.as_array(),
        linear / truth.as_array(),
        atol=1e-2,
    )


# --- Default synthetic experiment ---

KINDS = ("identity", "diag_inv_cov", "full_inv_cov")


@pytest.fixture(scope="module")
def default_setup() -> tuple[sensitivity.LinearizedModel, dict[int, metric.MetricSpec]]:
    """Linearization at the reference parameters on the default torsion program."""
    material = MaterialParams()
    program, _ = torsion_program(
        constants.TORSION_MAX_SHEAR,
        constants.TORSION_REVERSALS,
        constants.TORSION_POINTS,
        constants.TORSION_DURATION,
        constants.TORSION_SUBSTEPS,
    )
    lin = sensitivity.linearize_at(HardeningParams(), material, program)
    return lin, metric.benchmark_specs(material, MetricConfig())


@pytest.fixture(scope="module")
def default_reports(
    default_setup: tuple[sensitivity.LinearizedModel, dict[int, metric.MetricSpec]],
) -> dict[str, sensitivity.CloudReport]:
    lin, specs = default_setup
    model = NoiseModel.two_source(constants.SIGMA_UNCORRELATED, constants.SIGMA_CORRELATED)
    return sensitivity.compare_schemes(lin, model, lin.mod_star, KINDS, 2000, 0, specs=specs, workers=2)


@pytest.mark.slow
@pytest.mark.timeout(3600)
def test_inverse_covariance_weighting_shrinks_the_cloud(default_reports: dict[str, sensitivity.CloudReport]) -> None:
    for which in (1, 2):
        full = default_reports["full_inv_cov"].size_per_history[which]
        identity = default_reports["identity"].size_per_history[which]
        diagonal = default_reports["diag_inv_cov"].size_per_history[which]
        smaller = min(identity, diagonal)
        assert full < smaller - 0.1 * smaller
        assert abs(identity - diagonal) <= 0.05 * smaller


@pytest.mark.slow
@pytest.mark.timeout(3600)
def test_cloud_size_hardly_depends_on_the_history(default_reports: dict[str, sensitivity.CloudReport]) -> None:
    for report in default_reports.values():
        first, second = report.size_per_history[1], report.size_per_history[2]
        assert abs(first - second) <= 0.05 * min(first, second)


@pytest.mark.slow
@pytest.mark.timeout(3600)
def test_kinematic_saturation_parameters_are_the_least_sensitive(
    default_reports: dict[str, sensitivity.CloudReport],
) -> None:
    for report in default_reports.values():
        assert set(np.argsort(report.variances)[:2]) == {4, 5}


@pytest.mark.slow
@pytest.mark.timeout(3600)
def test_cloud_size_converges_with_the_number_of_instances(
    default_setup: tuple[sensitivity.LinearizedModel, dict[int, metric.MetricSpec]],
) -> None:
    lin, specs = default_setup
    model = NoiseModel.two_source(constants.SIGMA_UNCORRELATED, constants.SIGMA_CORRELATED)
    cov = noise.covariance(model, lin.mod_star)
    scheme = ident.WeightingScheme.from_covariance("full_inv_cov", cov)
    cloud = sensitivity.generate_cloud(lin, scheme, model, lin.mod_star, constants.N_NOISE, 0)
    distances = metric.mechanics_distances(lin.p_star, cloud, specs[1], workers=2)
    # Instance j draws from its own stream, so the first 2 500 rows are the smaller run.
    assert distances[:2500].mean() == pytest.approx(distances.mean(), rel=0.02)
