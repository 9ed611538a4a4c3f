"""Shared test fixtures and configuration."""

from __future__ import annotations

import io

import numpy as np
import pytest
from rich.console import Console

from viscofit.config import HardeningParams, MaterialParams
from viscofit.services.loading import StrainProgram, torsion_program


def pytest_collection_modifyitems(items: list[pytest.Item]) -> None:
    """Set a default timeout for tests that do not declare their own."""
    for item in items:
        if item.get_closest_marker("timeout") is None:
            item.add_marker(pytest.mark.timeout(30))


@pytest.fixture
def mock_console() -> Console:
    """Provide a console that writes to a StringIO for testing."""
    return Console(file=io.StringIO(), width=120, force_terminal=True)


@pytest.fixture
def material() -> MaterialParams:
    """Default steel parameters."""
    return MaterialParams()


@pytest.fixture
def truth() -> HardeningParams:
    """Hardening parameters used to generate synthetic data."""
    return HardeningParams()


@pytest.fixture
def small_program() -> StrainProgram:
    """A torsion program with few observations that still reverses twice; the integrator refines its substeps."""
    program, _ = torsion_program(0.3, (0.2, -0.1, 0.25), n_points=20, duration=170.0, substeps=2)
    return program


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
