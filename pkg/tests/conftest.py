"""
Shared fixtures: the reference geometry (800 nm, L = 47 µm, L′ = 37 µm, f = 10 cm) and its states.

The reference grid is 2**19 points, so everything derived from it is session-scoped.
"""

import pytest

from app.physics.constants import make_context, make_params
from app.physics.design import DefectEvaluator
from app.physics.states import Grid, box_position_state, default_grid, sinc_momentum_state, superposition

REF_WAVELENGTH = 800e-9
REF_L = 47e-6
REF_LPRIME = 37e-6
REF_F = 0.10


@pytest.fixture(scope="session")
def ctx():
    return make_context(REF_WAVELENGTH)


@pytest.fixture(scope="session")
def ref_params(ctx):
    return make_params(REF_L, REF_LPRIME, REF_F, ctx)


@pytest.fixture(scope="session")
def ref_grid(ref_params):
    return default_grid(ref_params)


@pytest.fixture(scope="session")
def psi_L(ref_params, ref_grid):
    return box_position_state(ref_params.slit_L, ref_grid)


@pytest.fixture(scope="session")
def psi_B(ref_params, ref_grid, ctx):
    return sinc_momentum_state(ref_params.momentum_B, ref_grid, ctx.hbar)


@pytest.fixture(scope="session")
def psi_0(psi_L, psi_B):
    return superposition(psi_L, psi_B)


@pytest.fixture(scope="session")
def ideal_evaluator(ref_params, ref_grid):
    return DefectEvaluator(ref_params, 1.0, ref_grid)


@pytest.fixture(scope="session")
def measured_evaluator(ref_params, ref_grid):
    return DefectEvaluator(ref_params, 0.85, ref_grid)


@pytest.fixture(scope="session")
def small_grid():
    """Cheap grid for state-independent properties: 1024 points of 1 µm."""
    return Grid.centered(1024, 1e-6)
