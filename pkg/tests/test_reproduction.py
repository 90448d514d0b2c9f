"""
Slow reproduction checks: the full LB-product search and repeated-seed fit statistics.

Deselected by default. Run with:
    uv run pytest tests/ -m slow -v
"""

import numpy as np
import pytest
from dotenv import load_dotenv

load_dotenv()

from app.physics.constants import make_context, make_params  # noqa: E402
from app.physics.design import far_field_optimal_product, find_optimal_product, find_optimal_time  # noqa: E402
from app.physics.fringes import FringeModel, fit_fringe, synthesize_fringe  # noqa: E402

pytestmark = pytest.mark.slow

SEEDS = range(20)


@pytest.fixture(scope="module")
def propagated_model(ref_params, ref_grid):
    return FringeModel(ref_params, z=1.4 * ref_params.z_M, plane="position", grid=ref_grid)


def fitted_visibilities(model: FringeModel, V: float, n_photons: int) -> np.ndarray:
    pixels = model.pixel_grid()
    fits = [fit_fringe(synthesize_fringe(model, V, pixels, n_photons, seed), model) for seed in SEEDS]
    return np.array([fit.visibility for fit in fits])


class TestOptimalProduct:
    """Tests for find_optimal_product."""

    def test_optimal_lb_fraction(self, ctx, ref_params):
        result = find_optimal_product(ctx, ref_params.slit_L, ref_params.focal_f, 1.0)
        assert result.optimal_lb_fraction == pytest.approx(far_field_optimal_product(), abs=0.004)
        assert result.tolerance <= 0.001
        assert result.max_defect > 0

    def test_equal_products_give_equal_maxima(self, ctx, ref_params):
        """Two (L, B) pairs with the same LB/2πħ reach the same best defect."""
        twin = make_params(2 * ref_params.slit_L, 0.5 * ref_params.slit_Lprime, ref_params.focal_f, ctx)
        base = find_optimal_time(ref_params, 1.0)
        other = find_optimal_time(twin, 1.0)
        assert other.max_defect == pytest.approx(base.max_defect, abs=1e-4)

    def test_optimum_is_wavelength_independent(self):
        """The best product is dimensionless, so the He-Ne line finds it too."""
        result = find_optimal_product(make_context(632.8e-9), 47e-6, 0.10, 1.0)
        assert result.optimal_lb_fraction == pytest.approx(far_field_optimal_product(), abs=0.004)


class TestFitStatistics:
    """Repeated-seed behaviour of the visibility fit."""

    def test_visibility_bias_at_one_million_photons(self, propagated_model):
        values = fitted_visibilities(propagated_model, 0.85, 10**6)
        assert abs(np.mean(values) - 0.85) < 0.01

    def test_error_shrinks_with_photon_number(self, propagated_model):
        errors = [
            np.median(np.abs(fitted_visibilities(propagated_model, 0.85, n) - 0.85)) for n in (10**4, 10**5, 10**6)
        ]
        assert errors[0] > errors[1] > errors[2]
