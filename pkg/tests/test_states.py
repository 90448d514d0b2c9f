"""
Tests for grids and the analytic states |L⟩, |B⟩, the far-field evolved box
and their superposition.
"""

import math

import numpy as np
import pytest

from app.errors import DegenerateSuperpositionError, DomainError, InvalidArgumentError, InvalidGridError
from app.physics.states import (
    Grid,
    WaveFunction,
    box_position_state,
    cell_overlap,
    default_grid,
    evolved_position_state,
    gaussian_position_state,
    overlap,
    sinc,
    sinc_momentum_state,
    slit_substitute_sigma,
    superposition,
)
from app.settings import LabSettings


def modulus_distance(psi_a: WaveFunction, psi_b: WaveFunction) -> float:
    """Σ(|a| - |b|)² dx, the squared L² distance between the two moduli."""
    diff = np.abs(psi_a.amplitudes) - np.abs(psi_b.amplitudes)
    return float(np.sum(diff**2) * psi_a.grid.dx)


class TestGrid:
    """Tests for Grid and default_grid."""

    def test_centered_grid_has_origin_on_a_sample(self):
        grid = Grid.centered(8, 0.5)
        assert grid.x_min == -2.0
        assert 0.0 in grid.positions
        assert grid.x_max == 1.5

    def test_half_width_counts_the_edge_half_cell(self):
        grid = Grid.centered(8, 0.5)
        assert grid.half_width == pytest.approx(1.75)

    @pytest.mark.parametrize("n_points, dx", [(1, 1e-6), (16, 0.0), (16, -1e-6), (16, math.nan)])
    def test_rejects_degenerate_grids(self, n_points, dx):
        with pytest.raises(InvalidGridError):
            Grid.centered(n_points, dx)

    def test_default_grid_for_reference_geometry(self, ref_params, ref_grid):
        """129 cells per slit, power-of-two size reaching 100 sinc lobes."""
        assert ref_grid.dx == pytest.approx(ref_params.slit_L / 129)
        assert ref_grid.n_points == 2**19
        lobe = 2 * 1.054571817e-34 / ref_params.momentum_B
        assert ref_grid.half_width >= 100 * lobe

    def test_slit_edges_fall_on_cell_boundaries(self, ref_params, ref_grid):
        weights = ref_grid.cell_weights(-0.5 * ref_params.slit_L, 0.5 * ref_params.slit_L)
        assert set(np.unique(weights)) == {0.0, 1.0}
        assert weights.sum() == 129

    def test_partial_cells_get_their_covered_fraction(self):
        weights = cell_overlap(-2.0, 1.0, 5, -1.25, 0.75)
        assert weights == pytest.approx([0.0, 0.75, 1.0, 0.25, 0.0])

    def test_default_grid_honours_exponent_cap(self, ref_params):
        with pytest.raises(InvalidGridError):
            default_grid(ref_params, LabSettings(grid_exponent_cap=18))


class TestBoxPositionState:
    """Tests for box_position_state."""

    def test_unit_norm(self, psi_L):
        assert psi_L.norm() == pytest.approx(1.0, abs=1e-12)

    def test_uniform_amplitude_inside_slit(self, psi_L, ref_params):
        inside = np.abs(psi_L.grid.positions) < 0.5 * ref_params.slit_L
        assert np.allclose(psi_L.amplitudes[inside], 1.0 / math.sqrt(ref_params.slit_L))
        assert np.all(psi_L.amplitudes[~inside] == 0)

    def test_partial_edge_cells_keep_norm(self):
        """A slit whose edges cut through cells still integrates to one."""
        grid = Grid.centered(1024, 1e-6)
        psi = box_position_state(47.3e-6, grid)
        assert psi.norm() == pytest.approx(1.0, abs=1e-12)

    def test_rejects_coarse_grid(self):
        with pytest.raises(InvalidGridError):
            box_position_state(47e-6, Grid.centered(1024, 10e-6))

    def test_rejects_grid_narrower_than_slit(self):
        with pytest.raises(InvalidGridError):
            box_position_state(47e-6, Grid.centered(32, 1e-6))

    def test_rejects_non_positive_width(self, small_grid):
        with pytest.raises(InvalidArgumentError):
            box_position_state(0.0, small_grid)


class TestSincMomentumState:
    """Tests for sinc_momentum_state."""

    def test_unit_norm(self, psi_B):
        assert psi_B.norm() == pytest.approx(1.0, abs=1e-12)

    def test_real_and_even(self, psi_B):
        assert psi_B.is_real()
        # centered grid: index n/2 is x = 0, so mirror the samples around it
        amps = psi_B.amplitudes.real
        mid = psi_B.grid.n_points // 2
        assert np.allclose(amps[mid + 1 : mid + 1000], amps[mid - 1 : mid - 1000 : -1])

    def test_first_zero(self, psi_B, ref_params, ctx):
        """Zeros sit at multiples of 2πħ/B."""
        x0 = 2 * math.pi * ctx.hbar / ref_params.momentum_B
        value = np.interp(x0, psi_B.grid.positions, psi_B.amplitudes.real)
        assert abs(value) < 1e-3 * abs(psi_B.amplitudes.real).max()

    def test_rejects_narrow_grid(self, ref_params, small_grid):
        """A millimetre-wide grid cannot hold 50 sinc lobes of the reference B."""
        with pytest.raises(InvalidGridError):
            sinc_momentum_state(ref_params.momentum_B, small_grid)

    def test_sinc_series_branch(self):
        u = np.array([0.0, 1e-6, -1e-5, 1.0])
        assert sinc(u) == pytest.approx([1.0, 1.0, 1.0, math.sin(1.0)])


class TestOverlapAndSuperposition:
    """Tests for overlap and superposition."""

    def test_reference_overlap(self, psi_L, psi_B):
        """⟨L|B⟩ ≈ √(LB/2πħ) for a narrow product."""
        ov = overlap(psi_L, psi_B)
        assert ov.real == pytest.approx(0.147, abs=0.002)
        assert abs(ov.imag) < 1e-12

    def test_overlap_is_hermitian(self, psi_L, psi_B):
        assert overlap(psi_B, psi_L) == pytest.approx(overlap(psi_L, psi_B).conjugate())

    def test_superposition_is_normalized(self, psi_0):
        assert psi_0.norm() == pytest.approx(1.0, abs=1e-10)

    def test_degenerate_superposition(self, small_grid):
        psi = box_position_state(47e-6, small_grid)
        with pytest.raises(DegenerateSuperpositionError):
            superposition(psi, psi.scaled(-1.5))

    def test_complex_overlap_is_rejected(self, small_grid):
        psi = box_position_state(47e-6, small_grid)
        with pytest.raises(InvalidArgumentError):
            superposition(psi, psi.scaled(1j))

    def test_mismatched_grids(self, small_grid):
        a = box_position_state(47e-6, small_grid)
        b = box_position_state(47e-6, Grid.centered(2048, 1e-6))
        with pytest.raises(InvalidArgumentError):
            overlap(a, b)


class TestEvolvedPositionState:
    """Tests for the far-field form of the evolved box."""

    def test_matches_sinc_state_at_matching_time(self, ref_params, ref_grid, ctx, psi_B):
        """At t = t_M the evolved box has the modulus of |B⟩ since mL/t_M = B."""
        evolved = evolved_position_state(ref_params.slit_L, ref_params.t_M, ctx, ref_grid)
        assert modulus_distance(evolved, psi_B) < 1e-3

    def test_unit_norm(self, ref_params, ref_grid, ctx):
        evolved = evolved_position_state(ref_params.slit_L, 1.4 * ref_params.t_M, ctx, ref_grid)
        assert evolved.norm() == pytest.approx(1.0, abs=1e-10)

    def test_near_field_is_rejected(self, ref_params, ref_grid, ctx):
        t_min = ctx.effective_mass * ref_params.slit_L**2 / ctx.planck_h
        with pytest.raises(DomainError):
            evolved_position_state(ref_params.slit_L, 0.5 * t_min, ctx, ref_grid)


class TestGaussianAndTranslate:
    """Tests for the Gaussian stand-in and the sub-cell translation."""

    def test_gaussian_moments(self, small_grid):
        psi = gaussian_position_state(20e-6, small_grid, center=30e-6)
        assert psi.norm() == pytest.approx(1.0, abs=1e-12)
        assert psi.mean_position() == pytest.approx(30e-6, rel=1e-6)
        variance = np.sum((small_grid.positions - 30e-6) ** 2 * psi.density) * small_grid.dx
        assert math.sqrt(variance) == pytest.approx(20e-6, rel=1e-3)

    def test_slit_substitute_width(self):
        assert slit_substitute_sigma(12e-6) == pytest.approx(12e-6 / math.sqrt(12))

    def test_amplitudes_are_read_only(self, small_grid):
        psi = gaussian_position_state(20e-6, small_grid)
        with pytest.raises(ValueError):
            psi.amplitudes[0] = 1.0
