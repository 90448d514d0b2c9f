"""
Tests for the straight-line classical oracle: sampling, per-sample inclusion,
empirical reports and the adversarial search.
"""

import hypothesis as hyp
import hypothesis.strategies as st
import numpy as np
import pytest

from app.errors import InvalidArgumentError
from app.physics.classical import (
    CHUNK_SIZE,
    CorrelatedGaussian,
    PointMassMixture,
    UniformProduct,
    adversarial_search,
    binomial_sigma,
    inclusion_holds,
    parse_distribution,
    point_mass_report,
    sample_joint,
    straightline_report,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)
widths = st.floats(min_value=0.05, max_value=3.0)
scaled_times = st.floats(min_value=0.0, max_value=10.0)


@st.composite
def distributions(draw):
    """Uniform or Gaussian descriptors in units of L and B."""
    kind = draw(st.sampled_from(["uniform", "gaussian"]))
    if kind == "uniform":
        x = sorted(draw(st.lists(st.floats(-2.0, 2.0), min_size=2, max_size=2)))
        p = sorted(draw(st.lists(st.floats(-2.0, 2.0), min_size=2, max_size=2)))
        return {"kind": "uniform", "x_lo": x[0], "x_hi": x[1], "p_lo": p[0], "p_hi": p[1]}
    return {
        "kind": "gaussian",
        "mean_x": draw(st.floats(-1.0, 1.0)),
        "mean_p": draw(st.floats(-1.0, 1.0)),
        "sigma_x": draw(widths),
        "sigma_p": draw(widths),
        "rho": draw(st.floats(-0.99, 0.99)),
    }


def scaled_spec(raw: dict, L: float, B: float):
    """Turn a descriptor in units of (L, B) into SI units."""
    scale = {"x_lo": L, "x_hi": L, "mean_x": L, "sigma_x": L, "p_lo": B, "p_hi": B, "mean_p": B, "sigma_p": B}
    return parse_distribution({k: v * scale[k] if k in scale else v for k, v in raw.items()})


class TestSampling:
    """Tests for sample_joint and parse_distribution."""

    def test_same_seed_same_samples(self):
        spec = UniformProduct(x_lo=-1.0, x_hi=1.0, p_lo=-2.0, p_hi=2.0)
        a, b = sample_joint(spec, 1000, 7), sample_joint(spec, 1000, 7)
        assert np.array_equal(a.x0, b.x0) and np.array_equal(a.px, b.px)

    def test_different_seeds_differ(self):
        spec = UniformProduct(x_lo=-1.0, x_hi=1.0, p_lo=-2.0, p_hi=2.0)
        assert not np.array_equal(sample_joint(spec, 100, 1).x0, sample_joint(spec, 100, 2).x0)

    def test_chunks_are_independent_of_total_size(self):
        """The first chunk does not depend on how many samples follow it."""
        spec = CorrelatedGaussian(sigma_x=1.0, sigma_p=1.0, rho=0.3)
        short = sample_joint(spec, CHUNK_SIZE, 11)
        long = sample_joint(spec, CHUNK_SIZE + 500, 11)
        assert len(long) == CHUNK_SIZE + 500
        assert np.array_equal(long.x0[:CHUNK_SIZE], short.x0)

    def test_gaussian_correlation(self):
        ens = sample_joint(CorrelatedGaussian(sigma_x=2.0, sigma_p=0.5, rho=0.8), 200_000, 3)
        assert np.corrcoef(ens.x0, ens.px)[0, 1] == pytest.approx(0.8, abs=0.01)
        assert np.std(ens.x0) == pytest.approx(2.0, rel=0.01)

    def test_point_masses_follow_weights(self):
        spec = PointMassMixture(points=[(0.0, 0.0), (1.0, 1.0)], weights=[3.0, 1.0])
        ens = sample_joint(spec, 100_000, 5)
        assert np.mean(ens.x0 == 0.0) == pytest.approx(0.75, abs=0.01)
        assert ens.distribution_tag == "point_masses"

    def test_dict_descriptor(self):
        spec = parse_distribution({"kind": "gaussian", "sigma_x": 1.0, "sigma_p": 1.0})
        assert isinstance(spec, CorrelatedGaussian)

    @pytest.mark.parametrize(
        "raw",
        [
            {"kind": "cauchy", "scale": 1.0},
            {"kind": "uniform", "x_lo": 1.0, "x_hi": 0.0, "p_lo": 0.0, "p_hi": 1.0},
            {"kind": "gaussian", "sigma_x": -1.0, "sigma_p": 1.0},
            {"kind": "point_masses", "points": [[0.0, 0.0]], "weights": [1.0, 2.0]},
        ],
    )
    def test_malformed_descriptors(self, raw):
        with pytest.raises(InvalidArgumentError):
            parse_distribution(raw)

    def test_rejects_empty_sample(self):
        with pytest.raises(InvalidArgumentError):
            sample_joint(UniformProduct(x_lo=0, x_hi=1, p_lo=0, p_hi=1), 0, 1)


class TestStraightLineBound:
    """Straight lines can never violate P(L) + P(B) - 1 ≤ P(M)."""

    @hyp.settings(max_examples=40, deadline=None)
    @hyp.given(raw=distributions(), seed=seeds, scaled_t=scaled_times)
    def test_inclusion_holds_per_sample(self, ref_params, ctx, raw, seed, scaled_t):
        L, B = ref_params.slit_L, ref_params.momentum_B
        ens = sample_joint(scaled_spec(raw, L, B), 5_000, seed)
        assert inclusion_holds(ens, L, B, scaled_t * ref_params.t_M, ctx).all()

    @hyp.settings(max_examples=40, deadline=None)
    @hyp.given(raw=distributions(), seed=seeds, scaled_t=scaled_times)
    def test_empirical_defect_is_never_positive(self, ref_params, ctx, raw, seed, scaled_t):
        L, B = ref_params.slit_L, ref_params.momentum_B
        ens = sample_joint(scaled_spec(raw, L, B), 5_000, seed)
        report = straightline_report(ens, L, B, scaled_t * ref_params.t_M, ctx)
        assert report.defect <= 1e-9
        assert report.visibility == 0.0

    def test_report_carries_binomial_errors(self, ref_params, ctx):
        L, B = ref_params.slit_L, ref_params.momentum_B
        spec = UniformProduct(x_lo=-L, x_hi=L, p_lo=-B, p_hi=B)
        report = straightline_report(sample_joint(spec, 100_000, 9), L, B, ref_params.t_M, ctx)
        assert report.p_L == pytest.approx(0.5, abs=0.01)
        assert report.sigma_L == pytest.approx(binomial_sigma(report.p_L, 100_000))
        expected = np.sqrt(report.sigma_L**2 + report.sigma_B**2 + report.sigma_M**2)
        assert report.sigma_defect == pytest.approx(expected)
        assert report.n_samples == 100_000

    def test_binomial_sigma(self):
        assert binomial_sigma(0.5, 100) == pytest.approx(0.05)
        assert binomial_sigma(0.0, 100) == 0.0


class TestPointMasses:
    """Tests for point_mass_report and adversarial_search."""

    def test_single_mass_at_origin(self, ref_params, ctx):
        spec = PointMassMixture(points=[(0.0, 0.0)])
        report = point_mass_report(spec, ref_params.slit_L, ref_params.momentum_B, ref_params.t_M, ctx)
        assert (report.p_L, report.p_B, report.p_M) == (1.0, 1.0, 1.0)
        assert report.defect == 0.0

    def test_mass_outside_both_windows(self, ref_params, ctx):
        L, B = ref_params.slit_L, ref_params.momentum_B
        spec = PointMassMixture(points=[(L, B), (0.0, 0.0)])
        report = point_mass_report(spec, L, B, ref_params.t_M, ctx)
        assert report.p_L == pytest.approx(0.5)
        assert report.defect <= 0.0

    def test_adversary_cannot_beat_the_bound(self, ref_params, ctx):
        result = adversarial_search(ref_params.slit_L, ref_params.momentum_B, ref_params.t_M, ctx, 10, seed=4)
        assert result.worst_defect <= 1e-12
        assert sum(result.weights) == pytest.approx(1.0)
        assert len(result.points) == 6
        assert result.restarts == 10

    def test_adversary_is_reproducible(self, ref_params, ctx):
        args = (ref_params.slit_L, ref_params.momentum_B, 2 * ref_params.t_M, ctx, 3)
        assert adversarial_search(*args, seed=1) == adversarial_search(*args, seed=1)

    def test_adversary_needs_iterations(self, ref_params, ctx):
        with pytest.raises(InvalidArgumentError):
            adversarial_search(ref_params.slit_L, ref_params.momentum_B, ref_params.t_M, ctx, 0)
