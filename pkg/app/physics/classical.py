"""
Straight-line classical oracle.

Samples joint initial conditions (x0, pₓ), moves every sample on the line
x(t) = x0 + pₓt/m and measures the same three interval probabilities as
the quantum pipeline. Because every sample inside both the L and B windows
lands inside M, the empirical defect can never be positive.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Annotated, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, model_validator

from app.errors import InvalidArgumentError
from app.physics.constants import PhotonContext
from app.physics.probabilities import IntervalProbabilityReport, m_width

logger = logging.getLogger(__name__)

# Samples drawn per independent sub-stream of the seed.
CHUNK_SIZE = 65_536


# --- Distribution descriptors ---


class UniformProduct(BaseModel):
    """Independent uniform laws on [x_lo, x_hi] and [p_lo, p_hi]."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    kind: Literal["uniform"] = "uniform"
    x_lo: float
    x_hi: float
    p_lo: float
    p_hi: float

    @model_validator(mode="after")
    def _check_bounds(self) -> "UniformProduct":
        if not (self.x_lo <= self.x_hi and self.p_lo <= self.p_hi):
            raise ValueError("uniform bounds must satisfy lo <= hi")
        return self


class CorrelatedGaussian(BaseModel):
    """Bivariate normal law with correlation rho between x0 and pₓ."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    kind: Literal["gaussian"] = "gaussian"
    mean_x: float = 0.0
    mean_p: float = 0.0
    sigma_x: float = Field(..., gt=0)
    sigma_p: float = Field(..., gt=0)
    rho: float = Field(default=0.0, ge=-1, le=1)


class PointMassMixture(BaseModel):
    """Weighted mixture of point masses at (x0, pₓ)."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    kind: Literal["point_masses"] = "point_masses"
    points: list[tuple[float, float]] = Field(..., min_length=1)
    weights: list[float] | None = None

    @model_validator(mode="after")
    def _check_weights(self) -> "PointMassMixture":
        if self.weights is not None:
            if len(self.weights) != len(self.points):
                raise ValueError("weights and points must have equal lengths")
            if any(w < 0 for w in self.weights) or sum(self.weights) <= 0:
                raise ValueError("weights must be non-negative with a positive sum")
        return self

    def normalized_weights(self) -> np.ndarray:
        w = np.ones(len(self.points)) if self.weights is None else np.asarray(self.weights, dtype=float)
        return w / w.sum()


DistributionSpec = Annotated[UniformProduct | CorrelatedGaussian | PointMassMixture, Field(discriminator="kind")]
_SPEC_ADAPTER = TypeAdapter(DistributionSpec)


def parse_distribution(spec: DistributionSpec | dict) -> UniformProduct | CorrelatedGaussian | PointMassMixture:
    """Validate a descriptor given as a model or a plain dict.

    Raises:
        InvalidArgumentError: For unknown kinds or malformed fields.
    """
    if isinstance(spec, UniformProduct | CorrelatedGaussian | PointMassMixture):
        return spec
    try:
        return _SPEC_ADAPTER.validate_python(spec)
    except ValidationError as e:
        raise InvalidArgumentError(f"Unknown or malformed distribution spec: {e}") from e


# --- Ensembles ---


@dataclass(frozen=True, eq=False)
class ClassicalEnsemble:
    """Joint samples of initial position x0 (m) and transverse momentum pₓ (kg·m/s)."""

    x0: np.ndarray = field(repr=False)
    px: np.ndarray = field(repr=False)
    seed: int
    distribution_tag: str

    def __post_init__(self):
        if self.x0.shape != self.px.shape or self.x0.ndim != 1 or self.x0.size < 1:
            raise InvalidArgumentError("An ensemble needs matching 1-D arrays with at least one sample.")
        if not (np.all(np.isfinite(self.x0)) and np.all(np.isfinite(self.px))):
            raise InvalidArgumentError("Ensemble samples must be finite.")

    def __len__(self) -> int:
        return int(self.x0.size)


def _draw(spec, rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(spec, UniformProduct):
        return rng.uniform(spec.x_lo, spec.x_hi, n), rng.uniform(spec.p_lo, spec.p_hi, n)
    if isinstance(spec, CorrelatedGaussian):
        z1, z2 = rng.standard_normal(n), rng.standard_normal(n)
        x = spec.mean_x + spec.sigma_x * z1
        p = spec.mean_p + spec.sigma_p * (spec.rho * z1 + math.sqrt(1.0 - spec.rho**2) * z2)
        return x, p
    points = np.asarray(spec.points, dtype=float)
    idx = rng.choice(len(points), size=n, p=spec.normalized_weights())
    return points[idx, 0], points[idx, 1]


def sample_joint(spec: DistributionSpec | dict, n: int, seed: int) -> ClassicalEnsemble:
    """Draw n joint samples, deterministic for a given seed.

    The seed is split into one independent stream per chunk of CHUNK_SIZE
    samples, so chunks could be drawn in any order with identical results.
    """
    if n < 1:
        raise InvalidArgumentError(f"Sample count must be at least 1, got {n}.")
    spec = parse_distribution(spec)
    n_chunks = math.ceil(n / CHUNK_SIZE)
    streams = np.random.SeedSequence(seed).spawn(n_chunks)
    xs, ps = [], []
    for k, stream in enumerate(streams):
        size = min(CHUNK_SIZE, n - k * CHUNK_SIZE)
        x, p = _draw(spec, np.random.default_rng(stream), size)
        xs.append(x)
        ps.append(p)
    return ClassicalEnsemble(np.concatenate(xs), np.concatenate(ps), seed, spec.kind)


# --- Reports ---


class ClassicalReport(IntervalProbabilityReport):
    """Empirical interval probabilities with their binomial standard errors."""

    n_samples: int = Field(..., ge=1)
    sigma_L: float = Field(..., ge=0)
    sigma_B: float = Field(..., ge=0)
    sigma_M: float = Field(..., ge=0)
    sigma_defect: float = Field(..., ge=0, description="Standard error of the defect (components added in quadrature).")


def binomial_sigma(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def _memberships(x0, px, L, B, t, ctx):
    velocity_scale = t / ctx.effective_mass
    M = m_width(L, B, t, ctx)
    in_L = np.abs(x0) < 0.5 * L
    in_B = np.abs(px) < 0.5 * B
    in_M = np.abs(x0 + px * velocity_scale) < 0.5 * M
    return in_L, in_B, in_M, M


def inclusion_holds(ens: ClassicalEnsemble, L: float, B: float, t: float, ctx: PhotonContext) -> np.ndarray:
    """Per-sample check of (x0 ∈ L and pₓ ∈ B) ⇒ x(t) ∈ M."""
    in_L, in_B, in_M, _ = _memberships(ens.x0, ens.px, L, B, t, ctx)
    return ~(in_L & in_B) | in_M


def _weighted_report(in_L, in_B, in_M, weights, M, t, n_eff) -> ClassicalReport:
    p_L = float(np.sum(weights * in_L))
    p_B = float(np.sum(weights * in_B))
    p_M = float(np.sum(weights * in_M))
    rhs = p_L + p_B - 1.0
    sigmas = [binomial_sigma(p, n_eff) for p in (p_L, p_B, p_M)]
    return ClassicalReport(
        p_L=p_L,
        p_B=p_B,
        p_M=p_M,
        bound_rhs=rhs,
        defect=rhs - p_M,
        t=t,
        M_width=M,
        visibility=0.0,
        n_samples=n_eff,
        sigma_L=sigmas[0],
        sigma_B=sigmas[1],
        sigma_M=sigmas[2],
        sigma_defect=math.sqrt(sum(s * s for s in sigmas)),
    )


def straightline_report(ens: ClassicalEnsemble, L: float, B: float, t: float, ctx: PhotonContext) -> ClassicalReport:
    """Empirical P(L), P(B), P(M, t) and defect of an ensemble moving on straight lines.

    Interval membership uses strict inequalities, matching open intervals.
    """
    in_L, in_B, in_M, M = _memberships(ens.x0, ens.px, L, B, t, ctx)
    n = len(ens)
    return _weighted_report(in_L, in_B, in_M, np.full(n, 1.0 / n), M, t, n)


# --- Adversarial search ---


class AdversarialResult(BaseModel):
    """Worst case found by the hill climb over point-mass mixtures."""

    worst_defect: float = Field(..., description="Largest exact defect found.")
    points: list[tuple[float, float]]
    weights: list[float]
    restarts: int


def _mixture_defect(points: np.ndarray, weights: np.ndarray, L, B, t, ctx) -> float:
    in_L, in_B, in_M, _ = _memberships(points[:, 0], points[:, 1], L, B, t, ctx)
    w = weights / weights.sum()
    return float(np.sum(w * in_L) + np.sum(w * in_B) - 1.0 - np.sum(w * in_M))


def adversarial_search(
    L: float,
    B: float,
    t: float,
    ctx: PhotonContext,
    iterations: int,
    *,
    n_points: int = 6,
    steps: int = 200,
    seed: int = 0,
) -> AdversarialResult:
    """Random-restart hill climb for the mixture of point masses with the largest defect.

    Each restart draws n_points masses around the L × B box and then keeps
    any single-point move or reweighting that does not lower the defect.
    Defects are exact for a finite mixture, so no sampling noise enters.
    """
    if iterations < 1:
        raise InvalidArgumentError(f"iterations must be at least 1, got {iterations}.")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    scale = np.array([L, B])
    best_value, best_points, best_weights = -math.inf, None, None

    for _ in range(iterations):
        points = rng.uniform(-1.0, 1.0, (n_points, 2)) * scale
        weights = rng.dirichlet(np.ones(n_points))
        value = _mixture_defect(points, weights, L, B, t, ctx)
        for _ in range(steps):
            trial_points, trial_weights = points.copy(), weights.copy()
            k = rng.integers(n_points)
            if rng.random() < 0.7:
                trial_points[k] += rng.normal(0.0, 0.25, 2) * scale
            else:
                trial_weights[k] *= math.exp(rng.normal(0.0, 0.5))
            trial_value = _mixture_defect(trial_points, trial_weights, L, B, t, ctx)
            if trial_value >= value:
                points, weights, value = trial_points, trial_weights, trial_value
        if value > best_value:
            best_value, best_points, best_weights = value, points, weights / weights.sum()

    logger.info(f"Adversarial search over {iterations} restarts: worst defect {best_value:.3e}")
    return AdversarialResult(
        worst_defect=best_value,
        points=[tuple(map(float, p)) for p in best_points],
        weights=[float(w) for w in best_weights],
        restarts=iterations,
    )


def point_mass_report(spec: PointMassMixture, L: float, B: float, t: float, ctx: PhotonContext) -> ClassicalReport:
    """Exact (noise-free) report of a finite point-mass mixture."""
    points = np.asarray(spec.points, dtype=float)
    in_L, in_B, in_M, M = _memberships(points[:, 0], points[:, 1], L, B, t, ctx)
    return _weighted_report(in_L, in_B, in_M, spec.normalized_weights(), M, t, len(points))
