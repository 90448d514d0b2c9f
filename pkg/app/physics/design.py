"""
Experiment design: the defect-versus-distance curve and the searches for the
best observation distance and the best LB product.
"""

import logging
import math
from collections.abc import Sequence

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy.optimize import minimize_scalar

from app.errors import DomainError, InvalidArgumentError
from app.physics.constants import ExperimentParams, PhotonContext, params_from_lb_fraction
from app.physics.probabilities import (
    IntervalProbabilityReport,
    defect_probability,
    integrate_density,
    m_width,
    mixed_density,
    momentum_visibility_density,
)
from app.physics.propagator import FreePropagator
from app.physics.states import Grid, box_position_state, default_grid, sinc_momentum_state
from app.settings import LabSettings

logger = logging.getLogger(__name__)

# Coarse scan used before golden-section refinement.
COARSE_Z_RANGE = (0.5, 10.0)
COARSE_Z_POINTS = 50

# Narrower scan used inside the LB-product search, where the optimum sits near z_M.
PRODUCT_Z_RANGE = (0.5, 3.0)
PRODUCT_Z_POINTS = 16

LB_SEARCH_RANGE = (0.01, 0.05)
LB_COARSE_STEP = 0.004

# Phase by which the Fraunhofer sinc of the slit arm lags the propagated box of
# the momentum arm at the centre of M.
FAR_FIELD_PHASE = math.pi / 4


class DefectCurve(BaseModel):
    """Defect probability sampled against the scaled distance z/z_M."""

    scaled_z: list[float] = Field(..., description="Sample positions z/z_M, strictly increasing.")
    defect: list[float] = Field(..., description="Defect probability at each sample.")
    visibility: float = Field(..., ge=0, le=1, description="Visibility of the density model.")
    params: ExperimentParams

    @model_validator(mode="after")
    def _check_samples(self) -> "DefectCurve":
        if len(self.scaled_z) != len(self.defect):
            raise ValueError("scaled_z and defect must have equal lengths")
        if any(b <= a for a, b in zip(self.scaled_z, self.scaled_z[1:])):
            raise ValueError("scaled_z must be strictly increasing")
        return self

    def argmax(self) -> int:
        return int(np.argmax(self.defect))


class OptimizationResult(BaseModel):
    """Location and height of the defect maximum."""

    optimal_scaled_z: float = Field(..., description="Best observation distance z/z_M.")
    optimal_lb_fraction: float = Field(..., description="LB/(2πħ) at the optimum.")
    max_defect: float = Field(..., description="Defect probability at the optimum.")
    tolerance: float = Field(..., gt=0, description="Search resolution of the reported optimum.")
    optimal_z: float = Field(..., gt=0, description="Physical distance of the optimum (m).")
    visibility: float = Field(default=1.0, ge=0, le=1)
    multimodal: bool = Field(default=False, description="Coarse scan showed more than one local maximum.")


class DefectEvaluator:
    """Defect probability of the two-arm state for one geometry and visibility.

    P(L) and P(B) are fixed at construction; each evaluation propagates both
    arms to the requested distance and integrates the mixed density over M.
    """

    def __init__(self, params: ExperimentParams, visibility: float = 1.0, grid: Grid | None = None):
        self.params = params
        self.visibility = visibility
        self.ctx: PhotonContext = params.context()
        self.grid = grid or default_grid(params)

        psi_L = box_position_state(params.slit_L, self.grid)
        psi_B = sinc_momentum_state(params.momentum_B, self.grid, self.ctx.hbar)
        self._arm_L = FreePropagator(psi_L, self.ctx)
        self._arm_B = FreePropagator(psi_B, self.ctx)

        half_L, half_B = 0.5 * params.slit_L, 0.5 * params.momentum_B
        density_0 = mixed_density(psi_L.amplitudes, psi_B.amplitudes, visibility, self.grid.dx)
        self.p_L = integrate_density(density_0, self.grid, -half_L, half_L)
        p_grid, p_density = momentum_visibility_density(psi_L, psi_B, visibility)
        self.p_B = integrate_density(p_density, p_grid, -half_B, half_B)
        logger.debug(f"Evaluator lb={params.lb_fraction:.4f} V={visibility}: P(L)={self.p_L:.4f} P(B)={self.p_B:.4f}")

    def arms_at(self, scaled_z: float):
        """Both arms propagated to z = scaled_z·z_M."""
        t = scaled_z * self.params.t_M
        return self._arm_L.at(t), self._arm_B.at(t)

    def density_at(self, scaled_z: float) -> np.ndarray:
        psi_L, psi_B = self.arms_at(scaled_z)
        return mixed_density(psi_L.amplitudes, psi_B.amplitudes, self.visibility, self.grid.dx)

    def report(self, scaled_z: float) -> IntervalProbabilityReport:
        """Full interval-probability report at z = scaled_z·z_M.

        Raises:
            DomainError: If z does not exceed the far-field boundary L²/λ.
        """
        z = scaled_z * self.params.z_M
        if not z > self.params.far_field_z:
            raise DomainError(f"z = {z:.3e} m is inside the far-field boundary {self.params.far_field_z:.3e} m.")
        t = scaled_z * self.params.t_M
        M = m_width(self.params.slit_L, self.params.momentum_B, t, self.ctx)
        p_M = integrate_density(self.density_at(scaled_z), self.grid, -0.5 * M, 0.5 * M)
        return defect_probability(
            self.p_L,
            self.p_B,
            p_M,
            t=t,
            M_width=M,
            params=self.params,
            visibility=self.visibility,
        )

    def defect(self, scaled_z: float) -> float:
        value = self.report(scaled_z).defect
        logger.debug(f"defect(z={scaled_z:.4f} z_M) = {value:.6f}")
        return value


def defect_curve(
    params: ExperimentParams,
    z_points: Sequence[float],
    V: float = 1.0,
    grid: Grid | None = None,
) -> DefectCurve:
    """Sample the defect at each scaled distance in z_points (units of z_M)."""
    evaluator = DefectEvaluator(params, V, grid)
    scaled = [float(z) for z in z_points]
    return DefectCurve(
        scaled_z=scaled,
        defect=[evaluator.defect(z) for z in scaled],
        visibility=V,
        params=params,
    )


def _count_local_maxima(values: np.ndarray) -> int:
    interior = (values[1:-1] > values[:-2]) & (values[1:-1] > values[2:])
    return int(np.sum(interior)) + int(values[0] > values[1]) + int(values[-1] > values[-2])


def _refine_max(objective, xs: np.ndarray, values: np.ndarray, resolution: float) -> tuple[float, float]:
    """Golden-section refinement of the sampled argmax, falling back to a fine scan."""
    i = int(np.argmax(values))
    if 0 < i < len(xs) - 1:
        try:
            result = minimize_scalar(
                lambda x: -objective(x),
                bracket=(xs[i - 1], xs[i], xs[i + 1]),
                method="golden",
                options={"xtol": resolution / (4.0 * abs(xs[i]))},
            )
            x_best = float(result.x)
            if xs[i - 1] <= x_best <= xs[i + 1] and -result.fun >= values[i]:
                return x_best, float(-result.fun)
        except ValueError as e:
            logger.warning(f"Golden-section bracket rejected ({e}); scanning instead")
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]
    fine = np.arange(lo, hi + 0.25 * resolution, 0.5 * resolution)
    fine_values = np.array([objective(x) for x in fine])
    j = int(np.argmax(fine_values))
    return float(fine[j]), float(fine_values[j])


def find_optimal_time(
    params: ExperimentParams,
    V: float = 1.0,
    grid: Grid | None = None,
    *,
    z_range: tuple[float, float] = COARSE_Z_RANGE,
    coarse_points: int = COARSE_Z_POINTS,
    resolution: float = 0.01,
) -> OptimizationResult:
    """Distance z/z_M that maximizes the defect for a fixed geometry."""
    evaluator = DefectEvaluator(params, V, grid)
    xs = np.linspace(z_range[0], z_range[1], coarse_points)
    values = np.array([evaluator.defect(x) for x in xs])

    multimodal = _count_local_maxima(values) > 1
    if multimodal:
        logger.warning(f"Defect curve for lb={params.lb_fraction:.4f} has several local maxima; refining the highest")
    best_z, best_defect = _refine_max(evaluator.defect, xs, values, resolution)
    return OptimizationResult(
        optimal_scaled_z=best_z,
        optimal_lb_fraction=params.lb_fraction,
        max_defect=best_defect,
        tolerance=resolution,
        optimal_z=best_z * params.z_M,
        visibility=V,
        multimodal=multimodal,
    )


def find_optimal_product(
    ctx: PhotonContext,
    slit_L: float,
    focal_f: float,
    V: float = 1.0,
    *,
    lb_range: tuple[float, float] = LB_SEARCH_RANGE,
    resolution: float = 0.001,
    settings: LabSettings | None = None,
) -> OptimizationResult:
    """LB/(2πħ) whose best observation distance gives the largest defect.

    L and f stay fixed and the momentum-arm slit L′ is varied, so the grid
    spacing stays fixed in units of L throughout the search. Each candidate
    uses the default grid built from settings.
    """
    lo, hi = lb_range
    if not 0 < lo < hi:
        raise InvalidArgumentError(f"LB search range must satisfy 0 < lo < hi, got {lb_range}.")

    cache: dict[float, OptimizationResult] = {}

    def best_for(lb: float) -> OptimizationResult:
        key = round(lb, 12)
        if key not in cache:
            params = params_from_lb_fraction(slit_L, lb, focal_f, ctx)
            cache[key] = find_optimal_time(
                params,
                V,
                default_grid(params, settings),
                z_range=PRODUCT_Z_RANGE,
                coarse_points=PRODUCT_Z_POINTS,
                resolution=0.01,
            )
            logger.debug(f"lb={lb:.4f}: best z={cache[key].optimal_scaled_z:.3f} defect={cache[key].max_defect:.5f}")
        return cache[key]

    n_coarse = max(3, int(round((hi - lo) / LB_COARSE_STEP)) + 1)
    xs = np.linspace(lo, hi, n_coarse)
    values = np.array([best_for(x).max_defect for x in xs])
    best_lb, _ = _refine_max(lambda lb: best_for(lb).max_defect, xs, values, resolution)

    best = best_for(best_lb)
    logger.info(
        f"Optimal product LB = {best_lb:.4f}·2πħ at z = {best.optimal_scaled_z:.3f} z_M, "
        f"defect {best.max_defect:.5f} (far-field model: LB = {far_field_optimal_product(V):.4f}·2πħ)"
    )
    return best.model_copy(
        update={"tolerance": resolution, "multimodal": best.multimodal or _count_local_maxima(values) > 1}
    )


def violation_range(curve: DefectCurve) -> tuple[float, float] | None:
    """Scaled distances bracketing the positive-defect region around the curve maximum.

    Zero crossings are located by linear interpolation; None means the curve
    never goes positive.
    """
    z = np.asarray(curve.scaled_z)
    d = np.asarray(curve.defect)
    if d.size == 0 or not np.any(d > 0):
        return None

    i = int(np.argmax(d))
    lo = i
    while lo > 0 and d[lo - 1] > 0:
        lo -= 1
    hi = i
    while hi < d.size - 1 and d[hi + 1] > 0:
        hi += 1

    def crossing(j_out: int, j_in: int) -> float:
        # linear zero between a non-positive and a positive sample
        return float(z[j_out] + (z[j_in] - z[j_out]) * (0.0 - d[j_out]) / (d[j_in] - d[j_out]))

    z_lo = crossing(lo - 1, lo) if lo > 0 else float(z[0])
    z_hi = crossing(hi + 1, hi) if hi < d.size - 1 else float(z[-1])
    return z_lo, z_hi


def far_field_defect(
    lb_fraction: float,
    scaled_z: float,
    visibility: float = 1.0,
    relative_phase: float = FAR_FIELD_PHASE,
) -> float:
    """Leading-order defect for LB/(2πħ) ≪ 1 with both arms in their far field.

    Over M the slit arm is its flat-topped Fraunhofer sinc and the momentum
    arm is a box of width Bt/m, so P(M) reduces to two arm terms and one
    cross term. The cross-term phase is relative_phase less the sinc
    curvature (π·lb/6)(z_M/z + 1 + z/z_M). The result is unchanged under
    z/z_M → z_M/z, so its maximum over distance sits at z_M.
    """
    if not (math.isfinite(lb_fraction) and lb_fraction > 0):
        raise InvalidArgumentError(f"lb_fraction must be positive, got {lb_fraction}.")
    if not (math.isfinite(scaled_z) and scaled_z > 0):
        raise InvalidArgumentError(f"scaled_z must be positive, got {scaled_z}.")
    if not 0.0 <= visibility <= 1.0:
        raise InvalidArgumentError(f"visibility must lie in [0, 1], got {visibility}.")

    root = math.sqrt(lb_fraction)
    norm = 1.0 + visibility * root
    rhs = (lb_fraction + visibility * root) / norm
    curvature = math.pi * lb_fraction / 6.0 * (1.0 / scaled_z + 1.0 + scaled_z)
    cross = 2.0 * visibility * math.cos(relative_phase - curvature) / math.sqrt(scaled_z)
    p_M = lb_fraction * (1.0 + scaled_z) * (1.0 / scaled_z + 1.0 + cross) / (2.0 * norm)
    return rhs - p_M


def far_field_optimal_product(
    visibility: float = 1.0,
    relative_phase: float = FAR_FIELD_PHASE,
    lb_range: tuple[float, float] = (0.005, 0.1),
) -> float:
    """LB/(2πħ) that maximizes far_field_defect at z = z_M."""
    result = minimize_scalar(
        lambda lb: -far_field_defect(lb, 1.0, visibility, relative_phase),
        bounds=lb_range,
        method="bounded",
        options={"xatol": 1e-5},
    )
    return float(result.x)


def tail_defect(params: ExperimentParams, V: float = 1.0, scaled_z: float = 50.0) -> float:
    """Defect far beyond z_M, where straight-line behaviour takes over again."""
    if not math.isfinite(scaled_z) or scaled_z <= 0:
        raise InvalidArgumentError(f"scaled_z must be positive, got {scaled_z}.")
    return DefectEvaluator(params, V).defect(scaled_z)
