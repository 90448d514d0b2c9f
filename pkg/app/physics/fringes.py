"""
Measurement-chain emulation: photon-counting fringe data and their fits.

A FringeModel holds the two arm profiles of the interferometer in one
detection plane (the slit image at z = 0, the propagated plane at z > 0,
or the focal plane of a Fourier lens for momentum). Datasets are drawn
from it with Poisson shot noise and fitted back with weighted nonlinear
least squares; the fitted visibility then yields P(L), P(B) and P(M, t).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field
from scipy.optimize import least_squares

from app.errors import DegenerateFitError, InvalidArgumentError
from app.physics.constants import ExperimentParams, z_to_t
from app.physics.probabilities import IntervalProbabilityReport, defect_probability, integrate_density, m_width
from app.physics.propagator import FreePropagator, lens_fourier_map
from app.physics.states import (
    Grid,
    box_position_state,
    default_grid,
    gaussian_position_state,
    sinc_momentum_state,
    slit_substitute_sigma,
)
from app.settings import get_settings

logger = logging.getLogger(__name__)

Plane = Literal["position", "momentum"]
Profile = Literal["box", "gaussian"]

MIN_INFORMATIVE_PIXELS = 6
DEFAULT_PIXELS = 400

# Pixel half-span in units of the widest arm lobe.
LOBE_SPAN = 2.0


# --- Data types ---


@dataclass(frozen=True, eq=False)
class FringeDataset:
    """Photon counts per detector pixel along one transverse line.

    profile records the slit profile of a synthesized dataset; recorded data
    read from disk leave it unset.
    """

    positions: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)
    z: float = 0.0
    label: str = ""
    profile: Profile | None = None

    def __post_init__(self):
        positions = np.asarray(self.positions, dtype=float)
        counts = np.asarray(self.counts)
        if positions.ndim != 1 or positions.shape != counts.shape or positions.size < 2:
            raise InvalidArgumentError("A fringe dataset needs matching 1-D positions and counts (≥ 2 pixels).")
        if np.any(np.diff(positions) <= 0):
            raise InvalidArgumentError("Pixel positions must be strictly increasing.")
        if np.any(counts < 0) or not np.all(np.equal(np.mod(counts, 1), 0)):
            raise InvalidArgumentError("Counts must be non-negative integers.")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "counts", counts.astype(np.int64))

    @property
    def total_counts(self) -> int:
        return int(np.sum(self.counts))

    @property
    def pixel_width(self) -> float:
        return float(self.positions[1] - self.positions[0])

    def scaled(self, factor: int) -> "FringeDataset":
        return FringeDataset(self.positions, self.counts * factor, self.z, self.label, self.profile)


class FitResult(BaseModel):
    """Fitted parameters of the visibility model for one dataset."""

    visibility: float = Field(..., ge=0, le=1, description="Fitted interference visibility V.")
    center: float = Field(..., description="Fringe centre (m).")
    amplitude: float = Field(..., description="Detected photons the model density is scaled to.")
    background: float = Field(..., description="Flat background (counts per pixel).")
    width_params: list[float] = Field(..., description="Fitted width of the integration window (m).")
    rms_residual: float = Field(..., description="RMS of count residuals.")
    converged: bool = Field(..., description="Least squares met its tolerance before the evaluation cap.")
    magnification: float = Field(default=1.0, description="Fitted transverse scale of the profile.")
    evaluations: int = Field(default=0, description="Residual evaluations used.")
    plane: Plane = "position"
    z: float = Field(default=0.0, ge=0, description="Propagation distance of the dataset (m).")


# --- Model ---


class FringeModel:
    """Arm profiles |a|², |b|² and Re(conj(a)·b) in one detection plane.

    Args:
        params: Slit/lens geometry.
        z: Propagation distance of the plane (m); momentum planes are taken at z = 0.
        plane: "position" for the slit image or propagated plane, "momentum" for a lens focal plane.
        profile: "box" slit, or "gaussian" stand-in of equal rms width L/√12.
        grid: Simulation grid; defaults to default_grid(params).
    """

    def __init__(
        self,
        params: ExperimentParams,
        *,
        z: float = 0.0,
        plane: Plane = "position",
        profile: Profile = "box",
        grid: Grid | None = None,
    ):
        if z < 0 or not math.isfinite(z):
            raise InvalidArgumentError(f"z must be non-negative, got {z}.")
        if plane == "momentum" and z != 0:
            raise InvalidArgumentError("Momentum-plane fringes are recorded for the initial state (z = 0).")

        self.params, self.z, self.plane, self.profile = params, z, plane, profile
        ctx = params.context()
        grid = grid or default_grid(params)

        if profile == "box":
            psi_L = box_position_state(params.slit_L, grid)
        elif profile == "gaussian":
            psi_L = gaussian_position_state(slit_substitute_sigma(params.slit_L), grid)
        else:
            raise InvalidArgumentError(f"Unknown slit profile {profile!r}.")
        psi_B = sinc_momentum_state(params.momentum_B, grid, ctx.hbar)

        if plane == "momentum":
            arm_L = lens_fourier_map(psi_L, params.focal_f, ctx)
            arm_B = lens_fourier_map(psi_B, params.focal_f, ctx)
            # x′ = f·(B/2)/p = L′/2
            self.window_half_width = 0.5 * params.slit_Lprime
            # first zero of the slit arm's focal-plane sinc
            self.lobe_width = params.wavelength * params.focal_f / params.slit_L
        elif plane == "position":
            t = z_to_t(z, ctx)
            arm_L = FreePropagator(psi_L, ctx).at(t)
            arm_B = FreePropagator(psi_B, ctx).at(t)
            self.window_half_width = 0.5 * m_width(params.slit_L, params.momentum_B, t, ctx)
            # sinc zero of |B⟩ and the diffraction spread h·t/(mL) of the slit arm
            self.lobe_width = max(
                ctx.planck_h / params.momentum_B,
                ctx.planck_h * t / (ctx.effective_mass * params.slit_L),
            )
        else:
            raise InvalidArgumentError(f"Unknown detection plane {plane!r}.")

        self.t = z_to_t(z, ctx)
        self.grid = arm_L.grid
        self.axis = self.grid.positions
        self.rho_L = arm_L.density
        self.rho_B = arm_B.density
        self.cross = np.real(np.conj(arm_L.amplitudes) * arm_B.amplitudes)
        self.overlap = float(np.sum(self.cross) * self.grid.dx)

    @property
    def length_scale(self) -> float:
        """Window width, used to make the centre parameter dimensionless."""
        return 2.0 * self.window_half_width

    def grid_density(self, V: float) -> np.ndarray:
        return (self.rho_L + self.rho_B + 2.0 * V * self.cross) / (2.0 * (1.0 + V * self.overlap))

    def density(self, x: np.ndarray, V: float, center: float = 0.0, scale: float = 1.0) -> np.ndarray:
        """Normalized density at detector positions x for visibility V, shift and transverse scale."""
        u = (np.asarray(x, dtype=float) - center) / scale
        rho_L = np.interp(u, self.axis, self.rho_L, left=0.0, right=0.0)
        rho_B = np.interp(u, self.axis, self.rho_B, left=0.0, right=0.0)
        cross = np.interp(u, self.axis, self.cross, left=0.0, right=0.0)
        return (rho_L + rho_B + 2.0 * V * cross) / (2.0 * (1.0 + V * self.overlap)) / scale

    def interval_probability(self, V: float) -> float:
        """Probability inside the plane's window: L, M or the lens image of B."""
        h = self.window_half_width
        return integrate_density(self.grid_density(V), self.grid, -h, h)

    def pixel_grid(self, n_pixels: int | None = None) -> Grid:
        """Detector pixels spanning the window and the main lobes of both arms.

        The half-span is LOBE_SPAN times the widest arm lobe and at least three
        window half-widths, so the broad arm is sampled past its first zero and
        cannot be mistaken for a flat background. Without n_pixels the pitch is
        a quarter of the window half-width or finer.
        """
        half_span = max(3.0 * self.window_half_width, LOBE_SPAN * self.lobe_width)
        if n_pixels is None:
            n_pixels = max(DEFAULT_PIXELS, math.ceil(8.0 * half_span / self.window_half_width) + 1)
        if n_pixels < 2:
            raise InvalidArgumentError(f"A pixel grid needs at least 2 pixels, got {n_pixels}.")
        return Grid(x_min=-half_span, n_points=n_pixels, dx=2.0 * half_span / (n_pixels - 1))


# --- Synthesis ---


def _expected_counts(model: FringeModel, V: float, pixels: Grid, n_photons: float, center: float, background: float):
    if n_photons < 1:
        raise InvalidArgumentError(f"n_photons must be at least 1, got {n_photons}.")
    if not 0.0 <= V <= 1.0:
        raise InvalidArgumentError(f"Visibility must lie in [0, 1], got {V}.")
    return n_photons * model.density(pixels.positions, V, center) * pixels.dx + background


def synthesize_fringe(
    model: FringeModel,
    V: float,
    pixels: Grid,
    n_photons: int,
    seed: int,
    *,
    center: float = 0.0,
    background: float = 0.0,
    label: str = "",
) -> FringeDataset:
    """Poisson photon counts with mean n_photons·density·pixel_width (+ background) per pixel."""
    mean = _expected_counts(model, V, pixels, n_photons, center, background)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return FringeDataset(pixels.positions, rng.poisson(mean), z=model.z, label=label, profile=model.profile)


def expected_fringe(
    model: FringeModel,
    V: float,
    pixels: Grid,
    n_photons: float,
    *,
    center: float = 0.0,
    background: float = 0.0,
    label: str = "",
) -> FringeDataset:
    """Noise-free dataset: the expected counts rounded to integers."""
    mean = _expected_counts(model, V, pixels, n_photons, center, background)
    return FringeDataset(pixels.positions, np.rint(mean), z=model.z, label=label, profile=model.profile)


# --- Fitting ---


def fit_fringe(data: FringeDataset, model: FringeModel, *, float_scale: bool = True) -> FitResult:
    """Poisson-weighted nonlinear least squares of the visibility model.

    Free parameters are the photon scale, centre, visibility, flat
    background and, with float_scale, a transverse magnification. Scale and
    background are fitted in units of the dataset's total counts, which
    makes the fitted visibility independent of overall brightness.

    The model's slit profile must be the one the data were taken with. A box
    slit fitted with the gaussian stand-in misplaces the cross term and drives
    V to a bound, so a dataset that records its profile is checked against
    the model.

    Raises:
        InvalidArgumentError: If the dataset's recorded profile differs from the model's.
        DegenerateFitError: If the data are empty, flat or have fewer than 6 informative pixels.
    """
    if data.profile is not None and data.profile != model.profile:
        raise InvalidArgumentError(
            f"Dataset was synthesized with a {data.profile} slit but the model uses a {model.profile} slit."
        )
    counts = data.counts.astype(float)
    total = float(np.sum(counts))
    if total <= 0:
        raise DegenerateFitError("Fringe dataset has no counts.")
    if np.ptp(counts) == 0:
        raise DegenerateFitError("Fringe dataset is flat; nothing constrains the model.")
    if int(np.sum(counts > counts.min())) < MIN_INFORMATIVE_PIXELS:
        raise DegenerateFitError(f"Fewer than {MIN_INFORMATIVE_PIXELS} pixels rise above the floor.")

    x = data.positions
    n_pix = x.size
    width = data.pixel_width
    ell = model.length_scale
    weights = 1.0 / np.sqrt(np.maximum(counts, 1.0))

    def predicted(theta: np.ndarray) -> np.ndarray:
        a, c, V, b, s = theta
        return total * (a * model.density(x, V, c * ell, s) * width + b / n_pix)

    def residuals(theta: np.ndarray) -> np.ndarray:
        if not float_scale:
            theta = np.append(theta, 1.0)
        return (predicted(theta) - counts) * weights

    b0 = counts.min() * n_pix / total
    c0 = float(np.sum(x * counts) / total) / ell
    captured = float(np.sum(model.density(x, 0.5, c0 * ell)) * width)
    a0 = max((1.0 - b0) / max(captured, 1e-12), 1e-6)
    theta0 = np.array([a0, c0, 0.5, b0, 1.0])
    lower = np.array([0.0, x[0] / ell, 0.0, 0.0, 0.5])
    upper = np.array([np.inf, x[-1] / ell, 1.0, np.inf, 2.0])
    if not float_scale:
        theta0, lower, upper = theta0[:-1], lower[:-1], upper[:-1]

    result = least_squares(
        residuals,
        theta0,
        bounds=(lower, upper),
        method="trf",
        jac="2-point",
        diff_step=1e-6,
        xtol=1e-8,
        ftol=1e-12,
        gtol=1e-12,
        max_nfev=get_settings().fit_max_iterations,
    )
    theta = result.x if float_scale else np.append(result.x, 1.0)
    a, c, V, b, s = (float(v) for v in theta)
    converged = bool(result.status > 0)
    rms = float(np.sqrt(np.mean((predicted(theta) - counts) ** 2)))
    if converged:
        logger.info(f"Fit {data.label or model.plane}: V={V:.4f} centre={c * ell:.3e} m, rms residual {rms:.2f}")
    else:
        logger.warning(f"Fit {data.label or model.plane} hit the evaluation cap; returning last iterate")

    return FitResult(
        visibility=min(max(V, 0.0), 1.0),
        center=c * ell,
        amplitude=a * total,
        background=b * total / n_pix,
        width_params=[2.0 * model.window_half_width * s],
        rms_residual=rms,
        converged=converged,
        magnification=s,
        evaluations=int(result.nfev),
        plane=model.plane,
        z=model.z,
    )


def probability_from_fit(fit: FitResult, model: FringeModel) -> float:
    """Window probability of the continuous density rebuilt from a fit.

    The window is taken in object coordinates, so it depends on the fitted
    visibility and the geometry only.

    Raises:
        InvalidArgumentError: If the fit did not converge or belongs to another plane.
    """
    if not fit.converged:
        raise InvalidArgumentError("Cannot derive probabilities from a non-converged fit.")
    if fit.plane != model.plane or not math.isclose(fit.z, model.z, rel_tol=1e-12, abs_tol=1e-15):
        raise InvalidArgumentError(f"Fit for {fit.plane} plane at z={fit.z} does not match the model.")
    return model.interval_probability(fit.visibility)


def probabilities_from_fits(
    position: tuple[FitResult, FringeModel],
    momentum: tuple[FitResult, FringeModel],
    propagated: tuple[FitResult, FringeModel],
) -> IntervalProbabilityReport:
    """P(L), P(B) and P(M, t) from three fitted planes, and the resulting defect."""
    position_fit, position_model = position
    if position_model.plane != "position" or position_model.z != 0:
        raise InvalidArgumentError("P(L) needs the position plane at z = 0.")
    if momentum[1].plane != "momentum":
        raise InvalidArgumentError("P(B) needs a momentum-plane fit.")
    propagated_fit, propagated_model = propagated
    if propagated_model.plane != "position" or propagated_model.z <= 0:
        raise InvalidArgumentError("P(M, t) needs a position plane at z > 0.")

    p_L = probability_from_fit(position_fit, position_model)
    p_B = probability_from_fit(*momentum)
    p_M = probability_from_fit(propagated_fit, propagated_model)
    return defect_probability(
        p_L,
        p_B,
        p_M,
        t=propagated_model.t,
        M_width=2.0 * propagated_model.window_half_width,
        params=propagated_model.params,
        visibility=propagated_fit.visibility,
    )
