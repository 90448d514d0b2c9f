"""
Physical constants, the photon-as-particle mapping and derived experiment parameters.

A photon travelling along z with wavelength λ behaves, in the paraxial
approximation, like a free particle of mass m = h/(cλ) moving in the
transverse coordinate x, with the propagation distance z = ct standing in
for time. Everything downstream works in SI units through these records.
"""

import math

from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import constants

from app.errors import InvalidArgumentError

# CODATA exact SI values
PLANCK_H = constants.h
LIGHT_SPEED = constants.c
HBAR = constants.hbar

_REL_TOL = 1e-12


class PhotonContext(BaseModel):
    """Wavelength and the effective-particle constants derived from it."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    wavelength: float = Field(..., gt=0, description="Photon wavelength λ (m).")
    planck_h: float = Field(default=PLANCK_H, gt=0, description="Planck constant h (J·s).")
    hbar: float = Field(default=HBAR, gt=0, description="Reduced Planck constant ħ (J·s).")
    light_speed: float = Field(default=LIGHT_SPEED, gt=0, description="Speed of light c (m/s).")
    effective_mass: float = Field(..., gt=0, description="Effective transverse mass m = h/(cλ) (kg).")
    total_momentum: float = Field(..., gt=0, description="Longitudinal momentum p = h/λ (kg·m/s).")

    @model_validator(mode="after")
    def _check_mapping(self) -> "PhotonContext":
        expected_mass = self.planck_h / (self.light_speed * self.wavelength)
        if not math.isclose(self.effective_mass, expected_mass, rel_tol=_REL_TOL):
            raise ValueError("effective_mass must equal planck_h / (light_speed * wavelength)")
        if not math.isclose(self.total_momentum, self.effective_mass * self.light_speed, rel_tol=_REL_TOL):
            raise ValueError("total_momentum must equal effective_mass * light_speed")
        if not math.isclose(self.hbar, self.planck_h / (2.0 * math.pi), rel_tol=_REL_TOL):
            raise ValueError("hbar must equal planck_h / (2π)")
        return self

    def far_field_distance(self, slit_width: float) -> float:
        """Distance L²/λ beyond which the far-field slit formula applies."""
        return slit_width**2 / self.wavelength


class ExperimentParams(BaseModel):
    """Slit and lens geometry of the interferometer plus the quantities derived from it."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    wavelength: float = Field(..., gt=0, description="Photon wavelength λ (m).")
    slit_L: float = Field(..., gt=0, description="Position-slit width L (m).")
    slit_Lprime: float = Field(..., gt=0, description="Momentum-arm slit width L′ (m).")
    focal_f: float = Field(..., gt=0, description="Focal length f of the Fourier lens (m).")
    momentum_B: float = Field(..., gt=0, description="Momentum window B = hL′/(fλ) (kg·m/s).")
    lb_fraction: float = Field(..., gt=0, description="Dimensionless product LB/(2πħ).")
    z_M: float = Field(..., gt=0, description="Matching distance z_M = c·t_M = fL/L′ (m).")
    t_M: float = Field(..., gt=0, description="Matching time t_M = mL/B (s).")
    far_field_z: float = Field(..., gt=0, description="Far-field boundary L²/λ (m).")

    def context(self) -> PhotonContext:
        """Rebuild the photon context these parameters were derived with."""
        return make_context(self.wavelength)


def _require_positive(name: str, value: float) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError) as e:
        raise InvalidArgumentError(f"{name} must be a number, got {value!r}") from e
    if not math.isfinite(value) or value <= 0:
        raise InvalidArgumentError(f"{name} must be positive and finite, got {value!r}")
    return value


def make_context(wavelength: float) -> PhotonContext:
    """Build the photon-as-particle constants for a wavelength in metres.

    Raises:
        InvalidArgumentError: If the wavelength is not positive and finite.
    """
    wavelength = _require_positive("wavelength", wavelength)
    mass = PLANCK_H / (LIGHT_SPEED * wavelength)
    return PhotonContext(
        wavelength=wavelength,
        effective_mass=mass,
        total_momentum=mass * LIGHT_SPEED,
    )


def make_params(slit_L: float, slit_Lprime: float, focal_f: float, ctx: PhotonContext) -> ExperimentParams:
    """Derive B, LB/(2πħ), t_M, z_M and the far-field boundary from the slit/lens geometry.

    Args:
        slit_L: Width of the slit that prepares the position state (m).
        slit_Lprime: Width of the slit in the momentum arm (m).
        focal_f: Focal length of the lens that Fourier-transforms the L′ slit (m).
        ctx: Photon context for the working wavelength.

    Raises:
        InvalidArgumentError: If any length is not positive and finite.
    """
    slit_L = _require_positive("slit_L", slit_L)
    slit_Lprime = _require_positive("slit_Lprime", slit_Lprime)
    focal_f = _require_positive("focal_f", focal_f)

    momentum_B = ctx.planck_h * slit_Lprime / (focal_f * ctx.wavelength)
    t_M = ctx.effective_mass * slit_L / momentum_B
    return ExperimentParams(
        wavelength=ctx.wavelength,
        slit_L=slit_L,
        slit_Lprime=slit_Lprime,
        focal_f=focal_f,
        momentum_B=momentum_B,
        lb_fraction=slit_L * momentum_B / ctx.planck_h,
        z_M=ctx.light_speed * t_M,
        t_M=t_M,
        far_field_z=ctx.far_field_distance(slit_L),
    )


def params_from_lb_fraction(slit_L: float, lb_fraction: float, focal_f: float, ctx: PhotonContext) -> ExperimentParams:
    """Geometry with a prescribed LB/(2πħ), obtained by solving for the momentum-arm slit L′."""
    lb_fraction = _require_positive("lb_fraction", lb_fraction)
    slit_L = _require_positive("slit_L", slit_L)
    focal_f = _require_positive("focal_f", focal_f)
    # lb = L·L′/(fλ)
    slit_Lprime = lb_fraction * focal_f * ctx.wavelength / slit_L
    return make_params(slit_L, slit_Lprime, focal_f, ctx)


def z_to_t(z: float, ctx: PhotonContext) -> float:
    """Propagation distance to effective time, t = z/c."""
    return z / ctx.light_speed


def t_to_z(t: float, ctx: PhotonContext) -> float:
    """Effective time to propagation distance, z = ct."""
    return t * ctx.light_speed
