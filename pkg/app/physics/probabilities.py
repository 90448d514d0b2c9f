"""
Interval probabilities, the straight-line bound and the defect probability.

The propagation inequality P(M, t) ≥ P(L) + P(B) - 1 holds for any particle
moving on straight lines. The defect P(L) + P(B) - 1 - P(M, t) is positive
exactly when a state violates it.
"""

import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.errors import InvalidArgumentError
from app.physics.constants import ExperimentParams, PhotonContext
from app.physics.propagator import MomentumWaveFunction, to_momentum_representation
from app.physics.states import Grid, WaveFunction, overlap

# Slack allowed above 1 (and below 0) for probabilities built by quadrature.
PROBABILITY_SLACK = 1e-9


class IntervalProbabilityReport(BaseModel):
    """Everything that enters one evaluation of the propagation inequality."""

    model_config = ConfigDict(allow_inf_nan=False)

    p_L: float = Field(..., description="Probability of |x| < L/2 at t = 0.")
    p_B: float = Field(..., description="Probability of |pₓ| < B/2 at t = 0.")
    p_M: float = Field(..., description="Probability of |x| < M/2 at time t.")
    bound_rhs: float = Field(..., description="P(L) + P(B) - 1, unclamped.")
    defect: float = Field(..., description="bound_rhs - P(M); positive means the bound is violated.")
    t: float = Field(..., ge=0, description="Evaluation time (s).")
    M_width: float = Field(..., gt=0, description="Straight-line interval width M = L + Bt/m (m).")
    visibility: float = Field(default=1.0, ge=0, le=1, description="Interference visibility of the density model.")

    @model_validator(mode="after")
    def _check_consistency(self) -> "IntervalProbabilityReport":
        for name in ("p_L", "p_B", "p_M"):
            value = getattr(self, name)
            if not -PROBABILITY_SLACK <= value <= 1.0 + PROBABILITY_SLACK:
                raise ValueError(f"{name} = {value} is not a probability")
        if not math.isclose(self.bound_rhs, self.p_L + self.p_B - 1.0, abs_tol=1e-12):
            raise ValueError("bound_rhs must equal p_L + p_B - 1")
        if not math.isclose(self.defect, self.bound_rhs - self.p_M, abs_tol=1e-12):
            raise ValueError("defect must equal bound_rhs - p_M")
        return self

    @property
    def violates_bound(self) -> bool:
        return self.defect > 0


# --- Quadrature ---


def integrate_density(density: np.ndarray, grid: Grid, a: float, b: float) -> float:
    """∫ₐᵇ ρ dx with each cell weighted by the part of it inside [a, b].

    Raises:
        InvalidArgumentError: If a ≥ b or the interval leaves the grid.
    """
    if not a < b:
        raise InvalidArgumentError(f"Interval needs a < b, got [{a}, {b}].")
    lo_edge = grid.x_min - 0.5 * grid.dx
    hi_edge = grid.x_max + 0.5 * grid.dx
    # tolerate round-off on the grid edges
    slack = 1e-9 * grid.dx
    if a < lo_edge - slack or b > hi_edge + slack:
        raise InvalidArgumentError(f"Interval [{a:.3e}, {b:.3e}] leaves the grid [{lo_edge:.3e}, {hi_edge:.3e}].")
    return float(np.sum(density * grid.cell_weights(a, b)) * grid.dx)


def interval_probability(psi: WaveFunction, a: float, b: float) -> float:
    """Probability of finding the particle in [a, b]."""
    return integrate_density(psi.density, psi.grid, a, b)


def _momentum_grid(phi: MomentumWaveFunction) -> Grid:
    return Grid(x_min=float(phi.p_values[0]), n_points=len(phi.p_values), dx=phi.dp)


def momentum_interval_probability(psi: WaveFunction, B: float) -> float:
    """Probability of finding the transverse momentum in [-B/2, B/2]."""
    phi = to_momentum_representation(psi)
    return integrate_density(phi.density, _momentum_grid(phi), -0.5 * B, 0.5 * B)


# --- Bound and defect ---


def m_width(L: float, B: float, t: float, ctx: PhotonContext) -> float:
    """Width M = L + Bt/m reached by straight lines leaving the L window with momenta in the B window."""
    if not (math.isfinite(t) and t >= 0):
        raise InvalidArgumentError(f"Time must be non-negative, got {t}.")
    return L + B * t / ctx.effective_mass


def _require_probability(name: str, value: float) -> float:
    if not (math.isfinite(value) and -PROBABILITY_SLACK <= value <= 1.0 + PROBABILITY_SLACK):
        raise InvalidArgumentError(f"{name} must lie in [0, 1], got {value}.")
    return float(value)


def bound_rhs(p_L: float, p_B: float) -> float:
    """Right-hand side P(L) + P(B) - 1 of the propagation inequality, left unclamped."""
    return _require_probability("p_L", p_L) + _require_probability("p_B", p_B) - 1.0


def defect_probability(
    p_L: float,
    p_B: float,
    p_M: float,
    *,
    t: float,
    M_width: float,
    params: ExperimentParams,
    visibility: float = 1.0,
) -> IntervalProbabilityReport:
    """Assemble the report and its defect P(L) + P(B) - 1 - P(M, t).

    Raises:
        InvalidArgumentError: If M_width is not the straight-line width for t.
    """
    expected = m_width(params.slit_L, params.momentum_B, t, params.context())
    if not math.isclose(M_width, expected, rel_tol=1e-9):
        raise InvalidArgumentError(
            f"M_width {M_width:.6e} m does not match L + Bt/m = {expected:.6e} m at t = {t:.3e} s."
        )
    rhs = bound_rhs(p_L, p_B)
    p_M = _require_probability("p_M", p_M)
    return IntervalProbabilityReport(
        p_L=p_L,
        p_B=p_B,
        p_M=p_M,
        bound_rhs=rhs,
        defect=rhs - p_M,
        t=t,
        M_width=M_width,
        visibility=visibility,
    )


# --- Finite-visibility model ---


def _require_visibility(V: float) -> float:
    if not (math.isfinite(V) and 0.0 <= V <= 1.0):
        raise InvalidArgumentError(f"Visibility must lie in [0, 1], got {V}.")
    return float(V)


def mixed_density(amp_L: np.ndarray, amp_B: np.ndarray, V: float, step: float) -> np.ndarray:
    """|a|² + |b|² + 2V·Re(conj(a)·b), scaled to unit integral over cells of width step."""
    V = _require_visibility(V)
    density = np.abs(amp_L) ** 2 + np.abs(amp_B) ** 2 + 2.0 * V * np.real(np.conj(amp_L) * amp_B)
    total = float(np.sum(density) * step)
    if total <= 0:
        raise InvalidArgumentError("Mixed density has no weight to normalize.")
    return density / total


def visibility_density(psi_L: WaveFunction, psi_B: WaveFunction, V: float) -> np.ndarray:
    """Position density of the two-arm state with the interference term scaled by V.

    V = 1 reproduces |superposition|², V = 0 the equal-weight incoherent mixture.
    """
    if psi_L.grid != psi_B.grid:
        raise InvalidArgumentError("Visibility model needs both arms on one grid.")
    return mixed_density(psi_L.amplitudes, psi_B.amplitudes, V, psi_L.grid.dx)


def momentum_visibility_density(psi_L: WaveFunction, psi_B: WaveFunction, V: float) -> tuple[Grid, np.ndarray]:
    """Momentum-space counterpart of visibility_density, with the momentum grid it lives on."""
    if psi_L.grid != psi_B.grid:
        raise InvalidArgumentError("Visibility model needs both arms on one grid.")
    phi_L = to_momentum_representation(psi_L)
    phi_B = to_momentum_representation(psi_B)
    return _momentum_grid(phi_L), mixed_density(phi_L.amplitudes, phi_B.amplitudes, V, phi_L.dp)


def ideal_slit_probability(psi_L: WaveFunction, psi_B: WaveFunction, L: float, V: float = 1.0) -> float:
    """Closed-form P(L) of the two-arm state from overlaps alone.

    P(L) = (1 + ∫_L|ψ_B|² + 2V·⟨L|B⟩) / (2(1 + V·⟨L|B⟩)) for a box ψ_L; by the
    position/momentum symmetry of the construction P(B) takes the same value.
    """
    V = _require_visibility(V)
    ov = overlap(psi_L, psi_B).real
    b_inside = interval_probability(psi_B, -0.5 * L, 0.5 * L)
    return (1.0 + b_inside + 2.0 * V * ov) / (2.0 * (1.0 + V * ov))
