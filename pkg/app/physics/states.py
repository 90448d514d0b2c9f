"""
Analytic quantum states of the transverse photon coordinate.

Builds the box position state |L⟩, the sinc-shaped momentum state |B⟩, the
far-field evolved box, and their normalized superposition on a uniform
1-D grid. Amplitudes carry units of m^(-1/2) so that Σ|ψ|²dx is a probability.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from app.errors import DegenerateSuperpositionError, DomainError, InvalidArgumentError, InvalidGridError
from app.physics.constants import HBAR, ExperimentParams, PhotonContext
from app.settings import LabSettings, get_settings

logger = logging.getLogger(__name__)

# Largest grid-truncation loss tolerated before a state is renormalized.
MAX_NORM_DEFICIT = 0.01

# Below this |u| the sinc is evaluated from its series.
_SINC_SERIES_CUTOFF = 1e-4

# Interval edges closer than this to a cell boundary (in cells) sit on it.
_EDGE_SNAP = 1e-6


# --- Grid and wavefunction types ---


@dataclass(frozen=True)
class Grid:
    """Uniform sampling of the transverse coordinate: x_i = x_min + i·dx."""

    x_min: float
    n_points: int
    dx: float

    def __post_init__(self):
        if self.n_points < 2:
            raise InvalidGridError(f"A grid needs at least 2 points, got {self.n_points}.")
        if not (math.isfinite(self.dx) and self.dx > 0):
            raise InvalidGridError(f"Grid spacing must be positive, got {self.dx}.")
        if not math.isfinite(self.x_min):
            raise InvalidGridError("Grid origin must be finite.")

    @classmethod
    def centered(cls, n_points: int, dx: float) -> "Grid":
        """Grid with x = 0 on a sample point and n_points/2 samples to its left."""
        return cls(x_min=-(n_points // 2) * dx, n_points=n_points, dx=dx)

    @property
    def positions(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def x_max(self) -> float:
        return self.x_min + (self.n_points - 1) * self.dx

    @property
    def half_width(self) -> float:
        """Smallest distance from the origin to a grid edge (cell boundaries included)."""
        return min(-self.x_min, self.x_max) + 0.5 * self.dx

    def cell_weights(self, a: float, b: float) -> np.ndarray:
        """Fraction of each cell [x_i - dx/2, x_i + dx/2] lying inside [a, b]."""
        return cell_overlap(self.x_min, self.dx, self.n_points, a, b)


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Complex amplitudes ⟨x|ψ⟩ on a grid."""

    grid: Grid
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=complex)
        if amplitudes.shape != (self.grid.n_points,):
            raise InvalidArgumentError(
                f"Expected {self.grid.n_points} amplitudes, got array of shape {amplitudes.shape}."
            )
        if not np.all(np.isfinite(amplitudes)):
            raise InvalidArgumentError("Wavefunction amplitudes must be finite.")
        amplitudes.flags.writeable = False
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sum(self.density) * self.grid.dx)

    def mean_position(self) -> float:
        return float(np.sum(self.grid.positions * self.density) * self.grid.dx / self.norm())

    def is_real(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.amplitudes.imag) <= tol))

    def scaled(self, factor: complex) -> "WaveFunction":
        return WaveFunction(self.grid, self.amplitudes * factor)


def _snap_to_boundary(u: float) -> float:
    if not math.isfinite(u):
        return u
    nearest = round(u)
    return float(nearest) if abs(u - nearest) < _EDGE_SNAP else u


def cell_overlap(x_min: float, step: float, n: int, a: float, b: float) -> np.ndarray:
    """Area-weighted membership of n cells centred at x_min + i·step in the interval [a, b].

    The edges are converted to cell-index units, where cell i spans [i, i + 1],
    and snapped onto a boundary within _EDGE_SNAP of it. An interval made of
    whole cells therefore gets weights of exactly 0 and 1.
    """
    lo = _snap_to_boundary((a - x_min) / step + 0.5)
    hi = _snap_to_boundary((b - x_min) / step + 0.5)
    index = np.arange(n, dtype=float)
    return np.clip(np.minimum(index + 1.0, hi) - np.maximum(index, lo), 0.0, 1.0)


def default_grid(params: ExperimentParams, settings: LabSettings | None = None) -> Grid:
    """Power-of-two grid resolving the slit and covering the sinc tails of |B⟩.

    The spacing is L/slit_cells with an odd cell count, so the slit edges
    ±L/2 sit exactly on cell boundaries. The point count is the smallest
    power of two whose half-width reaches sinc_lobes·2ħ/B.
    """
    settings = settings or get_settings()
    dx = params.slit_L / settings.slit_cells
    half_width = settings.sinc_lobes * 2.0 * HBAR / params.momentum_B
    exponent = max(8, math.ceil(math.log2(2.0 * half_width / dx)))
    if exponent > settings.grid_exponent_cap:
        raise InvalidGridError(
            f"Default grid needs 2**{exponent} points, above the cap 2**{settings.grid_exponent_cap}; "
            "raise LAB_GRID_EXPONENT_CAP or pass an explicit grid."
        )
    return Grid.centered(2**exponent, dx)


def sinc(u: np.ndarray) -> np.ndarray:
    """Unnormalized sinc, sin(u)/u, with sinc(0) = 1."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < _SINC_SERIES_CUTOFF
    safe = np.where(small, 1.0, u)
    return np.where(small, 1.0 - u * u / 6.0, np.sin(safe) / safe)


def _renormalized(grid: Grid, amplitudes: np.ndarray, what: str) -> WaveFunction:
    norm = float(np.sum(np.abs(amplitudes) ** 2) * grid.dx)
    deficit = 1.0 - norm
    if deficit > MAX_NORM_DEFICIT:
        raise InvalidGridError(
            f"{what}: grid captures only {norm:.4f} of the norm (deficit above {MAX_NORM_DEFICIT:.0%}); widen the grid."
        )
    if deficit > 0.5 * MAX_NORM_DEFICIT:
        logger.warning(f"{what}: grid truncation removes {deficit:.2%} of the norm")
    return WaveFunction(grid, amplitudes / math.sqrt(norm))


# --- Constructors ---


def box_position_state(L: float, grid: Grid) -> WaveFunction:
    """Uniform amplitude 1/√L over [-L/2, L/2].

    Cells straddling a slit edge get the density of the covered fraction of
    the cell, which keeps Σ|ψ|²dx = 1 on any grid.

    Raises:
        InvalidGridError: If the grid does not span the slit or has fewer than 10 cells across it.
    """
    if not (math.isfinite(L) and L > 0):
        raise InvalidArgumentError(f"Slit width must be positive, got {L}.")
    if grid.half_width < 0.5 * L:
        raise InvalidGridError(f"Grid half-width {grid.half_width:.3e} m does not span a slit of width {L:.3e} m.")
    if grid.dx > L / 10:
        raise InvalidGridError(f"Grid spacing {grid.dx:.3e} m is too coarse for a slit of width {L:.3e} m.")

    weights = grid.cell_weights(-0.5 * L, 0.5 * L)
    return WaveFunction(grid, np.sqrt(weights / L).astype(complex))


def sinc_momentum_state(B: float, grid: Grid, hbar: float = HBAR) -> WaveFunction:
    """Position wavefunction √(B/2πħ)·sinc(Bx/2ħ) of a uniform momentum window of width B.

    Raises:
        InvalidGridError: If the grid half-width is below 50·(2ħ/B) or loses more than 1% of the norm.
    """
    if not (math.isfinite(B) and B > 0):
        raise InvalidArgumentError(f"Momentum width must be positive, got {B}.")
    lobe = 2.0 * hbar / B
    if grid.half_width < 50.0 * lobe:
        raise InvalidGridError(
            f"Grid half-width {grid.half_width:.3e} m is below 50·(2ħ/B) = {50 * lobe:.3e} m; sinc tails are lost."
        )
    x = grid.positions
    amplitudes = math.sqrt(B / (2.0 * math.pi * hbar)) * sinc(x / lobe)
    return _renormalized(grid, amplitudes.astype(complex), "sinc momentum state")


def evolved_position_state(L: float, t: float, ctx: PhotonContext, grid: Grid) -> WaveFunction:
    """Far-field form of the freely evolved box state.

    ψ(x, t) = √(mL/2πħt)·sinc(mLx/2ħt)·exp(i·m·x²/2ħt - iπ/4), valid for t > mL²/(2πħ).

    Raises:
        DomainError: If t lies inside the near-field region.
    """
    m, hbar = ctx.effective_mass, ctx.hbar
    t_min = m * L**2 / (2.0 * math.pi * hbar)
    if not t > t_min:
        raise DomainError(f"Far-field formula needs t > mL²/(2πħ) = {t_min:.3e} s, got t = {t:.3e} s.")

    x = grid.positions
    modulus = math.sqrt(m * L / (2.0 * math.pi * hbar * t)) * sinc(m * L * x / (2.0 * hbar * t))
    phase = m * x**2 / (2.0 * hbar * t) - math.pi / 4.0
    return _renormalized(grid, modulus * np.exp(1j * phase), "evolved position state")


def gaussian_position_state(sigma: float, grid: Grid, center: float = 0.0, momentum: float = 0.0) -> WaveFunction:
    """Gaussian wavepacket with position rms width sigma and mean transverse momentum."""
    if not (math.isfinite(sigma) and sigma > 0):
        raise InvalidArgumentError(f"Gaussian width must be positive, got {sigma}.")
    if grid.dx > sigma / 3:
        raise InvalidGridError(f"Grid spacing {grid.dx:.3e} m under-resolves a Gaussian of rms {sigma:.3e} m.")
    x = grid.positions
    envelope = (2.0 * math.pi * sigma**2) ** -0.25 * np.exp(-((x - center) ** 2) / (4.0 * sigma**2))
    return _renormalized(grid, envelope * np.exp(1j * momentum * x / HBAR), "gaussian state")


def slit_substitute_sigma(L: float) -> float:
    """RMS width of a uniform slit of width L, used for the Gaussian stand-in."""
    return L / math.sqrt(12.0)


# --- Combinations ---


def _require_same_grid(psi_a: WaveFunction, psi_b: WaveFunction):
    if psi_a.grid != psi_b.grid:
        raise InvalidArgumentError(f"Wavefunctions live on different grids: {psi_a.grid} vs {psi_b.grid}.")


def overlap(psi_a: WaveFunction, psi_b: WaveFunction) -> complex:
    """Inner product ⟨a|b⟩ = Σ conj(a)·b·dx."""
    _require_same_grid(psi_a, psi_b)
    return complex(np.vdot(psi_a.amplitudes, psi_b.amplitudes) * psi_a.grid.dx)


def superposition(psi_L: WaveFunction, psi_B: WaveFunction) -> WaveFunction:
    """Normalized equal-weight superposition (ψ_L + ψ_B)/√(2(1 + ⟨L|B⟩)).

    Raises:
        InvalidArgumentError: On mismatched grids or a complex overlap.
        DegenerateSuperpositionError: If 1 + ⟨L|B⟩ ≤ 0.
    """
    ov = overlap(psi_L, psi_B)
    if abs(ov.imag) > 1e-6:
        raise InvalidArgumentError(f"Overlap ⟨L|B⟩ must be real, got {ov:.3e}.")
    denominator = 2.0 * (1.0 + ov.real)
    if denominator <= 0:
        raise DegenerateSuperpositionError(f"1 + ⟨L|B⟩ = {1.0 + ov.real:.3e} leaves nothing to normalize.")
    return WaveFunction(psi_L.grid, (psi_L.amplitudes + psi_B.amplitudes) / math.sqrt(denominator))
