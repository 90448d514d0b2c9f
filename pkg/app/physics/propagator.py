"""
Free-space evolution and momentum-space views of a WaveFunction.

Evolution uses the momentum-phase method on the periodic grid:
transform, multiply by exp(-i p² t / 2mħ), transform back. The phase
multiplication is exactly unitary, so the only numerical hazard is
aliasing, which is checked on the spectrum before any evolution.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from app.errors import AliasingRiskError, InvalidArgumentError, InvalidGridError
from app.physics.constants import HBAR, PhotonContext
from app.physics.states import Grid, WaveFunction, cell_overlap
from app.settings import get_settings

logger = logging.getLogger(__name__)

# Fraction of the momentum bins (by |p|) inspected by the aliasing guard.
EDGE_BIN_FRACTION = 0.01

# A mapped profile narrower than this many output cells counts as under-resolved.
MIN_MAPPED_CELLS = 8.0


@dataclass(frozen=True, eq=False)
class MomentumWaveFunction:
    """Amplitudes ⟨p|ψ⟩ on ascending, uniformly spaced momenta."""

    p_values: np.ndarray = field(repr=False)
    amplitudes: np.ndarray = field(repr=False)

    @property
    def dp(self) -> float:
        return float(self.p_values[1] - self.p_values[0])

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sum(self.density) * self.dp)

    def mean_momentum(self) -> float:
        return float(np.sum(self.p_values * self.density) * self.dp / self.norm())

    def interval_weights(self, a: float, b: float) -> np.ndarray:
        return cell_overlap(float(self.p_values[0]), self.dp, len(self.p_values), a, b)


def transform_momenta(grid: Grid, hbar: float) -> np.ndarray:
    """Momenta in the transform's native (unshifted) order."""
    return 2.0 * math.pi * hbar * scipy.fft.fftfreq(grid.n_points, d=grid.dx)


def edge_fraction(spectrum: np.ndarray) -> float:
    """Share of Σ|spectrum|² carried by the outermost EDGE_BIN_FRACTION of bins by |p|."""
    n = spectrum.size
    edge_bins = max(1, math.ceil(EDGE_BIN_FRACTION * n))
    # unshifted order: |index frequency| is largest around n/2
    order = np.argsort(np.abs(scipy.fft.fftfreq(n)), kind="stable")
    power = np.abs(spectrum) ** 2
    total = float(np.sum(power))
    if total == 0.0:
        return 0.0
    return float(np.sum(power[order[-edge_bins:]]) / total)


def _check_aliasing(spectrum: np.ndarray, tolerance: float):
    fraction = edge_fraction(spectrum)
    if fraction > tolerance:
        raise AliasingRiskError(
            f"{fraction:.2e} of the norm sits in the outermost {EDGE_BIN_FRACTION:.0%} of momentum bins "
            f"(tolerance {tolerance:.1e}); refine the grid spacing."
        )


class FreePropagator:
    """Free evolution of one initial state to any number of times.

    The forward transform and the aliasing check run once; each call to
    `at` costs one inverse transform.
    """

    def __init__(self, psi: WaveFunction, ctx: PhotonContext, tolerance: float | None = None):
        settings = get_settings()
        self.psi = psi
        self.ctx = ctx
        self._workers = settings.fft_workers
        self._spectrum = scipy.fft.fft(psi.amplitudes, workers=self._workers)
        _check_aliasing(self._spectrum, settings.aliasing_tolerance if tolerance is None else tolerance)
        p = transform_momenta(psi.grid, ctx.hbar)
        self._phase_rate = p**2 / (2.0 * ctx.effective_mass * ctx.hbar)

    def at(self, t: float) -> WaveFunction:
        """State after time t; negative t runs the evolution backwards."""
        if not math.isfinite(t):
            raise InvalidArgumentError(f"Propagation time must be finite, got {t}.")
        if t == 0:
            return self.psi
        evolved = scipy.fft.ifft(self._spectrum * np.exp(-1j * self._phase_rate * t), workers=self._workers)
        return WaveFunction(self.psi.grid, evolved)


def free_propagate(psi: WaveFunction, t: float, ctx: PhotonContext) -> WaveFunction:
    """Evolve psi in free space for time t (distance z = ct).

    Raises:
        AliasingRiskError: If the state's spectrum crowds the Nyquist edge.
    """
    return FreePropagator(psi, ctx).at(t)


def to_momentum_representation(psi: WaveFunction, hbar: float | None = None) -> MomentumWaveFunction:
    """Symmetric-normalization transform φ(p) = (2πħ)^(-1/2) ∫ψ(x)e^(-ipx/ħ)dx.

    Parseval holds exactly: Σ|φ|²dp = Σ|ψ|²dx.
    """
    hbar = HBAR if hbar is None else hbar
    grid = psi.grid
    p = transform_momenta(grid, hbar)
    # the grid starts at x_min, not 0
    spectrum = scipy.fft.fft(psi.amplitudes) * np.exp(-1j * p * grid.x_min / hbar)
    amplitudes = grid.dx / math.sqrt(2.0 * math.pi * hbar) * spectrum
    return MomentumWaveFunction(
        p_values=scipy.fft.fftshift(p),
        amplitudes=scipy.fft.fftshift(amplitudes),
    )


def mean_momentum(psi: WaveFunction) -> float:
    return to_momentum_representation(psi).mean_momentum()


def lens_fourier_map(psi: WaveFunction, f: float, ctx: PhotonContext) -> WaveFunction:
    """Focal-plane field of a lens placed one focal length after psi.

    Transverse momentum pₓ lands at x′ = f·pₓ/p, p = h/λ. The output carries
    the momentum amplitude rescaled to unit norm in x′; the quadratic phase
    of the focal plane is dropped since only intensities are measured.

    Raises:
        InvalidGridError: If the mapped profile spans fewer than 8 output cells.
    """
    if not (math.isfinite(f) and f > 0):
        raise InvalidArgumentError(f"Focal length must be positive, got {f}.")
    phi = to_momentum_representation(psi, ctx.hbar)
    scale = ctx.total_momentum / f  # momentum per metre of focal plane
    out_grid = Grid(x_min=float(phi.p_values[0]) / scale, n_points=psi.grid.n_points, dx=phi.dp / scale)
    out = WaveFunction(out_grid, phi.amplitudes * math.sqrt(scale))

    density = out.density
    effective_width = float(np.sum(density) * out_grid.dx) ** 2 / float(np.sum(density**2) * out_grid.dx)
    if effective_width < MIN_MAPPED_CELLS * out_grid.dx:
        raise InvalidGridError(
            f"Focal-plane profile spans {effective_width / out_grid.dx:.1f} cells; widen the input grid."
        )
    return out
