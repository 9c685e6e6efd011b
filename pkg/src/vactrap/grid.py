"""Uniform 1D grid and the three-channel wavefunction.

Positions are in units of 1/k, momenta in hbar*k (FFT wrap-around ordering),
so a spontaneous-emission recoil is a unit momentum shift and the kinetic
energy operator is recoil_energy * p**2.  The grid spacing must satisfy
dx <= 0.5 to resolve the unit recoil phase exp(-i u x); that bound is
reported by :func:`validate_grid` rather than enforced by the constructor.

A :class:`WaveState` holds the complex amplitudes of the channels
|g,0>, |e,0>, |g,1> as rows 0, 1, 2 of a (3, n) array.  Norms are discrete
Riemann sums with weight dx.  States are values: operations return new
states and never mutate their inputs.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidGrid
from .params import Diagnostic, Severity

__all__ = [
    "CH_G0", "CH_E0", "CH_G1", "CHANNEL_NAMES",
    "Grid", "WaveState", "make_grid", "validate_grid",
    "zero_state", "gaussian_state",
    "norm_sq", "channel_norms_sq", "normalized", "inside_probability",
    "apply_momentum_kick", "kinetic_energy", "mean_position", "mean_momentum",
    "momentum_spectrum", "absorbing_mask", "save_state_csv",
]

CH_G0, CH_E0, CH_G1 = 0, 1, 2
CHANNEL_NAMES = ("g0", "e0", "g1")

MAX_DX = 0.5


@dataclass(frozen=True)
class Grid:
    """Uniform spatial grid on [-half_extent, half_extent)."""

    n: int
    half_extent: float
    dx: float
    x: np.ndarray = field(repr=False, compare=False)
    p: np.ndarray = field(repr=False, compare=False)

    def __hash__(self):
        return hash((self.n, self.half_extent))


def make_grid(n, half_extent):
    """Build a grid with n points (power of two, >= 64) on [-L, L).

    The conjugate momentum grid is 2*pi*fftfreq(n, dx) with max |p| = pi/dx.
    """
    if n < 64 or (n & (n - 1)) != 0:
        raise InvalidGrid(f"n = {n} must be a power of two >= 64")
    if half_extent <= 0:
        raise InvalidGrid("half_extent must be positive")
    dx = 2.0 * half_extent / n
    x = -half_extent + dx * np.arange(n)
    p = 2.0 * math.pi * np.fft.fftfreq(n, d=dx)
    x.setflags(write=False)
    p.setflags(write=False)
    return Grid(n=n, half_extent=float(half_extent), dx=dx, x=x, p=p)


def validate_grid(grid, cavity_width=None):
    """Diagnostics for a grid choice (dx bound, box-vs-cavity extent)."""
    out = []
    if grid.dx > MAX_DX:
        out.append(Diagnostic(
            Severity.ERROR, "grid-dx",
            f"dx = {grid.dx:.4g} > {MAX_DX}: the unit recoil phase exp(-iux) "
            "is unresolved",
        ))
    if cavity_width is not None and grid.half_extent < 2.0 * cavity_width:
        out.append(Diagnostic(
            Severity.WARN, "grid-extent",
            f"half_extent = {grid.half_extent:.4g} < 2 sigma = "
            f"{2 * cavity_width:.4g}: coupling envelope truncated at the box edge",
        ))
    return out


@dataclass
class WaveState:
    """Three complex amplitude arrays over the grid, one per channel."""

    grid: Grid
    data: np.ndarray  # complex128, shape (3, n)

    @property
    def phi_g0(self):
        return self.data[CH_G0]

    @property
    def phi_e0(self):
        return self.data[CH_E0]

    @property
    def phi_g1(self):
        return self.data[CH_G1]

    def copy(self):
        return WaveState(self.grid, self.data.copy())


def zero_state(grid):
    return WaveState(grid, np.zeros((3, grid.n), dtype=np.complex128))


def gaussian_state(grid, width, center=0.0, momentum=0.0, channel=CH_G0):
    """Normalized Gaussian packet of spatial std ``width`` in one channel."""
    s = zero_state(grid)
    x = grid.x
    psi = np.exp(-((x - center) ** 2) / (4.0 * width ** 2)
                 + 1j * momentum * x)
    psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
    s.data[channel] = psi
    return s


def norm_sq(state):
    """Total squared norm, sum over channels of dx * sum |phi|^2."""
    return float(np.sum(np.abs(state.data) ** 2) * state.grid.dx)


def channel_norms_sq(state):
    """Per-channel squared norms as an array (g0, e0, g1)."""
    return np.sum(np.abs(state.data) ** 2, axis=1) * state.grid.dx


def normalized(state):
    """Return the state scaled to unit total norm."""
    n2 = norm_sq(state)
    if n2 <= 0:
        raise ValueError("cannot normalize a zero state")
    return WaveState(state.grid, state.data / math.sqrt(n2))


def inside_probability(state, sigma):
    """Fraction of the total density found at |x| < sigma."""
    mask = np.abs(state.grid.x) < sigma
    dens = np.sum(np.abs(state.data[:, mask]) ** 2) * state.grid.dx
    return float(dens / norm_sq(state))


def apply_momentum_kick(state, u, channels="all"):
    """Multiply channels by exp(-i u x): shifts mean momentum by -u.

    ``channels`` is "all" or an iterable of channel indices.  The norm is
    unchanged (pointwise phase).
    """
    phase = np.exp(-1j * u * state.grid.x)
    out = state.copy()
    if channels == "all":
        out.data *= phase
    else:
        for c in channels:
            out.data[c] *= phase
    return out


def momentum_spectrum(state):
    """FFT of each channel with Parseval weight dx/n (densities sum to norm^2)."""
    return np.fft.fft(state.data, axis=1)


def kinetic_energy(state, recoil_energy):
    """<E_kin> = E_R <p^2> over the normalized total density, rad/s."""
    ft = momentum_spectrum(state)
    w = np.abs(ft) ** 2
    total = np.sum(w)
    if total <= 0:
        raise ValueError("zero state")
    return float(recoil_energy * np.sum(w * state.grid.p ** 2) / total)


def mean_momentum(state):
    """<p> in hbar*k over the normalized total density."""
    ft = momentum_spectrum(state)
    w = np.abs(ft) ** 2
    return float(np.sum(w * state.grid.p) / np.sum(w))


def mean_position(state):
    """<x> in 1/k over the normalized total density."""
    w = np.sum(np.abs(state.data) ** 2, axis=0)
    return float(np.sum(w * state.grid.x) / np.sum(w))


def absorbing_mask(grid, fraction=0.05):
    """Smooth cos^2 ramp to zero over the outer ``fraction`` of the box.

    Used to swallow amplitude that has left the trap region before it wraps
    around the periodic boundary; absorbed norm is tallied by the caller as
    probability that the atom left.
    """
    ramp_len = fraction * 2.0 * grid.half_extent
    edge = grid.half_extent - ramp_len
    mask = np.ones(grid.n)
    absx = np.abs(grid.x)
    sel = absx > edge
    mask[sel] = np.cos(0.5 * math.pi * (absx[sel] - edge) / ramp_len) ** 2
    return mask


def save_state_csv(state, path):
    """Write x, |phi_g0|^2, |phi_g1|^2, |phi_e0|^2 rows (density snapshot)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "dens_g0", "dens_g1", "dens_e0"])
        d = np.abs(state.data) ** 2
        for j in range(state.grid.n):
            w.writerow([f"{state.grid.x[j]:.12e}",
                        f"{d[CH_G0, j]:.12e}",
                        f"{d[CH_G1, j]:.12e}",
                        f"{d[CH_E0, j]:.12e}"])
