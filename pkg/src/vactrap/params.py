"""Physical parameter records, experiment presets, and validity checking.

The model is a single two-level atom coupled to one cavity mode with
position-dependent strength g(x), driven by a weak external laser with Rabi
frequency omega and detuning delta = omega_L - omega_0 (red detuning is
negative, and trapping requires delta < -g0).  Only the detuning enters; the
optical frequencies themselves never appear (rotating frame).

See :mod:`vactrap.units` for the unit conventions, in particular the bare-kHz
reading that fixes ``recoil_energy`` = 4e3 rad/s in the optical preset.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .units import TWO_PI

__all__ = [
    "ModeProfile", "PhysicalParams", "RegimePreset", "Severity", "Diagnostic",
    "optical_preset", "microwave_preset", "get_preset", "PRESET_NAMES",
    "validate", "coupling_at",
]

# "a << b" is read as a < b / REGIME_FACTOR when checking the perturbative
# regime; 3x separation is the loosest ratio we still let pass silently.
REGIME_FACTOR = 3.0


class ModeProfile(str, Enum):
    """Functional form of the coupling envelope g(x)."""

    GAUSSIAN = "gaussian"
    SQUARED_COSINE = "cos2"


@dataclass(frozen=True)
class PhysicalParams:
    """All rates and geometry of the atom-cavity-laser system.

    Attributes
    ----------
    g0 : float
        Peak atom-cavity coupling, rad/s.
    kappa : float
        Cavity field decay rate, rad/s.  The photon number decays at 2*kappa.
    gamma : float
        Atomic amplitude decay rate, rad/s.  Excited population decays at
        2*gamma.
    omega : float
        Laser Rabi frequency, rad/s.
    delta : float
        Laser detuning omega_L - omega_0, rad/s (signed; trapping needs
        delta < -g0).
    recoil_energy : float
        Photon recoil energy hbar*k^2/(2m) expressed as an angular frequency
        (hbar = 1), rad/s.
    cavity_width : float
        Width sigma of the coupling envelope, in units of 1/k.
    mode_profile : ModeProfile
        Shape of g(x).
    """

    g0: float
    kappa: float
    gamma: float
    omega: float
    delta: float
    recoil_energy: float
    cavity_width: float
    mode_profile: ModeProfile = ModeProfile.GAUSSIAN

    def __post_init__(self):
        if not self.g0 > 0:
            raise ValueError("g0 must be positive")
        if self.kappa < 0 or self.gamma < 0:
            raise ValueError("decay rates must be non-negative")
        if self.omega < 0:
            raise ValueError("omega must be non-negative")
        if not self.recoil_energy > 0:
            raise ValueError("recoil_energy must be positive")
        if not self.cavity_width > 0:
            raise ValueError("cavity_width must be positive")
        object.__setattr__(self, "mode_profile", ModeProfile(self.mode_profile))

    def replace(self, **changes):
        import dataclasses
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class RegimePreset:
    name: str
    params: PhysicalParams


def optical_preset():
    """Optical-regime parameters (Rb in a high-finesse cavity).

    (g0, kappa, gamma) = (16, 1.4, 3) x 2pi MHz; the laser design point
    omega = 0.70 x 2pi MHz, |delta| = 30 x 2pi MHz is the depth-constrained
    lifetime optimum for a 1.02e4 rad/s deep trap.
    """
    g0 = 16 * TWO_PI * 1e6
    return PhysicalParams(
        g0=g0,
        kappa=1.4 * TWO_PI * 1e6,
        gamma=3 * TWO_PI * 1e6,
        omega=0.70 * TWO_PI * 1e6,
        delta=-30 * TWO_PI * 1e6,
        recoil_energy=4e3,
        cavity_width=100.0,
        mode_profile=ModeProfile.GAUSSIAN,
    )


def microwave_preset():
    """Microwave-regime parameters (circular Rydberg states, micro-cavity).

    g0 = 67 x 2pi kHz, kappa = gamma = 1.6 x 2pi Hz, laser design point
    omega = 54 x 2pi kHz, |delta| = 2.06 g0.  Spontaneous recoil is
    practically zero for a microwave photon; recoil_energy is set to a tiny
    positive placeholder (4 rad/s, < 1e-4 g0) so kinetic terms stay defined.
    """
    g0 = 67 * TWO_PI * 1e3
    return PhysicalParams(
        g0=g0,
        kappa=1.6 * TWO_PI,
        gamma=1.6 * TWO_PI,
        omega=54 * TWO_PI * 1e3,
        delta=-2.06 * g0,
        recoil_energy=4.0,
        cavity_width=100.0,
        mode_profile=ModeProfile.GAUSSIAN,
    )


PRESET_NAMES = ("optical", "microwave")


def get_preset(name):
    if name == "optical":
        return RegimePreset("optical", optical_preset())
    if name == "microwave":
        return RegimePreset("microwave", microwave_preset())
    raise KeyError(f"unknown preset {name!r}; available: {PRESET_NAMES}")


class Severity(str, Enum):
    WARN = "WARN"
    ERROR = "ERROR"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str


def validate(p, trapping=False):
    """Check a parameter set against the perturbative-regime assumptions.

    Returns a list of diagnostics (never raises).  WARNs flag violations of
    omega << |delta + g0| << g0; analytics and numerics stay well defined
    outside that regime, only the simple closed-form estimates degrade.
    With ``trapping=True`` an ERROR is emitted when the detuning cannot
    produce an attractive potential (delta >= -g0).
    """
    out = []
    gap = abs(p.delta + p.g0)
    if p.omega > 0 and p.omega * REGIME_FACTOR > gap:
        out.append(Diagnostic(
            Severity.WARN, "regime-omega",
            f"omega = {p.omega:.4g} rad/s is not << |delta+g0| = {gap:.4g} rad/s; "
            "closed-form depth/lifetime estimates lose accuracy",
        ))
    if gap * REGIME_FACTOR > p.g0:
        out.append(Diagnostic(
            Severity.WARN, "regime-gap",
            f"|delta+g0| = {gap:.4g} rad/s = {gap / p.g0:.3g} g0 is not << g0; "
            "the near-resonant approximation for the depth is off",
        ))
    if trapping:
        if -p.g0 <= p.delta <= 0:
            out.append(Diagnostic(
                Severity.ERROR, "no-trap",
                f"delta = {p.delta:.4g} rad/s lies in [-g0, 0]: no attractive "
                "potential (depth <= 0)",
            ))
        elif p.delta > 0:
            out.append(Diagnostic(
                Severity.ERROR, "no-trap",
                "trapping requires red detuning below the lower dressed "
                f"branch (delta < -g0); got delta = {p.delta:.4g} rad/s",
            ))
    return out


def coupling_at(p, x):
    """Coupling g(x) in rad/s; x in units of 1/k (scalar or array).

    Gaussian: g0 * exp(-x^2 / (2 sigma^2)).
    Squared-cosine envelope: g0 * cos^2(pi x / (4 sigma)) for |x| < 2 sigma,
    zero outside.  Both peak at exactly g0 at x = 0.
    """
    x = np.asarray(x, dtype=float)
    s = p.cavity_width
    if p.mode_profile is ModeProfile.GAUSSIAN:
        g = p.g0 * np.exp(-(x * x) / (2.0 * s * s))
    else:
        g = np.where(
            np.abs(x) < 2.0 * s,
            p.g0 * np.cos(math.pi * x / (4.0 * s)) ** 2,
            0.0,
        )
    if g.ndim == 0:
        return float(g)
    return g
