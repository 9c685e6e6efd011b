"""Closed-form physics of the vacuum trap.

Everything here is derived in the one-excitation subspace spanned by
{|g,0>, |e,0>, |g,1>}.  At a fixed position the Hamiltonian in that basis
(rotating frame, hbar = 1) is

    H'(x) = [[ delta/2,  omega/2,  0    ],
             [ omega/2, -delta/2,  g(x) ],
             [ 0,        g(x),    -delta/2 ]].

For a weak laser the dressed ground level is |g,0> with small admixtures of
|g,1> and |e,0>; its position-dependent shift lambda0(x) is the trapping
potential.  Subtracting the shift at g = 0 gives the exact depth

    V0 = -omega^2 g0^2 / (4 delta (delta^2 - g0^2)),

positive for delta < -g0.  The admixtures leak at the cavity and atomic
rates, giving the effective loss rate

    Gamma_eff = omega^2 (kappa g0^2 + gamma delta^2) / (4 (delta^2 - g0^2)^2)

and the effective lifetime tau_eff = 1/Gamma_eff (time scale of the first
photon emission).
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateDenominator, DegenerateInput,
                     InfeasibleTargetWarning, Unbounded)
from .params import coupling_at

__all__ = [
    "PerturbativeLevels", "LaserDesign",
    "dressed_energies", "perturbative_levels", "exact_subspace_spectrum",
    "subspace_matrix", "potential_depth_exact", "potential_depth_approx",
    "potential_curve", "lifetime_estimate", "gamma_eff", "tau_eff",
    "bound_state_margin", "optimize_laser",
]

# relative degeneracy guard on |delta +/- g| denominators
DEGENERACY_EPS = 1e-6


@dataclass(frozen=True)
class PerturbativeLevels:
    """Second-order spectrum and first-order admixtures at one position.

    ``lambda2`` keeps the asymmetric (delta + g) denominator of the source
    expression; ``lambda2_alt`` is the symmetric-looking (delta - g) variant
    one would expect from the level pairing.  The two differ only in a level
    that feeds no downstream quantity; both are exposed for comparison.
    """

    lambda0: float
    lambda1: float
    lambda2: float
    lambda2_alt: float
    amp_g1_in_psi0: float
    amp_e0_in_psi0: float


@dataclass(frozen=True)
class LaserDesign:
    """Result of the depth-constrained lifetime optimization."""

    omega: float     # rad/s
    delta: float     # rad/s, negative
    v0: float        # rad/s
    tau_eff: float   # seconds


def dressed_energies(g):
    """Energies (+g, -g) of the one-excitation dressed doublet."""
    if g < 0:
        raise ValueError("coupling must be non-negative")
    return (+g, -g)


def _check_denominators(delta, g, g0):
    eps = DEGENERACY_EPS * g0
    for denom in (delta + g, delta - g):
        if abs(denom) < eps:
            raise DegenerateDenominator(
                f"|delta +/- g| = {abs(denom):.3g} rad/s is below the "
                f"degeneracy epsilon {eps:.3g} rad/s"
            )


def perturbative_levels(p, x):
    """Perturbative eigenvalues and ground-level admixtures at position x.

    Second order in omega for the levels, first order for the amplitudes:

        lambda0 = delta/2 + (omega^2/8) (1/(delta+g) + 1/(delta-g))
        lambda1 = -delta/2 - g - omega^2 / (8 (delta+g))
        lambda2 = -delta/2 + g - omega^2 / (8 (delta+g))

    with admixtures (omega/2) g/(delta^2-g^2) on |g,1> and
    (omega/2) delta/(delta^2-g^2) on |e,0>.
    """
    g = coupling_at(p, x)
    d = p.delta
    _check_denominators(d, g, p.g0)
    om2_8 = p.omega ** 2 / 8.0
    lam0 = d / 2.0 + om2_8 * (1.0 / (d + g) + 1.0 / (d - g))
    lam1 = -d / 2.0 - g - om2_8 / (d + g)
    lam2 = -d / 2.0 + g - om2_8 / (d + g)
    lam2_alt = -d / 2.0 + g - om2_8 / (d - g)
    denom = d * d - g * g
    half = p.omega / 2.0
    return PerturbativeLevels(
        lambda0=lam0, lambda1=lam1, lambda2=lam2, lambda2_alt=lam2_alt,
        amp_g1_in_psi0=half * g / denom,
        amp_e0_in_psi0=half * d / denom,
    )


def subspace_matrix(p, x, effective=False):
    """3x3 matrix H'(x) in basis (|g,0>, |e,0>, |g,1>).

    With ``effective=True`` the non-Hermitian damping -i*gamma on |e,0> and
    -i*kappa on |g,1> is included (the no-jump generator, minus kinetics).
    """
    g = coupling_at(p, x)
    d = p.delta
    m = np.array([
        [d / 2.0,       p.omega / 2.0, 0.0],
        [p.omega / 2.0, -d / 2.0,      g],
        [0.0,           g,             -d / 2.0],
    ], dtype=complex)
    if effective:
        m[1, 1] -= 1j * p.gamma
        m[2, 2] -= 1j * p.kappa
    return m


# reference eigenvectors at omega = 0, used to label the exact spectrum
def _zero_omega_labels():
    r0 = np.array([1.0, 0.0, 0.0])
    r1 = np.array([0.0, -1.0, 1.0]) / math.sqrt(2.0)   # (|g,1> - |e,0>)/sqrt2
    r2 = np.array([0.0, 1.0, 1.0]) / math.sqrt(2.0)    # (|g,1> + |e,0>)/sqrt2
    return np.stack([r0, r1, r2])


def exact_subspace_spectrum(p, x):
    """Exact eigensystem of the Hermitian H'(x).

    Returns a list of three (eigenvalue, eigenvector) pairs ordered by
    overlap with the omega = 0 labels: index 0 is the |g,0>-like dressed
    ground level, 1 the lower dressed branch, 2 the upper.  Eigenvectors are
    unit norm with the dominant component rotated to positive real.
    """
    m = subspace_matrix(p, x, effective=False).real
    vals, vecs = np.linalg.eigh(m)
    refs = _zero_omega_labels()
    overlaps = np.abs(refs @ vecs)  # overlaps[i, j] = |<ref_i | v_j>|
    order = [-1, -1, -1]
    work = overlaps.copy()
    # greedy assignment, largest overlaps first
    for _ in range(3):
        i, j = np.unravel_index(np.argmax(work), work.shape)
        order[i] = j
        work[i, :] = -1.0
        work[:, j] = -1.0
    out = []
    for i in range(3):
        j = order[i]
        v = vecs[:, j].astype(complex)
        phase = refs[i] @ v
        if abs(phase) > 0:
            v = v * (abs(phase) / phase)
        out.append((float(vals[j]), v))
    return out


def potential_depth_exact(p):
    """Exact trap depth V0 = -omega^2 g0^2 / (4 delta (delta^2 - g0^2)).

    Positive for delta < -g0 (attractive well), negative in -g0 < delta < 0.
    """
    if p.delta >= 0:
        raise ValueError("trap depth is defined for red detuning (delta < 0)")
    _check_denominators(p.delta, p.g0, p.g0)
    return -(p.omega ** 2 * p.g0 ** 2) / (
        4.0 * p.delta * (p.delta ** 2 - p.g0 ** 2))


def potential_depth_approx(p):
    """Near-resonance estimate V0 ~ omega^2 / (8 |delta + g0|)."""
    gap = abs(p.delta + p.g0)
    if gap < DEGENERACY_EPS * p.g0:
        raise DegenerateDenominator("delta + g0 is degenerate")
    return p.omega ** 2 / (8.0 * gap)


def potential_curve(p, x):
    """Trapping potential lambda0(x) minus its g = 0 asymptote (vectorized).

    Equals -V0 * [g(x)^2/g0^2] * (delta^2-g0^2)/(delta^2-g(x)^2); the value
    at x = 0 is exactly -potential_depth_exact(p).
    """
    g = coupling_at(p, np.asarray(x, dtype=float))
    d = p.delta
    return (p.omega ** 2 / (4.0 * d)) * g * g / (d * d - g * g)


def lifetime_estimate(p):
    """Back-of-envelope lifetime (4 |delta+g0|^2 / omega^2) min(1/gamma, 1/kappa)."""
    if p.omega == 0:
        raise DegenerateInput("omega = 0: no admixture, lifetime undefined/infinite")
    rate = max(p.kappa, p.gamma)
    if rate == 0:
        raise DegenerateInput("kappa = gamma = 0: no decay channel")
    return 4.0 * (p.delta + p.g0) ** 2 / p.omega ** 2 / rate


def gamma_eff(p):
    """Effective loss rate of the dressed ground level, rad/s."""
    _check_denominators(p.delta, p.g0, p.g0)
    denom = (p.delta ** 2 - p.g0 ** 2) ** 2
    return p.omega ** 2 * (p.kappa * p.g0 ** 2 + p.gamma * p.delta ** 2) / (
        4.0 * denom)


def tau_eff(p):
    """Effective decay time 1/gamma_eff, seconds."""
    rate = gamma_eff(p)
    if rate == 0:
        raise DegenerateInput("gamma_eff = 0 (no decay channel or omega = 0)")
    return 1.0 / rate


def bound_state_margin(v0, length, recoil_energy):
    """3D bound-state criterion margin V0 (L/lambda)^2 / E_R.

    ``length`` is in units of 1/k, so one optical wavelength is 2*pi.  A
    margin >= 1 guarantees a 3D bound state; in 1D a bound state exists for
    any positive depth.
    """
    if v0 < 0 or length <= 0 or recoil_energy <= 0:
        raise ValueError("margin needs v0 >= 0, length > 0, recoil_energy > 0")
    return v0 * (length / (2.0 * math.pi)) ** 2 / recoil_energy


def _d_optimum(c):
    """Positive root > 1 of d^4 - (c+3) d^2 - c = 0 (biquadratic)."""
    d2 = 0.5 * ((c + 3.0) + math.sqrt((c + 3.0) ** 2 + 4.0 * c))
    return math.sqrt(d2)


def tau_eff_at_depth(p, v0_target, d):
    """tau_eff at detuning |delta| = d*g0 with omega solved from the depth.

    Eliminating omega via the exact depth formula gives

        tau_eff(d) = g0 (d^2 - 1) / (V0 d (kappa + gamma d^2)),

    using kappa g0^2 + gamma delta^2 = g0^2 (kappa + gamma d^2).
    """
    return p.g0 * (d * d - 1.0) / (
        v0_target * d * (p.kappa + p.gamma * d * d))


def optimize_laser(p, v0_target):
    """Longest-lifetime laser parameters at a fixed trap depth.

    Fixing V0 determines omega as a function of delta; the remaining
    one-dimensional objective tau_eff(d), d = |delta|/g0 > 1, is maximized in
    closed form by the positive root of d^4 - (c+3) d^2 - c = 0 with
    c = kappa/gamma.  Raises :class:`Unbounded` for gamma = 0, where
    tau_eff grows like |delta| / (kappa V0) without bound.  Warns (and still
    returns) if the resulting omega is not small against |delta|.
    """
    if v0_target <= 0:
        raise ValueError("v0_target must be positive")
    if p.kappa + p.gamma <= 0:
        raise DegenerateInput("kappa = gamma = 0: lifetime is infinite")
    if p.gamma == 0:
        raise Unbounded(
            "gamma = 0: tau_eff ~ |delta|/(kappa V0) grows without bound; "
            "no finite optimum"
        )
    c = p.kappa / p.gamma
    d = _d_optimum(c)
    delta = -d * p.g0
    # omega^2 = 4 V0 |delta| (delta^2 - g0^2) / g0^2 = 4 V0 g0 d (d^2 - 1)
    omega2 = 4.0 * v0_target * p.g0 * d * (d * d - 1.0)
    omega = math.sqrt(omega2)
    tau = tau_eff_at_depth(p, v0_target, d)
    if omega >= abs(delta):
        warnings.warn(
            f"target depth {v0_target:.4g} rad/s needs omega = {omega:.4g} "
            f">= |delta| = {abs(delta):.4g}; outside the weak-drive regime",
            InfeasibleTargetWarning,
            stacklevel=2,
        )
    return LaserDesign(omega=omega, delta=delta, v0=v0_target, tau_eff=tau)
