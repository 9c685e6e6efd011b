"""Time propagation: unitary, non-Hermitian no-jump, and imaginary time.

Second-order split-step: half kinetic phase in Fourier space, exact 3x3
matrix exponential per grid point in position space, half kinetic phase.
A constant energy shift delta/2 is subtracted from the channel matrix before
exponentiating (a pure global phase for the Hermitian flow) so the dressed
ground level sits near zero; this reduces the phase the exponentials carry
per step.  The stability/accuracy precondition for the real-time modes is
dt * E_max <= 0.1 with E_max the spectral bound of the shifted Hamiltonian
including the kinetic cutoff.

Long runs (ground state, decay, trajectories) use an :class:`Engine`, which
chains steps as K(dt/2) V (K V)^(m-1) K(dt/2) -- an exact regrouping of the
per-step splitting, not an extra approximation; the held state is offset by
a half kinetic phase, and the engine undoes that offset exactly whenever the
physical state is read out.
"""

import math
from enum import Enum
from functools import lru_cache

import numpy as np

from ._kernels import STATUS_TARGET, FusedCore
from .errors import NoConvergence, StepTooLarge, Timeout
from .grid import WaveState, channel_norms_sq, gaussian_state, normalized
from .params import coupling_at

__all__ = [
    "StepMode", "Propagator", "Engine",
    "build_subspace_matrix", "channel_matrices",
    "step", "ground_state", "energy_expectation", "no_jump_decay_time",
    "default_dt",
]

# real-time accuracy bound dt*E_max and imaginary-time kinetic damping bound
REAL_DT_BOUND = 0.1
IMAG_KIN_BOUND = 8.0


class StepMode(str, Enum):
    REAL_HERMITIAN = "real_hermitian"
    REAL_EFFECTIVE = "real_effective"
    IMAGINARY = "imaginary"


def default_dt(p):
    """Default real-time step: dt * |delta| = 0.04 (spectral scale ~ |delta|)."""
    return 0.04 / abs(p.delta)


def build_subspace_matrix(p, x, effective=False):
    """3x3 channel matrix H'(x) at one position; see :mod:`vactrap.analytic`."""
    from .analytic import subspace_matrix
    return subspace_matrix(p, x, effective=effective)


def channel_matrices(p, grid, effective=False):
    """(n, 3, 3) channel matrices over the whole grid, basis (g0, e0, g1)."""
    g = coupling_at(p, grid.x)
    n = grid.n
    h = np.zeros((n, 3, 3), dtype=np.complex128)
    d = p.delta
    h[:, 0, 0] = d / 2.0
    h[:, 1, 1] = -d / 2.0
    h[:, 2, 2] = -d / 2.0
    h[:, 0, 1] = h[:, 1, 0] = p.omega / 2.0
    h[:, 1, 2] = h[:, 2, 1] = g
    if effective:
        h[:, 1, 1] -= 1j * p.gamma
        h[:, 2, 2] -= 1j * p.kappa
    return h


def _expm_symmetric_batch(h, factor):
    """exp(factor * h) for a batch of symmetric 3x3 matrices.

    Hermitian (real) matrices go through eigh; complex-symmetric ones
    through eig with an explicit inverse.  The result of either branch is
    symmetric analytically and is symmetrized to clean up rounding.
    """
    if np.all(h.imag == 0):
        vals, vecs = np.linalg.eigh(h.real)
        phases = np.exp(factor * vals)
        out = np.einsum("nab,nb,ncb->nac", vecs, phases, vecs)
    else:
        vals, vecs = np.linalg.eig(h)
        phases = np.exp(factor * vals)
        inv = np.linalg.inv(vecs)
        out = np.einsum("nab,nb,nbc->nac", vecs, phases, inv)
        if not np.all(np.isfinite(out)):
            raise ArithmeticError(
                "channel propagator eigendecomposition ill-conditioned")
    return 0.5 * (out + out.transpose(0, 2, 1))


def _pack_m6(mat):
    """Symmetric (n,3,3) -> compact (6,n) rows (m00,m01,m02,m11,m12,m22)."""
    m6 = np.empty((6, mat.shape[0]), dtype=np.complex128)
    m6[0] = mat[:, 0, 0]
    m6[1] = mat[:, 0, 1]
    m6[2] = mat[:, 0, 2]
    m6[3] = mat[:, 1, 1]
    m6[4] = mat[:, 1, 2]
    m6[5] = mat[:, 2, 2]
    return np.ascontiguousarray(m6)


class Propagator:
    """Precomputed split-step tables for one (params, grid, dt, mode)."""

    def __init__(self, params, grid, dt, mode):
        mode = StepMode(mode)
        if dt <= 0:
            raise StepTooLarge("dt must be positive")
        self.params = params
        self.grid = grid
        self.dt = float(dt)
        self.mode = mode

        h_herm = channel_matrices(params, grid, effective=False)
        shift = params.delta / 2.0
        idx = np.arange(3)
        h_herm[:, idx, idx] -= shift

        p_max_sq = float(np.max(grid.p ** 2))
        kin_cut = params.recoil_energy * p_max_sq
        vals = np.linalg.eigvalsh(h_herm.real)
        self.e_max = float(np.max(np.abs(vals))) + kin_cut

        if mode is StepMode.IMAGINARY:
            # imaginary time is unconditionally damping-stable; bound only the
            # per-step kinetic decay so the splitting stays meaningful
            if dt * kin_cut > IMAG_KIN_BOUND:
                raise StepTooLarge(
                    f"imaginary step dt*E_kin_max = {dt * kin_cut:.3g} exceeds "
                    f"{IMAG_KIN_BOUND}")
            factor = -dt
            kin_factor = -params.recoil_energy * dt
        else:
            if dt * self.e_max > REAL_DT_BOUND:
                raise StepTooLarge(
                    f"dt*E_max = {dt * self.e_max:.3g} exceeds {REAL_DT_BOUND} "
                    f"(E_max = {self.e_max:.4g} rad/s)")
            factor = -1j * dt
            kin_factor = -1j * params.recoil_energy * dt

        if mode is StepMode.REAL_EFFECTIVE:
            h = channel_matrices(params, grid, effective=True)
            h[:, idx, idx] -= shift
        else:
            h = h_herm
        self.exp_v = _expm_symmetric_batch(h, factor)
        self.m6 = _pack_m6(self.exp_v)

        p2 = grid.p ** 2
        n = grid.n
        # fused-loop phases carry the 1/n of the unnormalized backward FFT
        self.ph_full = np.exp(kin_factor * p2) / n
        self.ph_half = np.exp(0.5 * kin_factor * p2) / n
        self.ph_half_inv = np.exp(-0.5 * kin_factor * p2) / n
        # plain (normalized-FFT) half phase for the literal step
        self.exp_half_kin = np.exp(0.5 * kin_factor * p2)

        self.renormalizes = mode is StepMode.IMAGINARY

    def apply_potential(self, data):
        """Pointwise 3x3 propagator applied to a (3, n) array (numpy path)."""
        m = self.m6
        s0, s1, s2 = data
        out = np.empty_like(data)
        out[0] = m[0] * s0 + m[1] * s1 + m[2] * s2
        out[1] = m[1] * s0 + m[3] * s1 + m[4] * s2
        out[2] = m[2] * s0 + m[4] * s1 + m[5] * s2
        return out

    def step(self, state):
        """One literal K(dt/2) V K(dt/2) step; returns a new WaveState."""
        ft = np.fft.fft(state.data, axis=1)
        ft *= self.exp_half_kin
        pos = np.fft.ifft(ft, axis=1)
        pos = self.apply_potential(pos)
        ft = np.fft.fft(pos, axis=1)
        ft *= self.exp_half_kin
        pos = np.fft.ifft(ft, axis=1)
        out = WaveState(state.grid, pos)
        if self.renormalizes:
            out = normalized(out)
        return out


@lru_cache(maxsize=16)
def _cached_propagator(params, grid, dt, mode):
    return Propagator(params, grid, dt, mode)


def get_propagator(params, grid, dt, mode):
    return _cached_propagator(params, grid, float(dt), StepMode(mode))


def step(state, params, grid, dt, mode):
    """Public single-step operation (cached propagator, value semantics)."""
    return get_propagator(params, grid, dt, mode).step(state)


class Engine:
    """A FusedCore bound to one propagator, for exclusive use by one run."""

    def __init__(self, prop, mask=None, core_cls=None):
        self.prop = prop
        self.core = (core_cls or FusedCore)(prop.grid.n)
        kappa2dt = 2.0 * prop.params.kappa * prop.dt
        gamma2dt = 2.0 * prop.params.gamma * prop.dt
        self.core.configure(prop.m6, prop.ph_full, prop.grid.dx,
                            kappa2dt, gamma2dt, mask)
        self._entered = False

    def enter(self, state):
        """Load a physical state and move to the fused (half-kick) frame."""
        self.core.load(state.data)
        self.core.fourier_phase(self.prop.ph_half)
        self.core.refresh_norms()
        self._entered = True

    def complete(self):
        """Undo the half-kick offset in place (stay loaded, leave fused frame)."""
        self.core.fourier_phase(self.prop.ph_half_inv)
        self._entered = False

    def reenter(self):
        self.core.fourier_phase(self.prop.ph_half)
        self.core.refresh_norms()
        self._entered = True

    def peek_state(self):
        """Physical state copy; engine must not be in the fused frame."""
        assert not self._entered
        self.core.flush()
        return WaveState(self.prop.grid, self.core.array.copy())


def energy_expectation(state, params):
    """Rayleigh quotient <H>/<1> with the full (unshifted) Hermitian H, rad/s."""
    ft = np.fft.fft(state.data, axis=1)
    w = np.abs(ft) ** 2
    total_k = np.sum(w)
    e_kin = params.recoil_energy * np.sum(w * state.grid.p ** 2) / total_k

    g = coupling_at(params, state.grid.x)
    d = params.delta
    s0, s1, s2 = state.data
    dens = np.abs(state.data) ** 2
    diag = (d / 2.0) * dens[0] - (d / 2.0) * (dens[1] + dens[2])
    cross = params.omega * np.real(np.conj(s0) * s1) \
        + 2.0 * g * np.real(np.conj(s1) * s2)
    e_pot = np.sum(diag + cross) / np.sum(dens)
    return float(e_kin + e_pot)


def _imaginary_dtau_ladder(params, grid):
    """Coarse-to-fine imaginary steps: start near the kinetic damping bound."""
    p_max_sq = float(np.max(grid.p ** 2))
    dtau = 2.0 / (params.recoil_energy * p_max_sq)
    return (dtau, dtau / 4.0, dtau / 16.0)


def ground_state(params, grid, tol=None, max_steps=2_000_000, seed_width=None):
    """Lowest state of the trapped three-channel system by imaginary time.

    Starts from a Gaussian of spatial std sigma/4 in the ground channel and
    applies renormalized imaginary-time split steps on a coarse-to-fine
    dtau ladder until the energy drifts by less than ``tol`` per unit
    imaginary time (default 1e-4 * |V0|, falling back to 1e-4 * E_R for
    untrapped configurations).  Returns (state, energy).
    """
    from .analytic import potential_depth_exact

    if tol is None:
        scale = params.recoil_energy
        if params.delta < 0:
            try:
                scale = max(abs(potential_depth_exact(params)), scale)
            except Exception:
                pass
        tol = 1e-4 * scale

    if seed_width is None:
        seed_width = params.cavity_width / 4.0
    state = gaussian_state(grid, seed_width)

    check_every = 100
    steps_done = 0
    for dtau in _imaginary_dtau_ladder(params, grid):
        prop = Propagator(params, grid, dtau, StepMode.IMAGINARY)
        eng = Engine(prop)
        eng.enter(state)
        e_prev = None
        while True:
            eng.core.advance_renorm(check_every)
            steps_done += check_every
            eng.complete()
            st = eng.peek_state()
            e_now = energy_expectation(st, params)
            if e_prev is not None:
                rate = abs(e_now - e_prev) / (check_every * dtau)
                if rate < tol:
                    state = normalized(st)
                    break
            if steps_done >= max_steps:
                raise NoConvergence(
                    f"imaginary time not converged after {steps_done} steps "
                    f"(last energy drift {rate if e_prev is not None else float('nan'):.3g} rad/s^2)")
            e_prev = e_now
            eng.reenter()
    return state, energy_expectation(state, params)


def no_jump_decay_time(state0, params, grid, dt=None, t_max=None,
                       recorder=None, record_every=8192):
    """Time at which the no-jump squared norm reaches 1/e.

    Evolves under the effective non-Hermitian generator without
    renormalization, recording norm^2 each step, and interpolates the 1/e
    crossing linearly.  Raises Timeout if the crossing does not occur within
    ``t_max`` (default: 50 analytic lifetimes).

    ``recorder``, if given, is called at checkpoints (every ``record_every``
    steps and at the crossing) with (t, norm2, frac_g0, frac_g1, frac_e0,
    mean_x, e_kin) of the instantaneous state.
    """
    from .analytic import tau_eff
    from .grid import kinetic_energy, mean_position

    if dt is None:
        dt = default_dt(params)
    if t_max is None:
        try:
            t_max = 50.0 * tau_eff(params)
        except Exception:
            raise Timeout("no decay channel: norm never reaches 1/e")
    target = 1.0 / math.e
    nsteps = int(math.ceil(t_max / dt))
    prop = get_propagator(params, grid, dt, StepMode.REAL_EFFECTIVE)
    eng = Engine(prop)
    init = normalized(state0)
    eng.enter(init)

    def record(t_now):
        if recorder is None:
            return
        eng.complete()
        st = eng.peek_state()
        norms = channel_norms_sq(st)
        tot = norms.sum()
        recorder((t_now, tot, norms[0] / tot, norms[2] / tot, norms[1] / tot,
                  mean_position(st), kinetic_energy(st, params.recoil_energy)))
        eng.reenter()

    record(0.0)
    chunk = min(record_every, 65536)
    done = 0
    prev_total = 1.0
    totals = np.empty(chunk)
    while done < nsteps:
        m = min(chunk, nsteps - done)
        status, used = eng.core.advance_decay(m, totals[:m], target)
        if status == STATUS_TARGET:
            i = used - 1
            t_hi = (done + used) * dt
            hi = totals[i]
            lo = totals[i - 1] if i > 0 else prev_total
            t_lo = t_hi - dt
            # linear interpolation of the crossing
            t_cross = t_lo + (lo - target) / (lo - hi) * dt
            record((done + used) * dt)
            return t_cross
        prev_total = totals[m - 1]
        done += used
        record(done * dt)
    raise Timeout(f"norm^2 still above 1/e after {t_max:.3g} s")
