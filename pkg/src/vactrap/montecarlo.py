"""Quantum-jump unravelling of the dissipative dynamics.

Between emissions the state follows the non-Hermitian no-jump generator;
each step the total jump probability

    p = 2 kappa |phi_g1|^2 dt + 2 gamma |phi_e0|^2 dt        (unit norm)

is compared against one uniform draw.  On a jump the excited channel's
spatial profile is moved to |g,0> (atomic jumps first pick a recoil u from
the emission pattern and multiply by exp(-i u x)), everything else is
zeroed, and the state is renormalized; otherwise the state advances one
effective step and is renormalized.

RNG consumption contract (what makes reruns reproducible): a trajectory
consumes exactly one uniform per time step, plus one extra uniform per
atomic jump (recoil via inverse CDF), from ``numpy.random.default_rng(seed)``
in step order.  Ensembles derive trajectory seeds as base_seed + index and
are embarrassingly parallel.
"""

import math
import os
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._kernels import (STATUS_JUMP_ATOM, STATUS_JUMP_CAVITY,
                       STATUS_TOO_LARGE)
from .errors import EmptyChannel, StepTooLarge
from .evolution import Engine, StepMode, default_dt, get_propagator
from .grid import (CH_E0, CH_G0, CH_G1, WaveState, absorbing_mask,
                   channel_norms_sq, normalized)

__all__ = [
    "RecoilForm", "RecoilDistribution", "sample_recoil",
    "JumpEvent", "TrajectoryRecord", "EnsembleStats",
    "jump_probabilities", "apply_cavity_jump", "apply_atom_jump",
    "run_trajectory", "run_ensemble",
]

SAMPLE_DTYPE = np.dtype([
    ("t", "f8"), ("inside", "f8"),
    ("p_g0", "f8"), ("p_e0", "f8"), ("p_g1", "f8"),
    ("e_kin", "f8"),
])


class RecoilForm(str, Enum):
    DIPOLE_LINEAR = "dipole_linear"      # N(u) = 3/4 (1 - u^2)
    DIPOLE_CIRCULAR = "dipole_circular"  # N(u) = 3/8 (1 + u^2)
    UNIFORM = "uniform"                  # N(u) = 1/2


@dataclass(frozen=True)
class RecoilDistribution:
    """Projected emission pattern N(u) on u in [-1, 1]."""

    form: RecoilForm = RecoilForm.DIPOLE_LINEAR

    def density(self, u):
        u = np.asarray(u, dtype=float)
        if self.form is RecoilForm.DIPOLE_LINEAR:
            return 0.75 * (1.0 - u * u)
        if self.form is RecoilForm.DIPOLE_CIRCULAR:
            return 0.375 * (1.0 + u * u)
        return np.full_like(u, 0.5)

    def characteristic(self, s):
        """Fourier transform integral of N(u) e^{-ius} du (real, even)."""
        s = np.asarray(s, dtype=float)
        out = np.ones_like(s)
        nz = np.abs(s) > 1e-8
        sn = s[nz]
        if self.form is RecoilForm.DIPOLE_LINEAR:
            out[nz] = 3.0 * (np.sin(sn) - sn * np.cos(sn)) / sn ** 3
        elif self.form is RecoilForm.DIPOLE_CIRCULAR:
            out[nz] = 0.75 * ((sn * sn - 1.0) * np.sin(sn)
                              + sn * np.cos(sn)) / sn ** 3
            out[~nz] = 1.0
        else:
            out[nz] = np.sin(sn) / sn
        # series value at s -> 0 is 1 for all normalized forms
        return out

    def ppf(self, q):
        """Inverse CDF (closed forms), q in [0, 1] -> u in [-1, 1]."""
        q = np.asarray(q, dtype=float)
        if self.form is RecoilForm.DIPOLE_LINEAR:
            # CDF 3/4 (u - u^3/3) + 1/2 = q  =>  u^3 - 3u + (4q - 2) = 0
            u = 2.0 * np.sin(np.arcsin(2.0 * q - 1.0) / 3.0)
        elif self.form is RecoilForm.DIPOLE_CIRCULAR:
            # CDF (3u + u^3)/8 + 1/2 = q  =>  u^3 + 3u - (8q - 4) = 0
            u = 2.0 * np.sinh(np.arcsinh(4.0 * q - 2.0) / 3.0)
        else:
            u = 2.0 * q - 1.0
        return np.clip(u, -1.0, 1.0)


def sample_recoil(dist, rng, size=None):
    """Draw recoil values u per N(u) by inverse-CDF sampling."""
    q = rng.random() if size is None else rng.random(size)
    out = dist.ppf(q)
    return float(out) if size is None else out


@dataclass(frozen=True)
class JumpEvent:
    t: float
    channel: str  # "cavity" | "atom"
    u: float | None = None


@dataclass
class TrajectoryRecord:
    seed: int
    events: list
    samples: np.ndarray  # SAMPLE_DTYPE
    trap_time: float | None
    t_end: float
    t_max: float
    absorbed: float = 0.0

    @property
    def escaped(self):
        return self.trap_time is not None

    @property
    def n_events(self):
        return len(self.events)


@dataclass
class EnsembleStats:
    """Trapping-time statistics with right-censoring at t_max.

    Censored trajectories (never reached the escape condition) enter order
    statistics as +inf, so the median/quartiles are exact whenever fewer
    than the corresponding fraction are censored and +inf otherwise.
    """

    seeds: list
    trap_times: list          # float or None per trajectory
    n_events: list
    t_max: float

    @property
    def n_escaped(self):
        return sum(1 for t in self.trap_times if t is not None)

    @property
    def n_censored(self):
        return len(self.trap_times) - self.n_escaped

    def _order_values(self):
        return np.sort([math.inf if t is None else t for t in self.trap_times])

    def _quantile(self, frac):
        # linear interpolation that tolerates the +inf censoring sentinel
        v = self._order_values()
        pos = (len(v) - 1) * frac
        lo, hi = int(math.floor(pos)), int(math.ceil(pos))
        if v[lo] == v[hi] or math.isinf(v[lo]):
            return float(v[lo])
        return float(v[lo] + (pos - lo) * (v[hi] - v[lo]))

    @property
    def median(self):
        return self._quantile(0.5)

    @property
    def quartiles(self):
        return (self._quantile(0.25), self._quantile(0.75))

    @property
    def mean_escaped(self):
        vals = [t for t in self.trap_times if t is not None]
        return float(np.mean(vals)) if vals else math.nan


def jump_probabilities(state, p, dt):
    """Per-step jump probabilities (p_cav, p_atom); enforces p_total < 0.1."""
    norms = channel_norms_sq(state)
    total = norms.sum()
    p_cav = 2.0 * p.kappa * norms[CH_G1] * dt / total
    p_atom = 2.0 * p.gamma * norms[CH_E0] * dt / total
    if p_cav + p_atom >= 0.1:
        raise StepTooLarge(
            f"jump probability {p_cav + p_atom:.3g} per step exceeds 0.1; "
            "reduce dt")
    return p_cav, p_atom


def _reset(state, src, phase=None):
    norms = channel_norms_sq(state)
    if norms[src] <= 0.0:
        raise EmptyChannel(f"channel {src} has zero norm")
    out = state.copy()
    prof = out.data[src].copy()
    if phase is not None:
        prof *= phase
    out.data[:] = 0.0
    out.data[CH_G0] = prof
    return normalized(out)


def apply_cavity_jump(state):
    """Cavity emission reset: |g,1> profile moves to |g,0>, renormalized."""
    return _reset(state, CH_G1)


def apply_atom_jump(state, u):
    """Spontaneous emission reset with recoil u: e^{-iux} |g,0><e,0|."""
    phase = np.exp(-1j * u * state.grid.x)
    return _reset(state, CH_E0, phase)


class _UniformStream:
    """Buffered view of rng.random() draws, one per step (+1 per atom jump)."""

    def __init__(self, rng, block=8192):
        self.rng = rng
        self.block = block
        self.buf = rng.random(block)
        self.pos = 0

    def view(self, want):
        if self.pos >= len(self.buf):
            self.buf = self.rng.random(self.block)
            self.pos = 0
        return self.buf[self.pos:self.pos + want]

    def consume(self, used):
        self.pos += used

    def next(self):
        v = self.view(1)
        self.consume(1)
        return float(v[0])


def _measure(core, grid, sigma, recoil_energy, absorbed):
    """Observables of the completed (physical-frame) core state."""
    arr = core.array
    dens = np.abs(arr) ** 2
    total = dens.sum()
    inside_mask = np.abs(grid.x) < sigma
    inside = dens[:, inside_mask].sum() / total
    inside *= (1.0 - absorbed)
    ft = np.fft.fft(arr, axis=1)
    w = np.abs(ft) ** 2
    e_kin = recoil_energy * float(np.sum(w * grid.p ** 2) / np.sum(w))
    ch = dens.sum(axis=1) / total
    return inside, ch, e_kin


def run_trajectory(p, grid, init, t_max, seed, dt=None,
                   recoil=RecoilDistribution(), sample_interval=1000,
                   overshoot=0.0, absorb=False):
    """Single quantum-jump trajectory.

    First-order scheme: each step draws one uniform r; if r falls below the
    total jump probability the corresponding reset happens (the draw also
    selects the channel, proportionally), otherwise the state advances one
    effective step and is renormalized.  Observables are sampled every
    ``sample_interval`` steps; the trapping time is the interpolated first
    time the in-cavity probability reaches 0.5.  Deterministic given
    (seed, dt, grid, params, init).
    """
    if dt is None:
        dt = default_dt(p)
    nsteps = int(round(t_max / dt))
    prop = get_propagator(p, grid, dt, StepMode.REAL_EFFECTIVE)
    mask = absorbing_mask(grid) if absorb else None
    eng = Engine(prop, mask=mask)
    rng = np.random.default_rng(seed)
    stream = _UniformStream(rng)
    sigma = p.cavity_width

    state = normalized(init)
    eng.core.load(state.data)

    samples = []
    events = []
    trap_time = None
    stop_step = nsteps

    inside, ch, e_kin = _measure(eng.core, grid, sigma, p.recoil_energy, 0.0)
    samples.append((0.0, inside, ch[CH_G0], ch[CH_E0], ch[CH_G1], e_kin))
    prev_sample = (0.0, inside)

    eng.core.fourier_phase(prop.ph_half)
    eng.core.refresh_norms()

    step_i = 0
    while step_i < stop_step:
        boundary = min(stop_step,
                       (step_i // sample_interval + 1) * sample_interval)
        want = boundary - step_i
        u_view = stream.view(want)
        status, used = eng.core.advance_traj(len(u_view), u_view)
        stream.consume(used)
        step_i += used
        if status == STATUS_TOO_LARGE:
            raise StepTooLarge(
                "per-step jump probability exceeded 0.1; reduce dt")
        if status in (STATUS_JUMP_CAVITY, STATUS_JUMP_ATOM):
            t_jump = step_i * dt
            eng.core.fourier_phase(prop.ph_half_inv)
            arr = eng.core.array
            if status == STATUS_JUMP_CAVITY:
                arr[CH_G0] = arr[CH_G1]
                events.append(JumpEvent(t_jump, "cavity"))
            else:
                u = float(recoil.ppf(stream.next()))
                arr[CH_G0] = arr[CH_E0] * np.exp(-1j * u * grid.x)
                events.append(JumpEvent(t_jump, "atom", u))
            arr[CH_E0] = 0.0
            arr[CH_G1] = 0.0
            nrm = math.sqrt(np.sum(np.abs(arr[CH_G0]) ** 2) * grid.dx)
            if nrm <= 0.0:
                raise EmptyChannel("jump from an empty channel")
            arr[CH_G0] /= nrm
            eng.core.refresh_norms()
            eng.core.fourier_phase(prop.ph_half)
            eng.core.refresh_norms()
            continue
        # sample boundary (or end) reached
        t_now = step_i * dt
        eng.core.fourier_phase(prop.ph_half_inv)
        inside, ch, e_kin = _measure(eng.core, grid, sigma, p.recoil_energy,
                                     eng.core.absorbed)
        samples.append((t_now, inside, ch[CH_G0], ch[CH_E0], ch[CH_G1], e_kin))
        if trap_time is None and inside <= 0.5:
            t0, in0 = prev_sample
            if in0 > 0.5:
                frac = (in0 - 0.5) / (in0 - inside)
                trap_time = t0 + frac * (t_now - t0)
            else:
                trap_time = t_now
            stop_step = min(stop_step,
                            step_i + int(math.ceil(overshoot / dt)))
        prev_sample = (t_now, inside)
        if step_i < stop_step:
            eng.core.fourier_phase(prop.ph_half)
            eng.core.refresh_norms()

    rec = np.array(samples, dtype=SAMPLE_DTYPE)
    return TrajectoryRecord(seed=seed, events=events, samples=rec,
                            trap_time=trap_time, t_end=step_i * dt,
                            t_max=t_max, absorbed=float(eng.core.absorbed))


def _run_one(args):
    p, grid_spec, init_data, t_max, seed, kwargs = args
    from .grid import make_grid
    grid = make_grid(*grid_spec)
    init = WaveState(grid, init_data)
    return run_trajectory(p, grid, init, t_max, seed, **kwargs)


def run_ensemble(p, grid, init, t_max, n, base_seed, workers=None, **kwargs):
    """n independent trajectories with seeds base_seed + i.

    ``workers`` defaults to the VACTRAP_WORKERS environment variable, then
    to the CPU count.  Trajectories are independent processes (private state,
    private RNG streams); results are deterministic regardless of scheduling.
    """
    if n < 1:
        raise ValueError("n >= 1 trajectories required")
    if workers is None:
        workers = int(os.environ.get("VACTRAP_WORKERS", 0)) or os.cpu_count()
    seeds = [base_seed + i for i in range(n)]
    if workers > 1 and n > 1:
        from concurrent.futures import ProcessPoolExecutor
        jobs = [(p, (grid.n, grid.half_extent), init.data, t_max, s, kwargs)
                for s in seeds]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            records = list(ex.map(_run_one, jobs))
    else:
        records = [run_trajectory(p, grid, init, t_max, s, **kwargs)
                   for s in seeds]
    stats = EnsembleStats(
        seeds=seeds,
        trap_times=[r.trap_time for r in records],
        n_events=[r.n_events for r in records],
        t_max=t_max,
    )
    return stats, records
