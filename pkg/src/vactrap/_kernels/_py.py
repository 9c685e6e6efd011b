"""Numpy implementation of the fused split-step core (fallback backend).

The fused loop advances X <- K(dt) V(dt) X where K is the kinetic phase in
Fourier space and V the pointwise 3x3 propagator in position space; the
buffer holds K(dt/2) psi, i.e. the physical state offset by a half kinetic
step, which :meth:`FusedCore.fourier_phase` undoes exactly when the caller
needs psi itself.  Per-channel norms are tracked every step so jump
decisions and renormalization never need extra passes.

Scalar rescalings are deferred in ``pend`` and folded into the next Fourier
phase multiply.
"""

import numpy as np

NAME = "python"

_BUDGET, _JCAV, _JATOM, _TOOLARGE, _TARGET = 0, 1, 2, 3, 4

MAX_JUMP_PROB = 0.1


class FusedCore:
    """Owns a (3, n) complex buffer and runs fused split-step loops."""

    def __init__(self, n):
        self.n = n
        self.buf = np.zeros((3, n), dtype=np.complex128)
        self.norms = np.zeros(3)
        self.pend = 1.0
        self.absorbed = 0.0
        self.m6 = None
        self.ph_full = None
        self.dx = 1.0
        self.kappa2dt = 0.0
        self.gamma2dt = 0.0
        self.mask = None

    @property
    def array(self):
        return self.buf

    def configure(self, m6, ph_full, dx, kappa2dt, gamma2dt, mask=None):
        """Install propagator tables.

        m6: (6, n) complex, symmetric 3x3 per point as rows
            (m00, m01, m02, m11, m12, m22) in channel order (g0, e0, g1).
        ph_full: (n,) complex kinetic phase for a full step, including the
            1/n backward-FFT normalization.
        kappa2dt, gamma2dt: 2*kappa*dt and 2*gamma*dt jump-rate factors.
        mask: optional (n,) real absorber applied after each V step.
        """
        self.m6 = np.ascontiguousarray(m6, dtype=np.complex128)
        self.ph_full = np.ascontiguousarray(ph_full, dtype=np.complex128)
        self.dx = float(dx)
        self.kappa2dt = float(kappa2dt)
        self.gamma2dt = float(gamma2dt)
        self.mask = None if mask is None else np.asarray(mask, dtype=float)

    def load(self, data):
        self.buf[:] = data
        self.pend = 1.0
        self.absorbed = 0.0
        self.refresh_norms()

    def flush(self):
        """Materialize any pending scalar rescale into the buffer."""
        if self.pend != 1.0:
            self.buf *= self.pend
            self.pend = 1.0

    def refresh_norms(self):
        self.flush()
        self.norms[:] = np.sum(np.abs(self.buf) ** 2, axis=1) * self.dx

    def fourier_phase(self, phase, scalar=1.0):
        """Apply an arbitrary Fourier-space phase (e.g. +/- half kinetic)."""
        self.flush()
        b = np.fft.fft(self.buf, axis=1)
        b *= phase * scalar
        self.buf[:] = np.fft.ifft(b, axis=1)
        self.buf *= self.n

    def _kv_step(self):
        b = np.fft.fft(self.buf, axis=1)
        b *= self.ph_full * self.pend
        self.pend = 1.0
        pos = np.fft.ifft(b, axis=1)
        pos *= self.n
        m = self.m6
        s0, s1, s2 = pos
        self.buf[0] = m[0] * s0 + m[1] * s1 + m[2] * s2
        self.buf[1] = m[1] * s0 + m[3] * s1 + m[4] * s2
        self.buf[2] = m[2] * s0 + m[4] * s1 + m[5] * s2
        if self.mask is not None:
            before = np.sum(np.abs(self.buf) ** 2, axis=1) * self.dx
            self.buf *= self.mask
            after = np.sum(np.abs(self.buf) ** 2, axis=1) * self.dx
            tb, ta = before.sum(), after.sum()
            if tb > 0:
                self.absorbed += (tb - ta) / tb * (1.0 - self.absorbed)
            self.norms[:] = after
        else:
            self.norms[:] = np.sum(np.abs(self.buf) ** 2, axis=1) * self.dx

    def advance_traj(self, nsteps, uniforms):
        """Trajectory loop: jump decision, then one renormalized step.

        Consumes one uniform per decision.  Returns (status, decisions);
        on a jump status the buffer still holds the pre-step state.
        """
        k2, g2 = self.kappa2dt, self.gamma2dt
        for i in range(nsteps):
            p_cav = k2 * self.norms[2]
            p_atom = g2 * self.norms[1]
            p = p_cav + p_atom
            if p >= MAX_JUMP_PROB:
                return _TOOLARGE, i
            r = uniforms[i]
            if r < p:
                status = _JCAV if r < p_cav else _JATOM
                return status, i + 1
            self._kv_step()
            total = self.norms.sum()
            self.pend = 1.0 / np.sqrt(total)
            self.norms /= total
        return _BUDGET, nsteps

    def advance_decay(self, nsteps, totals, target):
        """No-jump norm decay: no renormalization, record norm^2 per step."""
        for i in range(nsteps):
            self._kv_step()
            tot = self.norms.sum()
            totals[i] = tot
            if tot <= target:
                return _TARGET, i + 1
        return _BUDGET, nsteps

    def advance_renorm(self, nsteps):
        """Renormalized propagation (imaginary time, or norm-stable real)."""
        for i in range(nsteps):
            self._kv_step()
            total = self.norms.sum()
            self.pend = 1.0 / np.sqrt(total)
            self.norms /= total
        return _BUDGET, nsteps
