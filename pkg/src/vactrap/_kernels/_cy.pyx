# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled fused split-step core: FFTW batch transforms + C inner loops.

Semantics are defined by the numpy reference implementation in ``_py.py``;
this module only makes the same loop fast (no per-step Python overhead, FFTW
plans reused across steps).
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

NAME = "compiled"

cdef extern from "fftw3.h" nogil:
    ctypedef double fftw_complex[2]
    ctypedef struct fftw_plan_s:
        pass
    ctypedef fftw_plan_s *fftw_plan
    fftw_plan fftw_plan_many_dft(int rank, const int *n, int howmany,
                                 fftw_complex *inp, const int *inembed,
                                 int istride, int idist,
                                 fftw_complex *out, const int *onembed,
                                 int ostride, int odist,
                                 int sign, unsigned flags)
    void fftw_execute(const fftw_plan plan)
    void fftw_destroy_plan(fftw_plan plan)

cdef int FFTW_FORWARD = -1
cdef int FFTW_BACKWARD = +1
cdef unsigned FFTW_MEASURE = 0

cdef int _BUDGET = 0
cdef int _JCAV = 1
cdef int _JATOM = 2
cdef int _TOOLARGE = 3
cdef int _TARGET = 4

cdef double MAX_JUMP_PROB = 0.1


cdef class FusedCore:
    cdef readonly int n
    cdef object _arr          # (3, n) complex128, owns the buffer memory
    cdef double complex *buf
    cdef fftw_plan plan_f
    cdef fftw_plan plan_b
    cdef object _m6_obj, _ph_obj, _mask_obj
    cdef double complex *m6
    cdef double complex *ph
    cdef double *mask
    cdef bint has_mask
    cdef public double pend
    cdef public double absorbed
    cdef double _norms[3]
    cdef double dx, kappa2dt, gamma2dt

    def __cinit__(self, int n):
        self.n = n
        self._arr = np.zeros((3, n), dtype=np.complex128)
        cdef cnp.ndarray a = self._arr
        self.buf = <double complex *> cnp.PyArray_DATA(a)
        cdef int nn[1]
        nn[0] = n
        # plans scramble the buffer while measuring; buffer is still zeros here
        self.plan_f = fftw_plan_many_dft(1, nn, 3,
                                         <fftw_complex *> self.buf, NULL, 1, n,
                                         <fftw_complex *> self.buf, NULL, 1, n,
                                         FFTW_FORWARD, FFTW_MEASURE)
        self.plan_b = fftw_plan_many_dft(1, nn, 3,
                                         <fftw_complex *> self.buf, NULL, 1, n,
                                         <fftw_complex *> self.buf, NULL, 1, n,
                                         FFTW_BACKWARD, FFTW_MEASURE)
        self._arr[:] = 0.0
        self.pend = 1.0
        self.absorbed = 0.0
        self.has_mask = False

    def __dealloc__(self):
        if self.plan_f != NULL:
            fftw_destroy_plan(self.plan_f)
        if self.plan_b != NULL:
            fftw_destroy_plan(self.plan_b)

    @property
    def array(self):
        return self._arr

    @property
    def norms(self):
        return np.array([self._norms[0], self._norms[1], self._norms[2]])

    def configure(self, m6, ph_full, dx, kappa2dt, gamma2dt, mask=None):
        self._m6_obj = np.ascontiguousarray(m6, dtype=np.complex128)
        self._ph_obj = np.ascontiguousarray(ph_full, dtype=np.complex128)
        cdef cnp.ndarray mo = self._m6_obj
        cdef cnp.ndarray po = self._ph_obj
        self.m6 = <double complex *> cnp.PyArray_DATA(mo)
        self.ph = <double complex *> cnp.PyArray_DATA(po)
        self.dx = dx
        self.kappa2dt = kappa2dt
        self.gamma2dt = gamma2dt
        cdef cnp.ndarray ma
        if mask is None:
            self.has_mask = False
            self.mask = NULL
            self._mask_obj = None
        else:
            self._mask_obj = np.ascontiguousarray(mask, dtype=np.float64)
            ma = self._mask_obj
            self.mask = <double *> cnp.PyArray_DATA(ma)
            self.has_mask = True

    def load(self, data):
        self._arr[:] = data
        self.pend = 1.0
        self.absorbed = 0.0
        self.refresh_norms()

    def flush(self):
        if self.pend != 1.0:
            self._arr *= self.pend
            self.pend = 1.0

    def refresh_norms(self):
        self.flush()
        cdef int j, c
        cdef double acc
        cdef double complex v
        with nogil:
            for c in range(3):
                acc = 0.0
                for j in range(self.n):
                    v = self.buf[c * self.n + j]
                    acc += v.real * v.real + v.imag * v.imag
                self._norms[c] = acc * self.dx

    def fourier_phase(self, phase, scalar=1.0):
        """fft, multiply by phase*scalar per channel, unnormalized ifft."""
        self.flush()
        cdef cnp.ndarray po = np.ascontiguousarray(phase, dtype=np.complex128)
        cdef double complex *ph = <double complex *> cnp.PyArray_DATA(po)
        cdef double complex sc = scalar
        cdef int j
        cdef double complex f
        with nogil:
            fftw_execute(self.plan_f)
            for j in range(self.n):
                f = ph[j] * sc
                self.buf[j] *= f
                self.buf[self.n + j] *= f
                self.buf[2 * self.n + j] *= f
            fftw_execute(self.plan_b)

    cdef void _kv_step(self) nogil:
        cdef int j, n = self.n
        cdef double complex f
        cdef double complex s0, s1, s2, o0, o1, o2
        cdef double complex *m00 = self.m6
        cdef double complex *m01 = self.m6 + n
        cdef double complex *m02 = self.m6 + 2 * n
        cdef double complex *m11 = self.m6 + 3 * n
        cdef double complex *m12 = self.m6 + 4 * n
        cdef double complex *m22 = self.m6 + 5 * n
        cdef double n0 = 0.0, n1 = 0.0, n2 = 0.0
        cdef double b0 = 0.0, b1 = 0.0, b2 = 0.0
        cdef double w

        fftw_execute(self.plan_f)
        for j in range(n):
            f = self.ph[j] * self.pend
            self.buf[j] *= f
            self.buf[n + j] *= f
            self.buf[2 * n + j] *= f
        self.pend = 1.0
        fftw_execute(self.plan_b)

        if self.has_mask:
            for j in range(n):
                s0 = self.buf[j]
                s1 = self.buf[n + j]
                s2 = self.buf[2 * n + j]
                o0 = m00[j] * s0 + m01[j] * s1 + m02[j] * s2
                o1 = m01[j] * s0 + m11[j] * s1 + m12[j] * s2
                o2 = m02[j] * s0 + m12[j] * s1 + m22[j] * s2
                b0 += o0.real * o0.real + o0.imag * o0.imag
                b1 += o1.real * o1.real + o1.imag * o1.imag
                b2 += o2.real * o2.real + o2.imag * o2.imag
                w = self.mask[j]
                o0 *= w
                o1 *= w
                o2 *= w
                n0 += o0.real * o0.real + o0.imag * o0.imag
                n1 += o1.real * o1.real + o1.imag * o1.imag
                n2 += o2.real * o2.real + o2.imag * o2.imag
                self.buf[j] = o0
                self.buf[n + j] = o1
                self.buf[2 * n + j] = o2
            w = (b0 + b1 + b2)
            if w > 0.0:
                self.absorbed += (w - (n0 + n1 + n2)) / w * (1.0 - self.absorbed)
        else:
            for j in range(n):
                s0 = self.buf[j]
                s1 = self.buf[n + j]
                s2 = self.buf[2 * n + j]
                o0 = m00[j] * s0 + m01[j] * s1 + m02[j] * s2
                o1 = m01[j] * s0 + m11[j] * s1 + m12[j] * s2
                o2 = m02[j] * s0 + m12[j] * s1 + m22[j] * s2
                n0 += o0.real * o0.real + o0.imag * o0.imag
                n1 += o1.real * o1.real + o1.imag * o1.imag
                n2 += o2.real * o2.real + o2.imag * o2.imag
                self.buf[j] = o0
                self.buf[n + j] = o1
                self.buf[2 * n + j] = o2
        self._norms[0] = n0 * self.dx
        self._norms[1] = n1 * self.dx
        self._norms[2] = n2 * self.dx

    def advance_traj(self, int nsteps, double[::1] uniforms):
        cdef int i
        cdef int status = _BUDGET
        cdef int count = nsteps
        cdef double p_cav, p_atom, p, total, r
        with nogil:
            for i in range(nsteps):
                p_cav = self.kappa2dt * self._norms[2]
                p_atom = self.gamma2dt * self._norms[1]
                p = p_cav + p_atom
                if p >= MAX_JUMP_PROB:
                    status = _TOOLARGE
                    count = i
                    break
                r = uniforms[i]
                if r < p:
                    status = _JCAV if r < p_cav else _JATOM
                    count = i + 1
                    break
                self._kv_step()
                total = self._norms[0] + self._norms[1] + self._norms[2]
                self.pend = 1.0 / total ** 0.5
                self._norms[0] /= total
                self._norms[1] /= total
                self._norms[2] /= total
        return status, count

    def advance_decay(self, int nsteps, double[::1] totals, double target):
        cdef int i
        cdef int status = _BUDGET
        cdef int count = nsteps
        cdef double tot
        with nogil:
            for i in range(nsteps):
                self._kv_step()
                tot = self._norms[0] + self._norms[1] + self._norms[2]
                totals[i] = tot
                if tot <= target:
                    status = _TARGET
                    count = i + 1
                    break
        return status, count

    def advance_renorm(self, int nsteps):
        cdef int i
        cdef double total
        with nogil:
            for i in range(nsteps):
                self._kv_step()
                total = self._norms[0] + self._norms[1] + self._norms[2]
                self.pend = 1.0 / total ** 0.5
                self._norms[0] /= total
                self._norms[1] /= total
                self._norms[2] /= total
        return _BUDGET, nsteps
