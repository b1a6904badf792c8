# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the sequential hot loops (see ``_pykernels``)."""

import numpy as np
from libc.math cimport hypot, sqrt, fabs

cdef double TRACE_DRIFT_TOL = 1e-12


cdef inline double cabs_(double complex z) nogil:
    return hypot(z.real, z.imag)


cdef inline double complex conj_(double complex z) nogil:
    return z.real - 1j * z.imag


cdef inline void matvec(double complex[:, ::1] m, double complex *x,
                        double complex *y) nogil:
    cdef int i, k
    cdef double complex acc
    for i in range(4):
        acc = 0
        for k in range(4):
            acc = acc + m[i, k] * x[k]
        y[i] = acc


def rk4_propagate(liou, rho0, double dt):
    cdef double complex[:, :, ::1] L = np.ascontiguousarray(liou, dtype=complex)
    cdef Py_ssize_t nsteps = (L.shape[0] - 1) // 2
    out_arr = np.empty((nsteps + 1, 4), dtype=complex)
    cdef double complex[:, ::1] out = out_arr
    cdef double complex r[4]
    cdef double complex tmp[4]
    cdef double complex k1[4]
    cdef double complex k2[4]
    cdef double complex k3[4]
    cdef double complex k4[4]
    cdef double complex off
    cdef double h = 0.5 * dt
    cdef double tr
    cdef Py_ssize_t j
    cdef int i
    r0 = np.asarray(rho0, dtype=complex)
    for i in range(4):
        r[i] = r0[i]
        out[0, i] = r[i]
    with nogil:
        for j in range(nsteps):
            matvec(L[2 * j], r, k1)
            for i in range(4):
                tmp[i] = r[i] + h * k1[i]
            matvec(L[2 * j + 1], tmp, k2)
            for i in range(4):
                tmp[i] = r[i] + h * k2[i]
            matvec(L[2 * j + 1], tmp, k3)
            for i in range(4):
                tmp[i] = r[i] + dt * k3[i]
            matvec(L[2 * j + 2], tmp, k4)
            for i in range(4):
                r[i] = r[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            off = 0.5 * (r[1] + conj_(r[2]))
            r[0] = r[0].real
            r[3] = r[3].real
            r[1] = off
            r[2] = conj_(off)
            tr = r[0].real + r[3].real
            if fabs(tr - 1.0) > TRACE_DRIFT_TOL:
                for i in range(4):
                    r[i] = r[i] / tr
            for i in range(4):
                out[j + 1, i] = r[i]
    return out_arr


cdef inline void fix_phase(double complex *v0, double complex *v1) nogil:
    cdef double complex lead
    cdef double complex phase
    if cabs_(v0[0]) >= cabs_(v1[0]):
        lead = v0[0]
    else:
        lead = v1[0]
    phase = lead / cabs_(lead)
    v0[0] = v0[0] / phase
    v1[0] = v1[0] / phase


cdef inline void eig2(double complex[:, ::1] m, double *vals,
                      double complex *vec) nogil:
    # vec is row-major 2x2, columns are eigenvectors
    cdef double a = m[0, 0].real
    cdef double d = m[1, 1].real
    cdef double complex c = 0.5 * (m[0, 1] + conj_(m[1, 0]))
    cdef double half_diff = 0.5 * (a - d)
    cdef double r = hypot(half_diff, cabs_(c))
    cdef double mean = 0.5 * (a + d)
    cdef double complex v0, v1, w0, w1
    cdef double norm
    vals[0] = mean + r
    vals[1] = mean - r
    if half_diff >= 0:
        v0 = r + half_diff
        v1 = conj_(c)
    else:
        v0 = c
        v1 = r - half_diff
    norm = sqrt(cabs_(v0) ** 2 + cabs_(v1) ** 2)
    if norm == 0:
        v0 = 1.0
        v1 = 0.0
    else:
        v0 = v0 / norm
        v1 = v1 / norm
    w0 = -conj_(v1)
    w1 = conj_(v0)
    fix_phase(&v0, &v1)
    fix_phase(&w0, &w1)
    vec[0] = v0
    vec[1] = w0
    vec[2] = v1
    vec[3] = w1


def track_spectrum(states, double degenerate_tol):
    cdef double complex[:, :, ::1] S = np.ascontiguousarray(states, dtype=complex)
    cdef Py_ssize_t n = S.shape[0]
    values_arr = np.empty((n, 2), dtype=float)
    vectors_arr = np.empty((n, 2, 2), dtype=complex)
    cdef double[:, ::1] vals = values_arr
    cdef double complex[:, :, ::1] vecs = vectors_arr
    cdef double lv[2]
    cdef double complex lw[4]
    cdef double o00, o01, o10, o11, tmpd
    cdef double complex tmpc
    cdef Py_ssize_t i
    cdef int k
    cdef Py_ssize_t lost = -1
    if n == 0:
        return values_arr, vectors_arr, -1
    with nogil:
        for i in range(n):
            eig2(S[i], lv, lw)
            vals[i, 0] = lv[0]
            vals[i, 1] = lv[1]
            if i > 0 and lv[0] - lv[1] <= degenerate_tol:
                for k in range(4):
                    vecs[i, k // 2, k % 2] = vecs[i - 1, k // 2, k % 2]
                continue
            if i > 0:
                # overlap <prev_a|cur_b>
                o00 = cabs_(conj_(vecs[i - 1, 0, 0]) * lw[0] + conj_(vecs[i - 1, 1, 0]) * lw[2]) ** 2
                o01 = cabs_(conj_(vecs[i - 1, 0, 0]) * lw[1] + conj_(vecs[i - 1, 1, 0]) * lw[3]) ** 2
                o10 = cabs_(conj_(vecs[i - 1, 0, 1]) * lw[0] + conj_(vecs[i - 1, 1, 1]) * lw[2]) ** 2
                o11 = cabs_(conj_(vecs[i - 1, 0, 1]) * lw[1] + conj_(vecs[i - 1, 1, 1]) * lw[3]) ** 2
                if o01 + o10 > o00 + o11:
                    tmpd = vals[i, 0]
                    vals[i, 0] = vals[i, 1]
                    vals[i, 1] = tmpd
                    tmpc = lw[0]
                    lw[0] = lw[1]
                    lw[1] = tmpc
                    tmpc = lw[2]
                    lw[2] = lw[3]
                    lw[3] = tmpc
                    tmpd = o00
                    o00 = o01
                    o01 = tmpd
                    tmpd = o11
                    o11 = o10
                    o10 = tmpd
            for k in range(4):
                vecs[i, k // 2, k % 2] = lw[k]
            if i > 0 and (o00 <= 0.5 or o11 <= 0.5):
                lost = i
                break
    return values_arr, vectors_arr, lost
