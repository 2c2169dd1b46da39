# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Kupradze kernels; mirrors ``_kernels_py`` one for one."""

import os

import numpy as np

cimport cython
from cython.parallel cimport parallel, prange
from libc.stdlib cimport free, malloc
from libc.math cimport cos, sin, sqrt

cdef double FOUR_PI = 12.566370614359172


cdef int _threads():
    raw = os.environ.get("ELASTOSCATTER_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return n if n > 0 else 1


cdef inline void _profiles(double r, double kp, double ks, double w2, double mu,
                           double complex* out) noexcept nogil:
    # out = psi1, psi2, dpsi1, dpsi2
    cdef double ir = 1.0 / r
    cdef double ir2 = ir * ir
    cdef double ir3 = ir2 * ir
    cdef double ir4 = ir3 * ir
    cdef double complex iks = 1j * ks
    cdef double complex ikp = 1j * kp
    cdef double complex gs = (cos(ks * r) + 1j * sin(ks * r)) / FOUR_PI
    cdef double complex gp = (cos(kp * r) + 1j * sin(kp * r)) / FOUR_PI
    cdef double complex s0 = gs * ir
    cdef double complex s1 = gs * (iks * ir - ir2)
    cdef double complex s2 = gs * (iks * iks * ir - 2 * iks * ir2 + 2 * ir3)
    cdef double complex s3 = gs * (iks * iks * iks * ir - 3 * iks * iks * ir2 + 6 * iks * ir3 - 6 * ir4)
    cdef double complex p1 = gp * (ikp * ir - ir2)
    cdef double complex p2 = gp * (ikp * ikp * ir - 2 * ikp * ir2 + 2 * ir3)
    cdef double complex p3 = gp * (ikp * ikp * ikp * ir - 3 * ikp * ikp * ir2 + 6 * ikp * ir3 - 6 * ir4)
    cdef double complex f1 = s1 - p1
    cdef double complex f2 = s2 - p2
    cdef double complex f3 = s3 - p3
    out[0] = s0 / mu + f1 * ir / w2
    out[1] = (f2 - f1 * ir) / w2
    out[2] = s1 / mu + (f2 * ir - f1 * ir2) / w2
    out[3] = (f3 - f2 * ir + f1 * ir2) / w2


cdef inline void _kup(const double* x, const double* y, double kp, double ks, double w2, double mu,
                      double complex* blk) noexcept nogil:
    cdef double d[3]
    cdef double complex pr[4]
    cdef int i, j
    cdef double r
    for i in range(3):
        d[i] = x[i] - y[i]
    r = sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
    for i in range(3):
        d[i] /= r
    _profiles(r, kp, ks, w2, mu, pr)
    for i in range(3):
        for j in range(3):
            blk[3 * i + j] = pr[1] * d[i] * d[j]
        blk[4 * i] += pr[0]


cdef inline void _trac(const double* x, const double* nu, const double* y, double kp, double ks,
                       double w2, double mu, double lam, double complex* blk) noexcept nogil:
    cdef double d[3]
    cdef double complex pr[4]
    cdef int i, j
    cdef double r, rn
    cdef double complex q, dv, a
    for i in range(3):
        d[i] = x[i] - y[i]
    r = sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
    for i in range(3):
        d[i] /= r
    _profiles(r, kp, ks, w2, mu, pr)
    q = pr[1] / r
    rn = d[0] * nu[0] + d[1] * nu[1] + d[2] * nu[2]
    dv = pr[2] + pr[3] + 2.0 * q
    for i in range(3):
        for j in range(3):
            a = (2.0 * pr[3] * rn - 4.0 * q * rn) * d[i] * d[j]
            a = a + q * (2.0 * nu[i] * d[j] + d[i] * nu[j]) + pr[2] * d[i] * nu[j]
            if i == j:
                a = a + pr[2] * rn + q * rn
            blk[3 * i + j] = lam * nu[i] * dv * d[j] + mu * a


def kupradze_block(x, y, double kp, double ks, double omega, double mu):
    cdef const double[:, ::1] xv = np.ascontiguousarray(np.atleast_2d(x), dtype=float)
    cdef const double[:, ::1] yv = np.ascontiguousarray(np.atleast_2d(y), dtype=float)
    cdef Py_ssize_t n = xv.shape[0], m = yv.shape[0], a, b
    cdef int i, j
    out = np.empty((n, 3, m, 3), dtype=complex)
    cdef double complex[:, :, :, ::1] ov = out
    cdef double complex* blk
    cdef double w2 = omega * omega
    cdef int nt = _threads()
    with nogil, parallel(num_threads=nt):
        blk = <double complex*> malloc(9 * sizeof(double complex))
        for a in prange(n, schedule="static"):
            for b in range(m):
                _kup(&xv[a, 0], &yv[b, 0], kp, ks, w2, mu, blk)
                for i in range(3):
                    for j in range(3):
                        ov[a, i, b, j] = blk[3 * i + j]
        free(blk)
    return out


def traction_block(x, normals, y, double kp, double ks, double omega, double mu, double lam):
    cdef const double[:, ::1] xv = np.ascontiguousarray(np.atleast_2d(x), dtype=float)
    cdef const double[:, ::1] nv = np.ascontiguousarray(np.atleast_2d(normals), dtype=float)
    cdef const double[:, ::1] yv = np.ascontiguousarray(np.atleast_2d(y), dtype=float)
    cdef Py_ssize_t n = xv.shape[0], m = yv.shape[0], a, b
    cdef int i, j
    out = np.empty((n, 3, m, 3), dtype=complex)
    cdef double complex[:, :, :, ::1] ov = out
    cdef double complex* blk
    cdef double w2 = omega * omega
    cdef int nt = _threads()
    with nogil, parallel(num_threads=nt):
        blk = <double complex*> malloc(9 * sizeof(double complex))
        for a in prange(n, schedule="static"):
            for b in range(m):
                _trac(&xv[a, 0], &nv[a, 0], &yv[b, 0], kp, ks, w2, mu, lam, blk)
                for i in range(3):
                    for j in range(3):
                        ov[a, i, b, j] = blk[3 * i + j]
        free(blk)
    return out


def kupradze_apply(x, y, coeffs, double kp, double ks, double omega, double mu):
    cdef const double[:, ::1] xv = np.ascontiguousarray(np.atleast_2d(x), dtype=float)
    cdef const double[:, ::1] yv = np.ascontiguousarray(np.atleast_2d(y), dtype=float)
    cdef const double complex[:, ::1] cv = np.ascontiguousarray(np.atleast_2d(coeffs), dtype=complex)
    cdef Py_ssize_t n = xv.shape[0], m = yv.shape[0], a, b
    cdef int i, j
    out = np.zeros((n, 3), dtype=complex)
    cdef double complex[:, ::1] ov = out
    cdef double complex* blk
    cdef double w2 = omega * omega
    cdef int nt = _threads()
    with nogil, parallel(num_threads=nt):
        blk = <double complex*> malloc(9 * sizeof(double complex))
        for a in prange(n, schedule="static"):
            for b in range(m):
                _kup(&xv[a, 0], &yv[b, 0], kp, ks, w2, mu, blk)
                for i in range(3):
                    for j in range(3):
                        ov[a, i] += blk[3 * i + j] * cv[b, j]
        free(blk)
    return out


def traction_apply(x, normals, y, coeffs, double kp, double ks, double omega, double mu, double lam):
    cdef const double[:, ::1] xv = np.ascontiguousarray(np.atleast_2d(x), dtype=float)
    cdef const double[:, ::1] nv = np.ascontiguousarray(np.atleast_2d(normals), dtype=float)
    cdef const double[:, ::1] yv = np.ascontiguousarray(np.atleast_2d(y), dtype=float)
    cdef const double complex[:, ::1] cv = np.ascontiguousarray(np.atleast_2d(coeffs), dtype=complex)
    cdef Py_ssize_t n = xv.shape[0], m = yv.shape[0], a, b
    cdef int i, j
    out = np.zeros((n, 3), dtype=complex)
    cdef double complex[:, ::1] ov = out
    cdef double complex* blk
    cdef double w2 = omega * omega
    cdef int nt = _threads()
    with nogil, parallel(num_threads=nt):
        blk = <double complex*> malloc(9 * sizeof(double complex))
        for a in prange(n, schedule="static"):
            for b in range(m):
                _trac(&xv[a, 0], &nv[a, 0], &yv[b, 0], kp, ks, w2, mu, lam, blk)
                for i in range(3):
                    for j in range(3):
                        ov[a, i] += blk[3 * i + j] * cv[b, j]
        free(blk)
    return out
