# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel routines. Same contract as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, M_PI

cnp.import_array()

BACKEND = "cython"


def closed(q, qp, double gamma, double l, double mu, double hbar):
    cdef const double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef const double[::1] pv = np.ascontiguousarray(qp, dtype=np.float64)
    cdef Py_ssize_t i, m = qv.shape[0]
    out = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef double c = -mu / (4.0 * hbar * sin(gamma))
    cdef double cg = cos(gamma), sg = sin(gamma), s, d
    with nogil:
        for i in range(m):
            s = c * (qv[i] + pv[i])
            d = qv[i] - pv[i]
            if d > 0:
                ov[i] = s * cg + 1j * (s * sg)
            elif d < 0:
                ov[i] = s * cg - 1j * (s * sg)
            else:
                ov[i] = s * cg
    return out


def periodic(q, qp, double l, double mu, double hbar):
    cdef const double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef const double[::1] pv = np.ascontiguousarray(qp, dtype=np.float64)
    cdef Py_ssize_t i, m = qv.shape[0]
    out = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef double c = mu / (4.0 * hbar), d, sg
    with nogil:
        for i in range(m):
            d = qv[i] - pv[i]
            sg = 1.0 if d > 0 else (-1.0 if d < 0 else 0.0)
            ov[i] = 1j * (-c * (qv[i] + pv[i]) * sg + (c / l) * (qv[i] * qv[i] - pv[i] * pv[i]))
    return out


def zero_mode(q, qp, double gamma, double l, double mu, double hbar):
    cdef const double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef const double[::1] pv = np.ascontiguousarray(qp, dtype=np.float64)
    cdef Py_ssize_t i, m = qv.shape[0]
    out = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef double c = -mu / (4.0 * hbar * gamma), s, a
    with nogil:
        for i in range(m):
            s = c * (qv[i] + pv[i])
            a = gamma * (qv[i] - pv[i]) / l
            ov[i] = s * cos(a) + 1j * (s * sin(a))
    return out


def series_sums(q, qp, double gamma, double l, double mu, double hbar, checkpoints):
    cdef const double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef const double[::1] pv = np.ascontiguousarray(qp, dtype=np.float64)
    cdef const long long[::1] cp = np.ascontiguousarray(checkpoints, dtype=np.int64)
    cdef Py_ssize_t i, j, m = qv.shape[0], nc = cp.shape[0]
    cdef long long n, done
    out = np.empty((m, nc), dtype=np.complex128)
    cdef double complex[:, ::1] ov = out
    cdef double x, kp, km, pref, re, im, pre, pim
    with nogil:
        for i in range(m):
            x = (qv[i] - pv[i]) / l
            pref = -mu / (4.0 * hbar) * (qv[i] + pv[i])
            re = cos(gamma * x) / gamma
            im = sin(gamma * x) / gamma
            done = 0
            for j in range(nc):
                n = done + 1
                while n <= cp[j]:
                    kp = gamma + n * M_PI
                    km = gamma - n * M_PI
                    pre = cos(kp * x) / kp + cos(km * x) / km
                    pim = sin(kp * x) / kp + sin(km * x) / km
                    re = re + pre
                    im = im + pim
                    n += 1
                if cp[j] > done:
                    done = cp[j]
                ov[i, j] = pref * re + 1j * (pref * im)
    return out
