# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled online-SGD kernel for the two-layer ReLU network."""

import numpy as np

from libc.math cimport isfinite


cdef Py_ssize_t _run(double[:, ::1] V, double[::1] u, double[::1] a,
                     const double[:, ::1] X, const double[::1] Y, double eta,
                     Py_ssize_t start, Py_ssize_t stop, double[::1] pre) noexcept nogil:
    cdef Py_ssize_t h = V.shape[0], d = V.shape[1]
    cdef Py_ssize_t t, j, i
    cdef double f, g, gp, s, step
    for t in range(start, stop):
        f = 0.0
        for j in range(h):
            s = u[j]
            for i in range(d):
                s = s + V[j, i] * X[t, i]
            pre[j] = s
            if s > 0.0:
                f = f + a[j] * s
        g = 2.0 * (f - Y[t])
        if not isfinite(g):
            return t
        for j in range(h):
            if pre[j] > 0.0:
                gp = g * a[j]
                a[j] = a[j] - eta * g * pre[j]
                u[j] = u[j] - eta * gp
                step = eta * gp
                for i in range(d):
                    V[j, i] = V[j, i] - step * X[t, i]
    return -1


def sgd_steps(double[:, ::1] V, double[::1] u, double[::1] a,
              const double[:, ::1] X, const double[::1] Y, double eta,
              Py_ssize_t start, Py_ssize_t stop):
    """Apply one SGD step per row ``X[start:stop]`` in place.

    Loss is ``(f(x) - y)^2`` with ``f(x) = a . relu(V x + u)``. Returns -1, or
    the row index whose loss was not finite (parameters are left as they were
    before that row).
    """
    cdef double[::1] pre = np.empty(V.shape[0])
    cdef Py_ssize_t bad
    with nogil:
        bad = _run(V, u, a, X, Y, eta, start, stop, pre)
    return bad
