# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: simplex pivoting and the exact-selection DP."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

DEF OPTIMAL = 0
DEF UNBOUNDED = 1
DEF ITER_LIMIT = 2


cdef void _pivot(double[:, ::1] tab, Py_ssize_t r, Py_ssize_t c, double[::1] prow,
                 Py_ssize_t[::1] nz) noexcept nogil:
    cdef Py_ssize_t nrow = tab.shape[0], ncol = tab.shape[1]
    cdef Py_ssize_t i, k, q, nnz = 0
    cdef double inv = 1.0 / tab[r, c], f
    for k in range(ncol):
        tab[r, k] *= inv
        if tab[r, k] != 0.0 and k != c:
            prow[nnz] = tab[r, k]
            nz[nnz] = k
            nnz += 1
    tab[r, c] = 1.0
    for i in range(nrow):
        if i == r:
            continue
        f = tab[i, c]
        if f == 0.0:
            continue
        for q in range(nnz):
            tab[i, nz[q]] -= f * prow[q]
        tab[i, c] = 0.0


def pivot(double[:, ::1] tab, Py_ssize_t r, Py_ssize_t c):
    cdef double[::1] prow = np.empty(tab.shape[1])
    cdef Py_ssize_t[::1] nz = np.empty(tab.shape[1], dtype=np.intp)
    _pivot(tab, r, c, prow, nz)


def simplex_loop(double[:, ::1] tab, cnp.int64_t[::1] basis, Py_ssize_t n_enter,
                 double tol, Py_ssize_t max_iter, int rule=0):
    """Pivot until optimal; the last row holds reduced costs (enter if < -tol).

    ``rule`` 0 is Bland's rule throughout. ``rule`` 1 prices by the most
    negative reduced cost and drops to Bland's rule while pivots are
    degenerate, which keeps the anti-cycling guarantee. Columns ``>= n_enter``
    never enter. Returns ``(status, iterations)``.
    """
    cdef Py_ssize_t m = tab.shape[0] - 1, rhs = tab.shape[1] - 1
    cdef Py_ssize_t it = 0, j, i, enter, leave, stall = 0
    cdef int status = ITER_LIMIT
    cdef double ratio, best, a, most
    cdef double[::1] prow = np.empty(tab.shape[1])
    cdef Py_ssize_t[::1] nz = np.empty(tab.shape[1], dtype=np.intp)
    with nogil:
        while it < max_iter:
            enter = -1
            if rule == 1 and stall < 8:
                most = -tol
                for j in range(n_enter):
                    if tab[m, j] < most:
                        most = tab[m, j]
                        enter = j
            else:
                for j in range(n_enter):
                    if tab[m, j] < -tol:
                        enter = j
                        break
            if enter < 0:
                status = OPTIMAL
                break
            leave = -1
            best = 0.0
            for i in range(m):
                a = tab[i, enter]
                if a > tol:
                    ratio = tab[i, rhs] / a
                    if leave < 0 or ratio < best - 1e-12 or (fabs(ratio - best) <= 1e-12 and basis[i] < basis[leave]):
                        leave = i
                        best = ratio
            if leave < 0:
                status = UNBOUNDED
                break
            if best <= 1e-12:
                stall += 1
            else:
                stall = 0
            _pivot(tab, leave, enter, prow, nz)
            basis[leave] = enter
            it += 1
    return status, it


def dp_forward(const signed char[:, ::1] A, int B, int R):
    """Best score table ``val[j, m, b, d-1]``; -1 marks unreachable states.

    ``b`` counts switches used and ``d`` is the dwell since the last switch,
    saturating at ``R``. A switch is allowed only from a saturated state.
    """
    cdef Py_ssize_t M = A.shape[0], T = A.shape[1]
    cdef Py_ssize_t j, m, b, d, m1
    cdef int v, best1, best2, src, gain
    out = np.full((T, M, B + 1, R), -1, dtype=np.int32)
    cdef int[:, :, :, ::1] val = out
    with nogil:
        for m in range(M):
            val[0, m, 0, 0] = A[m, 0]
        for j in range(T - 1):
            for m in range(M):
                gain = A[m, j + 1]
                for b in range(B + 1):
                    for d in range(R):
                        v = val[j, m, b, d]
                        if v < 0:
                            continue
                        if d + 1 < R:
                            if v + gain > val[j + 1, m, b, d + 1]:
                                val[j + 1, m, b, d + 1] = v + gain
                        else:
                            if v + gain > val[j + 1, m, b, R - 1]:
                                val[j + 1, m, b, R - 1] = v + gain
            for b in range(B):
                best1 = -1
                best2 = -1
                m1 = -1
                for m in range(M):
                    v = val[j, m, b, R - 1]
                    if v > best1:
                        best2 = best1
                        best1 = v
                        m1 = m
                    elif v > best2:
                        best2 = v
                for m in range(M):
                    src = best2 if m == m1 else best1
                    if src < 0:
                        continue
                    v = src + A[m, j + 1]
                    if v > val[j + 1, m, b + 1, 0]:
                        val[j + 1, m, b + 1, 0] = v
    return out
