# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: Markov-chain rank removal and Kendall pair counts.

Mirrors ``_kernels_py`` exactly; see there for the semantics.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

BACKEND = "cython"


def markov_removal_order(weights, double damping, double tol, int max_iters):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] W = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t n = W.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] removal = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] converged = np.ones(n, dtype=np.uint8)

    # compact working copy lives in the top-left m x m block of Wc;
    # orig maps compact index -> original state index
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Wc = W.copy()
    cdef cnp.ndarray[cnp.int64_t, ndim=1] orig = np.arange(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] s = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y2 = np.empty(n, dtype=np.float64)

    cdef double[:, ::1] wv = Wc
    cdef double[::1] sv = s
    cdef double[::1] yv = y
    cdef double[::1] y2v = y2
    cdef cnp.int64_t[::1] ov = orig

    cdef Py_ssize_t m = n
    cdef Py_ssize_t step, i, j, it, best, r, c, wr, wc
    cdef double row_sum, zi, sum_y, delta, base, omd, ymax

    for step in range(n):
        if m == 1:
            removal[step] = ov[0]
            break

        for i in range(m):
            row_sum = 0.0
            for j in range(m):
                row_sum += wv[i, j]
            sv[i] = row_sum

        for i in range(m):
            yv[i] = 1.0 / m

        omd = 1.0 - damping
        converged[step] = 0
        for it in range(max_iters):
            sum_y = 0.0
            for i in range(m):
                sum_y += yv[i]
            base = damping * (sum_y / m)
            for j in range(m):
                y2v[j] = base
            for i in range(m):
                if sv[i] > 0.0:
                    zi = omd * (yv[i] / sv[i])
                    for j in range(m):
                        y2v[j] += wv[i, j] * zi
                else:
                    y2v[i] += omd * yv[i]
            delta = 0.0
            for j in range(m):
                delta += fabs(y2v[j] - yv[j])
                yv[j] = y2v[j]
            if delta < tol:
                converged[step] = 1
                break

        # argmax with ties toward the larger compact index
        best = 0
        ymax = yv[0]
        for j in range(1, m):
            if yv[j] >= ymax:
                ymax = yv[j]
                best = j
        removal[step] = ov[best]

        # drop row/col `best`; forward repack never overwrites unread cells
        wr = 0
        for r in range(m):
            if r == best:
                continue
            wc = 0
            for c in range(m):
                if c == best:
                    continue
                wv[wr, wc] = wv[r, c]
                wc += 1
            wr += 1
        for r in range(best, m - 1):
            ov[r] = ov[r + 1]
        m -= 1

    return removal, np.asarray(converged, dtype=bool)


def kendall_pairs(ranks):
    cdef cnp.ndarray[cnp.int64_t, ndim=1] r = np.ascontiguousarray(ranks, dtype=np.int64)
    cdef Py_ssize_t mlen = r.shape[0]
    cdef cnp.int64_t[::1] rv = r
    cdef Py_ssize_t t, u
    cdef long long count = 0
    for t in range(mlen):
        for u in range(t + 1, mlen):
            if rv[t] > rv[u]:
                count += 1
    return int(count)
