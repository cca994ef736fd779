# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; same contracts and arithmetic order as ``_pykernels``."""
import numpy as np
from libc.math cimport INFINITY, fabs


cdef inline double _cost(const double[::1] diag, const double[:, ::1] gram,
                         Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    cdef double n = <double>(b - a)
    return (diag[b] - diag[a]) - (((gram[b, b] - gram[a, b]) - gram[b, a]) + gram[a, a]) / n


def segment_cost(diag, gram, Py_ssize_t a, Py_ssize_t b):
    cdef const double[::1] d = np.ascontiguousarray(diag, dtype=np.float64)
    cdef const double[:, ::1] g = np.ascontiguousarray(gram, dtype=np.float64)
    return _cost(d, g, a, b)


def pelt(diag_in, gram_in, double pen, Py_ssize_t min_size):
    cdef const double[::1] diag = np.ascontiguousarray(diag_in, dtype=np.float64)
    cdef const double[:, ::1] gram = np.ascontiguousarray(gram_in, dtype=np.float64)
    cdef Py_ssize_t n = diag.shape[0] - 1
    if n < min_size:
        return [], 0.0
    f_arr = np.full(n + 1, np.inf)
    prev_arr = np.zeros(n + 1, dtype=np.intp)
    cand_arr = np.zeros(n + 1, dtype=np.intp)
    pruned_arr = np.zeros(n + 1, dtype=np.intp)
    cdef double[::1] f = f_arr
    cdef Py_ssize_t[::1] prev = prev_arr
    cdef Py_ssize_t[::1] cand = cand_arr
    cdef Py_ssize_t[::1] pruned_at = pruned_arr
    cdef Py_ssize_t n_cand = 0, s, t, i, w, t_new, best_t
    cdef double best, val, base, tol
    f[0] = -pen
    with nogil:
        for s in range(min_size, n + 1):
            t_new = s - min_size
            if t_new == 0 or t_new >= min_size:
                cand[n_cand] = t_new
                pruned_at[n_cand] = 0
                n_cand += 1
            w = 0
            for i in range(n_cand):
                if pruned_at[i] == 0 or s < pruned_at[i] + min_size:
                    cand[w] = cand[i]
                    pruned_at[w] = pruned_at[i]
                    w += 1
            n_cand = w
            best = INFINITY
            best_t = -1
            for i in range(n_cand):
                t = cand[i]
                val = (f[t] + _cost(diag, gram, t, s)) + pen
                if val < best:
                    best = val
                    best_t = t
            f[s] = best
            prev[s] = best_t
            tol = 1e-9 * (1.0 + fabs(best))
            for i in range(n_cand):
                if pruned_at[i] == 0:
                    t = cand[i]
                    base = f[t] + _cost(diag, gram, t, s)
                    if base > best + tol:
                        pruned_at[i] = s
    bkps = []
    s = n
    while s > 0:
        s = prev[s]
        if s > 0:
            bkps.append(s)
    bkps.reverse()
    return bkps, float(f[n])


def best_split(diag_in, gram_in, Py_ssize_t a, Py_ssize_t b, Py_ssize_t min_size):
    cdef const double[::1] diag = np.ascontiguousarray(diag_in, dtype=np.float64)
    cdef const double[:, ::1] gram = np.ascontiguousarray(gram_in, dtype=np.float64)
    cdef Py_ssize_t k, best_k = -1
    cdef double whole, gain, best = -INFINITY
    if b - a < 2 * min_size:
        return -INFINITY, -1
    whole = _cost(diag, gram, a, b)
    with nogil:
        for k in range(a + min_size, b - min_size + 1):
            gain = (whole - _cost(diag, gram, a, k)) - _cost(diag, gram, k, b)
            if best_k < 0 or gain > best:
                best = gain
                best_k = k
    return best, best_k


def energy_best(P_in, Py_ssize_t a, Py_ssize_t b, Py_ssize_t min_size):
    cdef const double[:, ::1] P = np.ascontiguousarray(P_in, dtype=np.float64)
    cdef Py_ssize_t tau, kap, best_tau = -1, best_kap = -1
    cdef double m, q, wx, wy, bxy, e, stat, best = -INFINITY
    with nogil:
        for tau in range(a + min_size, b - min_size + 1):
            m = <double>(tau - a)
            wx = ((P[tau, tau] - P[a, tau]) - P[tau, a]) + P[a, a]
            for kap in range(tau + min_size, b + 1):
                q = <double>(kap - tau)
                wy = ((P[kap, kap] - P[tau, kap]) - P[kap, tau]) + P[tau, tau]
                bxy = ((P[tau, kap] - P[a, kap]) - P[tau, tau]) + P[a, tau]
                e = (2.0 * bxy / (m * q) - wx / (m * (m - 1.0))) - wy / (q * (q - 1.0))
                stat = (m * q / (m + q)) * e
                if best_tau < 0 or stat > best:
                    best = stat
                    best_tau = tau
                    best_kap = kap
    return best, best_tau, best_kap
