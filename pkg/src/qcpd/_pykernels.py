"""Pure-Python/numpy kernels. Reference behaviour for ``_ckernels``.

Segment conventions: 0-based half-open ``[a, b)``. Kernel-segment costs are
read from a diagonal prefix ``diag`` (length N+1) and a 2-D prefix ``gram``
of the Gram matrix, ``gram[i, j] = sum(K[:i, :j])``.
"""
from __future__ import annotations

import math

import numpy as np


def segment_cost(diag, gram, a: int, b: int) -> float:
    n = b - a
    return (diag[b] - diag[a]) - (((gram[b, b] - gram[a, b]) - gram[b, a]) + gram[a, a]) / n


def _costs_to(diag, gram, starts: np.ndarray, b: int) -> np.ndarray:
    n = b - starts
    return (diag[b] - diag[starts]) - (((gram[b, b] - gram[starts, b]) - gram[b, starts])
                                       + gram[starts, starts]) / n


def pelt(diag, gram, pen: float, min_size: int):
    """Penalized optimal partition with pruning.

    Returns ``(breakpoints, total_cost)`` where breakpoints are the 0-based
    starts of every segment after the first. A candidate pruned at step s
    is only dropped once ``s + min_size`` is reached, which keeps the
    search exact under a minimum segment length.
    """
    n = diag.shape[0] - 1
    if n < min_size:
        return [], 0.0
    f = np.full(n + 1, np.inf)
    f[0] = -pen
    prev = np.zeros(n + 1, dtype=np.int64)
    cand = np.zeros(0, dtype=np.int64)
    pruned_at = np.zeros(0, dtype=np.int64)  # 0 = not pruned
    for s in range(min_size, n + 1):
        t_new = s - min_size
        if t_new == 0 or t_new >= min_size:
            cand = np.append(cand, t_new)
            pruned_at = np.append(pruned_at, 0)
        keep = (pruned_at == 0) | (s < pruned_at + min_size)
        cand, pruned_at = cand[keep], pruned_at[keep]
        base = f[cand] + _costs_to(diag, gram, cand, s)
        vals = base + pen
        k = int(np.argmin(vals))
        f[s] = vals[k]
        prev[s] = cand[k]
        tol = 1e-9 * (1.0 + abs(f[s]))
        newly = (pruned_at == 0) & (base > f[s] + tol)
        pruned_at[newly] = s
    bkps = []
    s = n
    while s > 0:
        s = int(prev[s])
        if s > 0:
            bkps.append(s)
    bkps.reverse()
    return bkps, float(f[n])


def best_split(diag, gram, a: int, b: int, min_size: int):
    """Largest cost reduction from one split of ``[a, b)``; ``(gain, k)``.

    ``k == -1`` when no split leaves both parts at least ``min_size`` long.
    """
    ks = np.arange(a + min_size, b - min_size + 1)
    if ks.size == 0:
        return -math.inf, -1
    whole = segment_cost(diag, gram, a, b)
    left = (diag[ks] - diag[a]) - (((gram[ks, ks] - gram[a, ks]) - gram[ks, a]) + gram[a, a]) / (ks - a)
    right = _costs_to(diag, gram, ks, b)
    gains = (whole - left) - right
    j = int(np.argmax(gains))
    return float(gains[j]), int(ks[j])


def energy_best(P, a: int, b: int, min_size: int):
    """Best divisive energy split of ``[a, b)``; ``(stat, tau, kappa)``.

    ``P`` is the 2-D prefix of the pairwise distance matrix. The left block
    is ``[a, tau)`` and the right block ``[tau, kappa)``; both hold at least
    ``min_size`` points. Returns ``(-inf, -1, -1)`` if nothing fits.
    """
    taus = np.arange(a + min_size, b - min_size + 1)
    if taus.size == 0:
        return -math.inf, -1, -1
    kaps = np.arange(a + 2 * min_size, b + 1)
    T, K = np.meshgrid(taus, kaps, indexing="ij")
    ok = K >= T + min_size
    m = (T - a).astype(np.float64)
    q = (K - T).astype(np.float64)
    q_safe = np.where(ok, q, 2.0)
    wx = ((P[T, T] - P[a, T]) - P[T, a]) + P[a, a]
    wy = ((P[K, K] - P[T, K]) - P[K, T]) + P[T, T]
    bxy = ((P[T, K] - P[a, K]) - P[T, T]) + P[a, T]
    e = (2.0 * bxy / (m * q_safe) - wx / (m * (m - 1.0))) - wy / (q_safe * (q_safe - 1.0))
    stat = np.where(ok, (m * q_safe / (m + q_safe)) * e, -np.inf)
    j = int(np.argmax(stat))
    i0, i1 = divmod(j, stat.shape[1])
    return float(stat[i0, i1]), int(taus[i0]), int(kaps[i1])
