"""Compiled inner loops (leaf absorption, Mann-Kendall pair count)."""

import numpy as np
from numba import njit


@njit(cache=True)
def ingest(xs, L, LS, SS, cent, R2, n, limit):
    """Absorb rows of ``xs`` into the leaf arrays; returns the new leaf count.

    Arrays must have capacity for ``n + len(xs)`` leaves.
    """
    M = xs.shape[1]
    for p in range(xs.shape[0]):
        best = -1
        bd = np.inf
        for i in range(n):
            d = 0.0
            for m in range(M):
                t = cent[i, m] - xs[p, m]
                d += t * t
            if d < bd:
                bd = d
                best = i
        if best >= 0:
            Lb = L[best]
            r2 = (Lb * R2[best] + Lb * bd / (Lb + 1)) / (Lb + 1)
            if r2 <= limit:
                L[best] = Lb + 1
                for m in range(M):
                    v = xs[p, m]
                    LS[best, m] += v
                    SS[best, m] += v * v
                    cent[best, m] -= (cent[best, m] - v) / (Lb + 1)
                R2[best] = r2
                continue
        L[n] = 1
        for m in range(M):
            v = xs[p, m]
            LS[n, m] = v
            SS[n, m] = v * v
            cent[n, m] = v
        R2[n] = 0.0
        n += 1
    return n


@njit(cache=True)
def mk_score(d):
    """Sum of sign(d[j] - d[i]) over all i < j."""
    s = 0
    q = d.shape[0]
    for i in range(q - 1):
        di = d[i]
        for j in range(i + 1, q):
            dj = d[j]
            if dj > di:
                s += 1
            elif dj < di:
                s -= 1
    return s


@njit(cache=True)
def _seg_cost(P0, P1, P2, i, j):
    # squared error of the weighted values i..j (inclusive) around their mean
    w = P0[j + 1] - P0[i]
    s = P1[j + 1] - P1[i]
    c = P2[j + 1] - P2[i] - s * s / w
    return c if c > 0.0 else 0.0


@njit(cache=True)
def optimal_partition(v, w, K):
    """Exact weighted 1-d k-means over sorted distinct values ``v``.

    Returns the start index of each of the ``K`` contiguous segments
    (``K <= len(v)``). Row k of the DP is filled by divide and conquer over
    the monotone split point; ties resolve to the leftmost split.
    """
    n = v.shape[0]
    P0 = np.zeros(n + 1)
    P1 = np.zeros(n + 1)
    P2 = np.zeros(n + 1)
    for i in range(n):
        P0[i + 1] = P0[i] + w[i]
        P1[i + 1] = P1[i] + w[i] * v[i]
        P2[i + 1] = P2[i] + w[i] * v[i] * v[i]
    D = np.full((K, n), np.inf)
    arg = np.zeros((K, n), dtype=np.int64)
    for j in range(n):
        D[0, j] = _seg_cost(P0, P1, P2, 0, j)
    stack = np.empty((4 * n + 8, 4), dtype=np.int64)
    for k in range(1, K):
        top = 0
        stack[0, 0] = k
        stack[0, 1] = n - 1
        stack[0, 2] = k
        stack[0, 3] = n - 1
        top = 1
        while top > 0:
            top -= 1
            jlo = stack[top, 0]
            jhi = stack[top, 1]
            olo = stack[top, 2]
            ohi = stack[top, 3]
            if jlo > jhi:
                continue
            mid = (jlo + jhi) // 2
            best = np.inf
            bi = olo
            hi = ohi if ohi < mid else mid
            for i in range(olo, hi + 1):
                val = D[k - 1, i - 1] + _seg_cost(P0, P1, P2, i, mid)
                if val < best:
                    best = val
                    bi = i
            D[k, mid] = best
            arg[k, mid] = bi
            stack[top, 0] = jlo
            stack[top, 1] = mid - 1
            stack[top, 2] = olo
            stack[top, 3] = bi
            top += 1
            stack[top, 0] = mid + 1
            stack[top, 1] = jhi
            stack[top, 2] = bi
            stack[top, 3] = ohi
            top += 1
    starts = np.zeros(K, dtype=np.int64)
    j = n - 1
    for k in range(K - 1, 0, -1):
        starts[k] = arg[k, j]
        j = starts[k] - 1
    return starts
