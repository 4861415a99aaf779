"""Independent brute-force oracles used by the tests.

Nothing here calls into the code under test.
"""
import itertools
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _compositions(parts, total):
    # all non-negative integer vectors of length `parts` summing to `total`
    if parts == 1:
        return np.array([[total]], dtype=np.int32)
    blocks = []
    for k in range(total + 1):
        rest = _compositions(parts - 1, total - k)
        blocks.append(np.hstack([np.full((len(rest), 1), k, dtype=np.int32), rest]))
    return np.vstack(blocks)


def simplex_grid(n, step=0.01):
    steps = int(round(1 / step))
    return _compositions(n, steps) / steps


def grid_minimize(f_batch, block_sizes, step=0.01, chunk=200_000):
    """Minimum of ``f_batch`` over a grid of the product of simplices.

    ``f_batch`` maps an (m, n) array of points to m objective values.
    Returns ``(value, point)``.
    """
    grids = [simplex_grid(k, step) for k in block_sizes]
    best, arg = np.inf, None
    if len(grids) == 1:
        G = grids[0]
        for i in range(0, len(G), chunk):
            vals = f_batch(G[i:i + chunk])
            j = int(np.argmin(vals))
            if vals[j] < best:
                best, arg = float(vals[j]), G[i + j]
        return best, arg
    A, B = grids
    per = max(1, chunk // len(B))
    for i in range(0, len(A), per):
        a = A[i:i + per]
        pts = np.hstack([np.repeat(a, len(B), axis=0), np.tile(B, (len(a), 1))])
        vals = f_batch(pts)
        j = int(np.argmin(vals))
        if vals[j] < best:
            best, arg = float(vals[j]), pts[j]
    return best, arg


def quadratic_batch(Q, q=None):
    Q = np.asarray(Q, dtype=np.float64)
    q = np.zeros(len(Q)) if q is None else np.asarray(q, dtype=np.float64)
    return lambda G: 0.5 * np.einsum("ij,jk,ik->i", G, Q, G) + G @ q


def bisimplex_grid_min(Q, y, q=None, step=0.01):
    """Grid minimum of 1/2 g'Qg + q'g over the bi-simplex defined by y."""
    y = np.asarray(y)
    order = np.concatenate([np.flatnonzero(y == 1), np.flatnonzero(y == -1)])
    Qp = np.asarray(Q)[np.ix_(order, order)]
    qp = None if q is None else np.asarray(q)[order]
    val, pt = grid_minimize(quadratic_batch(Qp, qp), [(y == 1).sum(), (y == -1).sum()], step)
    g = np.empty(len(y))
    g[order] = pt
    return val, g


def simplex_grid_min(Q, q=None, step=0.01):
    return grid_minimize(quadratic_batch(Q, q), [len(Q)], step)


def conjunctions_both(x, z, c):
    """Count the monotone conjunctions of exactly c variables true on x and z."""
    return sum(1 for vs in itertools.combinations(range(len(x)), c)
               if all(x[v] for v in vs) and all(z[v] for v in vs))


def disjunctions_both(x, z, a):
    """Count the monotone disjunctions of exactly a variables true on x and z."""
    return sum(1 for vs in itertools.combinations(range(len(x)), a)
               if any(x[v] for v in vs) and any(z[v] for v in vs))


def spectrum_naive(s, t, p):
    """Sum over all position pairs with equal length-p windows."""
    total = 0
    for i in range(len(s) - p + 1):
        for j in range(len(t) - p + 1):
            if s[i:i + p] == t[j:j + p]:
                total += 1
    return total


def random_psd(rng, n, rank=None, scale=1.0):
    rank = n if rank is None else rank
    A = rng.standard_normal((n, rank)) * scale / np.sqrt(rank)
    return A @ A.T


def random_labels(rng, n):
    while True:
        y = rng.choice([-1, 1], size=n)
        if (y == 1).any() and (y == -1).any():
            return y
