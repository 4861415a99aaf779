"""Kernel quality measures: margin, MEB radius, spectral ratio, alignment."""
from dataclasses import dataclass

import numpy as np

from .core import check_labels
from .meter import track
from .solvers import SignedKernelQuadratic, SimplexQP, solve


@dataclass
class MarginResult:
    margin: float
    gamma: np.ndarray
    # squared distance between the class convex hulls
    hull_distance_sq: float


@dataclass
class RadiusResult:
    radius: float
    gamma: np.ndarray
    radius_sq: float


def _square(K):
    K = np.asarray(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError("expected a square kernel matrix")
    return K


def margin(K, y, tol=1e-7, max_iter=20000):
    """Half the distance between the convex hulls of the two classes.

    The squared hull distance is ``min g'YKYg`` over the bi-simplex.
    """
    K = _square(K)
    y = check_labels(y)
    if len(y) != K.shape[0]:
        raise ValueError("label count does not match the kernel")
    sol = solve(SimplexQP(SignedKernelQuadratic(K, y, scale=2.0), labels=y),
                tol=tol, max_iter=max_iter)
    dist_sq = sol.objective if sol.objective > 0 else 0.0
    return MarginResult(0.5 * np.sqrt(dist_sq), sol.gamma, dist_sq)


def radius(K, tol=1e-7, max_iter=20000):
    """Radius of the minimum enclosing ball of the points in feature space.

    ``R^2 = max sum_i g_i K_ii - g'Kg`` over the unit simplex.
    """
    K = _square(K)
    if K.shape[0] == 0:
        raise ValueError("empty kernel")
    problem = SimplexQP(SignedKernelQuadratic(K, scale=2.0), q=-np.diag(K))
    sol = solve(problem, tol=tol, max_iter=max_iter)
    r2 = -sol.objective if sol.objective < 0 else 0.0
    return RadiusResult(np.sqrt(r2), sol.gamma, r2)


def trace_norm(K):
    return float(np.trace(K))


def frobenius_norm(K):
    return float(np.linalg.norm(K, "fro"))


def spectral_ratio(K, norm=True):
    """Empirical complexity ``trace(K) / ||K||_F``.

    With ``norm=True`` the value is mapped from ``[1, sqrt(n)]`` onto ``[0, 1]``.
    """
    K = _square(K)
    fro = frobenius_norm(K)
    if fro == 0:
        raise ValueError("spectral ratio of the zero matrix is undefined")
    sr = trace_norm(K) / fro
    if not norm:
        return sr
    n = K.shape[0]
    if n < 2:
        raise ValueError("normalized spectral ratio needs n >= 2")
    return (sr - 1.0) / (np.sqrt(n) - 1.0)


def alignment(K1, K2):
    """Frobenius cosine between two kernel matrices."""
    K1 = np.asarray(K1, dtype=np.float64)
    K2 = np.asarray(K2, dtype=np.float64)
    if K1.shape != K2.shape:
        raise ValueError("kernel shapes differ: %s vs %s" % (K1.shape, K2.shape))
    n1, n2 = frobenius_norm(K1), frobenius_norm(K2)
    if n1 == 0 or n2 == 0:
        raise ValueError("alignment with a zero matrix is undefined")
    return float(np.sum(K1 * K2) / (n1 * n2))


def center(K):
    """``H K H`` with ``H = I - ones / n``."""
    K = _square(K)
    Kc = K - K.mean(axis=0, keepdims=True)
    return Kc - Kc.mean(axis=1, keepdims=True)


def centered_alignment(K1, K2):
    C1, C2 = center(K1), center(K2)
    # constant kernels vanish after centering
    for C, K in ((C1, K1), (C2, K2)):
        if frobenius_norm(C) <= 1e-12 * max(1.0, frobenius_norm(K)):
            raise ValueError("kernel is constant: its centered form is zero")
    return alignment(C1, C2)


def normalize_kernel(K):
    """Unit-diagonal (cosine) normalization ``K_ij / sqrt(K_ii K_jj)``."""
    return normalize_inplace(track(np.array(_square(K), dtype=np.float64)))


def normalize_inplace(K):
    d = np.diag(K).copy()
    if np.any(d <= 0):
        raise ValueError("normalization needs a strictly positive diagonal")
    s = 1.0 / np.sqrt(d)
    K *= s[:, None]
    K *= s[None, :]
    np.fill_diagonal(K, 1.0)
    return K
