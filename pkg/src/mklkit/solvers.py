"""Convex quadratic programs over a simplex or a product of two simplices.

Problems have the form ``min 1/2 g'Qg + q'g`` with ``g`` either on the unit
simplex or on the bi-simplex (non-negative, coefficients of each class
summing to one).  They are solved by Frank-Wolfe with pairwise steps and
exact line search; only rows of Q are ever needed, so Q may be given
implicitly through a quadratic operator.
"""
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

# exact gradient recomputation period, bounds round-off drift
_REFRESH = 500
# period of the face (fully corrective) step, and the largest support it handles
_CORRECTIVE = 25
_MAX_FACE = 400


class DenseQuadratic:
    """Explicit symmetric matrix."""

    def __init__(self, Q):
        self.Q = np.asarray(Q, dtype=np.float64)

    @property
    def n(self):
        return self.Q.shape[0]

    def row(self, j):
        return self.Q[j]

    def diagonal(self):
        return np.diag(self.Q).copy()

    def matvec(self, v):
        return self.Q @ v


class SignedKernelQuadratic:
    """``scale * Y K Y + ridge * I`` with ``Y = diag(y)``, without forming it.

    ``y=None`` drops the sign flips.  ``K`` is read row by row and is never
    copied.
    """

    def __init__(self, K, y=None, scale=1.0, ridge=0.0):
        self.K = K
        self.y = None if y is None else np.asarray(y, dtype=np.float64)
        self.scale = float(scale)
        self.ridge = float(ridge)

    @property
    def n(self):
        return self.K.shape[0]

    def row(self, j):
        r = self.K[j] * self.scale
        if self.y is not None:
            r = r * (self.y * self.y[j])
        if self.ridge:
            r[j] += self.ridge
        return r

    def diagonal(self):
        return self.scale * np.diag(self.K) + self.ridge

    def matvec(self, v):
        if self.y is None:
            out = self.scale * (self.K @ v)
        else:
            out = self.scale * self.y * (self.K @ (self.y * v))
        if self.ridge:
            out += self.ridge * v
        return out


class SimplexQP:
    """Quadratic objective plus a unit-simplex or bi-simplex region.

    Pass ``labels`` to select the bi-simplex; each label class then forms
    one block whose coefficients sum to one.
    """

    def __init__(self, Q, q=None, labels=None):
        if isinstance(Q, np.ndarray) or isinstance(Q, (list, tuple)):
            Q = np.asarray(Q, dtype=np.float64)
            if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
                raise ValueError("Q must be square")
            if np.any(np.abs(Q - Q.T) > 1e-9 * (1.0 + np.abs(Q))):
                raise ValueError("Q must be symmetric")
            Q = DenseQuadratic(Q)
        self.Q = Q
        n = Q.n
        self.q = np.zeros(n) if q is None else np.asarray(q, dtype=np.float64)
        if self.q.shape != (n,):
            raise ValueError("q must have length %d" % n)
        if labels is None:
            self.labels = None
            self.blocks = [np.arange(n)]
        else:
            y = np.asarray(labels)
            if y.shape != (n,):
                raise ValueError("labels must have length %d" % n)
            pos, neg = np.flatnonzero(y == 1), np.flatnonzero(y == -1)
            if len(pos) == 0 or len(neg) == 0:
                raise ValueError("bi-simplex region is empty: a class has no examples")
            if len(pos) + len(neg) != n:
                raise ValueError("labels must be +1 or -1")
            self.labels = y
            self.blocks = [pos, neg]

    @property
    def n(self):
        return self.Q.n

    def feasible_start(self):
        g = np.zeros(self.n)
        for b in self.blocks:
            g[b] = 1.0 / len(b)
        return g

    def objective(self, gamma):
        gamma = np.asarray(gamma, dtype=np.float64)
        return 0.5 * gamma @ self.Q.matvec(gamma) + self.q @ gamma

    def is_feasible(self, gamma, tol=1e-9):
        gamma = np.asarray(gamma)
        if np.any(gamma < -1e-12):
            return False
        return all(abs(gamma[b].sum() - 1.0) <= tol for b in self.blocks)


@dataclass
class QPSolution:
    gamma: np.ndarray
    objective: float
    iterations: int
    gap: float
    converged: bool
    history: Optional[List[float]] = field(default=None, repr=False)


def _fw_gap(grad, gamma, blocks):
    return sum(float(gamma[b] @ grad[b] - grad[b].min()) for b in blocks)


def _face_step(Q, q, blocks, gamma, grad):
    """Move toward the minimizer over the face spanned by the current support.

    The face minimizer solves the KKT system of the equality-constrained QP
    restricted to the support.  The step is an exact line search clamped
    to stay non-negative, so feasibility and monotonicity are kept.
    Returns the step length taken (0 when no progress is possible).
    """
    S = np.flatnonzero(gamma > 0)
    k = len(S)
    if k < 2 or k > _MAX_FACE:
        return 0.0, None
    QS = np.array([Q.row(j)[S] for j in S])
    member = [np.isin(S, b) for b in blocks]
    B = np.array([m.astype(np.float64) for m in member if m.any()])
    m = len(B)
    A = np.zeros((k + m, k + m))
    A[:k, :k] = QS
    A[:k, k:] = B.T
    A[k:, :k] = B
    rhs = np.concatenate([-q[S], np.ones(m)])
    sol = np.linalg.lstsq(A, rhs, rcond=None)[0]
    d = sol[:k] - gamma[S]
    # project out numerical drift from the block-sum constraints
    for row in B:
        mask = row > 0
        d[mask] -= d[mask].mean()
    slope = grad[S] @ d
    if slope >= 0:
        return 0.0, None
    neg = d < 0
    tmax = np.min(-gamma[S][neg] / d[neg]) if neg.any() else np.inf
    curv = d @ QS @ d
    t = -slope / curv if curv > 0 else np.inf
    t = min(t, tmax, 1.0)
    if not np.isfinite(t) or t <= 0:
        return 0.0, None
    step = np.zeros_like(gamma)
    step[S] = t * d
    if t == tmax:
        # land exactly on the boundary
        hit = S[neg][np.argmin(-gamma[S][neg] / d[neg])]
        step[hit] = -gamma[hit]
    return t, step


def solve(problem, tol=1e-7, max_iter=20000, record=False):
    """Minimize ``problem`` from the uniform feasible point.

    Stops once the Frank-Wolfe duality gap is at most
    ``tol * (1 + |objective|)``.  Running out of iterations is not an
    error: the last iterate is returned with ``converged=False``.  With
    ``record=True`` the objective after every step is kept in ``history``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    Q, q, blocks = problem.Q, problem.q, problem.blocks
    gamma = problem.feasible_start()
    grad = Q.matvec(gamma) + q
    obj = 0.5 * gamma @ (grad - q) + q @ gamma
    history = [obj] if record else None
    converged = False
    it = 0
    while True:
        gap = _fw_gap(grad, gamma, blocks)
        if gap <= tol * (1.0 + abs(obj)):
            converged = True
            break
        if it >= max_iter:
            break
        # pairwise direction: move mass from the worst active coordinate
        # to the best coordinate of the block with the largest gain
        best = None
        for b in blocks:
            gb = grad[b]
            s = b[np.argmin(gb)]
            active = b[gamma[b] > 0]
            a = active[np.argmax(grad[active])]
            pg = grad[a] - grad[s]
            if best is None or pg > best[0]:
                best = (pg, s, a)
        pg, s, a = best
        if pg <= 0:
            converged = True
            break
        it += 1
        if it % _CORRECTIVE == 0:
            t, step = _face_step(Q, q, blocks, gamma, grad)
            if t > 0:
                gamma += step
                np.maximum(gamma, 0.0, out=gamma)
                grad = Q.matvec(gamma) + q
                obj = 0.5 * gamma @ (grad - q) + q @ gamma
                if record:
                    history.append(float(obj))
                continue
        Qs, Qa = Q.row(s), Q.row(a)
        curv = Qs[s] + Qa[a] - 2.0 * Qs[a]
        tmax = gamma[a]
        t = min(pg / curv, tmax) if curv > 0 else tmax
        gamma[s] += t
        if t >= tmax:
            gamma[a] = 0.0
        else:
            gamma[a] -= t
        if it % _REFRESH == 0:
            grad = Q.matvec(gamma) + q
            obj = 0.5 * gamma @ (grad - q) + q @ gamma
        else:
            grad += t * (Qs - Qa)
            obj += -t * pg + 0.5 * t * t * max(curv, 0.0)
        if record:
            history.append(float(0.5 * gamma @ Q.matvec(gamma) + q @ gamma))
    grad = Q.matvec(gamma) + q
    obj = float(0.5 * gamma @ (grad - q) + q @ gamma)
    gap = _fw_gap(grad, gamma, blocks)
    return QPSolution(gamma, obj, it, gap, converged, history)


def project_simplex(v):
    """Euclidean projection of ``v`` onto the unit simplex (sort-based)."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or len(v) == 0:
        raise ValueError("expected a non-empty vector")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, len(v) + 1)
    rho = np.flatnonzero(u - css / k > 0)[-1]
    theta = css[rho] / (rho + 1)
    x = np.maximum(v - theta, 0.0)
    # remove the residual of floating-point summation on the support
    x /= x.sum()
    return x
