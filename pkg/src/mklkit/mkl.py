"""MKL algorithms (AverageMKL, EasyMKL, GRAM) and the KOMD base learner.

Every fit streams the kernel list, so lazy generators keep their bounded
residency during training.  Fitted weights always lie on the unit simplex.
"""
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .core import _axpy, as_kernel_list, check_labels, combine
from .meter import track
from .metrics import margin, radius
from .solvers import SignedKernelQuadratic, SimplexQP, project_simplex, solve

DEFAULT_LAMBDA = 0.1


# ---------------------------------------------------------------- KOMD

def _check_lambda(lam):
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must be in [0, 1], got %r" % (lam,))


def komd_problem(K, y, lam):
    """``min (1-lam) g'YKYg + lam ||g||^2`` over the bi-simplex."""
    return SimplexQP(SignedKernelQuadratic(K, y, scale=2.0 * (1.0 - lam), ridge=2.0 * lam),
                     labels=y)


def komd_bias(K, y, gamma):
    # minus half the sum of the squared norms of the two hull points,
    # signed by class: the separator passes through their midpoint
    return float(-0.5 * (y * gamma) @ (K @ gamma))


@dataclass
class KOMDResult:
    gamma: np.ndarray
    bias: float
    objective: float
    converged: bool = True


def komd_solve(K, y, lam=DEFAULT_LAMBDA, tol=1e-7, max_iter=20000):
    K = np.asarray(K, dtype=np.float64)
    y = check_labels(y)
    _check_lambda(lam)
    if K.shape != (len(y), len(y)):
        raise ValueError("kernel shape %s does not match %d labels" % (K.shape, len(y)))
    sol = solve(komd_problem(K, y, lam), tol=tol, max_iter=max_iter)
    return KOMDResult(sol.gamma, komd_bias(K, y, sol.gamma), sol.objective, sol.converged)


def komd_fit(K, y, lam=DEFAULT_LAMBDA, tol=1e-7, max_iter=20000):
    """Return ``(gamma, bias)`` of KOMD trained on ``K``."""
    res = komd_solve(K, y, lam, tol, max_iter)
    return res.gamma, res.bias


def decision_scores(K_test, y, gamma, bias):
    return np.asarray(K_test) @ (y * gamma) + bias


def sign_labels(scores):
    return np.where(scores >= 0, 1, -1)


class KOMD:
    """Kernel Optimization of the Margin Distribution, for a single kernel."""

    def __init__(self, lam=DEFAULT_LAMBDA, tol=1e-7, max_iter=20000):
        self.lam = lam
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, K, y):
        self.y_ = check_labels(y)
        res = komd_solve(K, self.y_, self.lam, self.tol, self.max_iter)
        self.gamma_, self.bias_, self.objective_ = res.gamma, res.bias, res.objective
        return self

    def decision_function(self, K_test):
        return decision_scores(K_test, self.y_, self.gamma_, self.bias_)

    def predict(self, K_test):
        return sign_labels(self.decision_function(K_test))


# ---------------------------------------------------------------- models

@dataclass
class TraceRecord:
    iteration: int
    eta: np.ndarray
    objective: float


@dataclass
class FitTrace:
    records: List[TraceRecord] = field(default_factory=list)

    def append(self, iteration, eta, objective):
        if self.records and iteration <= self.records[-1].iteration:
            raise ValueError("trace iterations must be strictly increasing")
        self.records.append(TraceRecord(iteration, np.array(eta), float(objective)))

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


class Callback:
    """Training observer.  Both hooks receive copies and must not mutate state."""

    def on_iteration(self, iteration, eta, objective):
        pass

    def on_finish(self, model):
        pass


class TraceRecorder(Callback):

    def __init__(self):
        self.trace = FitTrace()

    def on_iteration(self, iteration, eta, objective):
        self.trace.append(iteration, eta, objective)


@dataclass
class MKLModel:
    eta: np.ndarray
    gamma: np.ndarray
    bias: float
    labels: np.ndarray
    algorithm: str
    hyperparameters: dict
    specs: Optional[tuple] = None
    objective: float = float("nan")
    relevances: Optional[np.ndarray] = None
    iterations: int = 1
    trace: FitTrace = field(default_factory=FitTrace)

    def decision_function(self, KL_test):
        return predict(self, KL_test)[0]

    def predict(self, KL_test):
        return predict(self, KL_test)[1]


def predict(model, KL_test):
    """Scores and labels for test-versus-train kernels ``KL_test``."""
    KL_test = as_kernel_list(KL_test)
    if len(KL_test) != len(model.eta):
        raise ValueError("model has %d kernels, got %d" % (len(model.eta), len(KL_test)))
    n = len(model.gamma)
    if KL_test.shape[1] != n:
        raise ValueError("test kernels have %d columns, model was trained on %d examples"
                         % (KL_test.shape[1], n))
    Kc = combine(KL_test, model.eta)
    scores = decision_scores(Kc, model.labels, model.gamma, model.bias)
    return scores, sign_labels(scores)


def _notify(callbacks, iteration, eta, objective):
    for cb in callbacks:
        view = np.array(eta)
        view.setflags(write=False)
        cb.on_iteration(iteration, view, objective)


def _prepare(KL, y):
    KL = as_kernel_list(KL)
    if len(KL) == 0:
        raise ValueError("empty kernel list")
    y = check_labels(y)
    if KL.shape != (len(y), len(y)):
        raise ValueError("kernels of shape %s do not match %d labels" % (KL.shape, len(y)))
    return KL, y


def _finish(KL, y, eta, algorithm, hyper, lam, tol, max_iter, **extra):
    Kc = combine(KL, eta)
    res = komd_solve(Kc, y, lam, tol, max_iter)
    del Kc
    model = MKLModel(eta=eta, gamma=res.gamma, bias=res.bias, labels=y,
                     algorithm=algorithm, hyperparameters=hyper,
                     specs=getattr(KL, "specs", None), **extra)
    if "objective" not in extra:
        model.objective = res.objective
    return model


# ---------------------------------------------------------------- AverageMKL

def average_mkl_fit(KL, y, lam=DEFAULT_LAMBDA, tol=1e-7, max_iter=20000, callbacks=()):
    """Uniform weights, then KOMD on the averaged kernel."""
    KL, y = _prepare(KL, y)
    eta = np.full(len(KL), 1.0 / len(KL))
    recorder = TraceRecorder()
    callbacks = [recorder, *callbacks]
    model = _finish(KL, y, eta, "average", {"lam": lam}, lam, tol, max_iter)
    _notify(callbacks, 1, eta, model.objective)
    model.trace = recorder.trace
    for cb in callbacks:
        cb.on_finish(model)
    return model


# ---------------------------------------------------------------- EasyMKL

def easymkl_relevance(KL, y, gamma):
    """``d_r = (y*gamma)' K_r (y*gamma)`` for every kernel of the list."""
    KL = as_kernel_list(KL)
    v = np.asarray(y, dtype=np.float64) * np.asarray(gamma, dtype=np.float64)
    d = np.empty(len(KL))
    for r in range(len(KL)):
        K = KL[r]
        d[r] = v @ (K @ v)
        del K
    return d


def easymkl_fit(KL, y, lam=DEFAULT_LAMBDA, tol=1e-7, max_iter=20000, callbacks=()):
    """EasyMKL: weights proportional to each kernel's margin contribution.

    1. KOMD on the plain sum of the base kernels gives ``gamma*``.
    2. ``d_r = gamma*' Y K_r Y gamma*``, ``eta = d / sum(d)``.
    3. KOMD again on the combined kernel.

    The list is streamed twice: once for the sum, once for the relevances,
    accumulating ``d_r * K_r`` on the way so that step 3 needs no extra pass.
    """
    KL, y = _prepare(KL, y)
    _check_lambda(lam)
    Ksum = combine(KL, np.ones(len(KL)))
    stage1 = komd_solve(Ksum, y, lam, tol, max_iter)
    del Ksum
    v = y * stage1.gamma
    d = np.empty(len(KL))
    acc = track(np.zeros(KL.shape))
    for r in range(len(KL)):
        K = KL[r]
        d[r] = max(v @ (K @ v), 0.0)
        if d[r] > 0:
            _axpy(acc, d[r], K)
        del K
    total = d.sum()
    if total > 0:
        eta = d / total
        acc /= total
    else:
        eta = np.full(len(KL), 1.0 / len(KL))
        del acc
        acc = combine(KL, eta)
    res = komd_solve(acc, y, lam, tol, max_iter)
    del acc
    model = MKLModel(eta=eta, gamma=res.gamma, bias=res.bias, labels=y, algorithm="easymkl",
                     hyperparameters={"lam": lam}, specs=getattr(KL, "specs", None),
                     objective=res.objective, relevances=d)
    recorder = TraceRecorder()
    callbacks = [recorder, *callbacks]
    _notify(callbacks, 1, eta, model.objective)
    model.trace = recorder.trace
    for cb in callbacks:
        cb.on_finish(model)
    return model


# ---------------------------------------------------------------- GRAM

@dataclass
class RatioState:
    psi: float
    radius_sq: float
    margin_sq: float
    alpha: np.ndarray
    gamma: np.ndarray


def radius_margin_ratio(KL, y, eta, tol=1e-7, max_iter=20000):
    """``psi(eta) = R^2 / rho^2`` of the combined kernel.

    ``rho^2`` is the squared distance between the class hulls.  Returns
    ``psi = inf`` when the hulls intersect.
    """
    Kc = combine(KL, eta)
    rad = radius(Kc, tol=tol, max_iter=max_iter)
    mar = margin(Kc, y, tol=tol, max_iter=max_iter)
    del Kc
    r2, m2 = rad.radius_sq, mar.hull_distance_sq
    psi = r2 / m2 if m2 > 1e-12 * max(1.0, r2) else np.inf
    return RatioState(psi, r2, m2, rad.gamma, mar.gamma)


def radius_margin_gradient(KL, y, state):
    """Envelope-theorem gradient of ``psi`` with respect to the weights."""
    KL = as_kernel_list(KL)
    a = state.alpha
    v = np.asarray(y, dtype=np.float64) * state.gamma
    r2, m2 = state.radius_sq, state.margin_sq
    g = np.empty(len(KL))
    for r in range(len(KL)):
        K = KL[r]
        dr2 = a @ np.diag(K) - a @ (K @ a)
        dm2 = v @ (K @ v)
        g[r] = (m2 * dr2 - r2 * dm2) / (m2 * m2)
        del K
    return g


def gram_fit(KL, y, max_iter=1000, step_size=1.0, tol=1e-6, lam=DEFAULT_LAMBDA,
             inner_tol=1e-7, inner_max_iter=20000, callbacks=()):
    """Minimize the radius-margin ratio over the simplex by projected gradient.

    Each step starts at ``step_size`` and is halved (at most 30 times)
    until the ratio does not increase; no acceptable step ends the fit.
    The final classifier is KOMD on the combined kernel.
    """
    KL, y = _prepare(KL, y)
    P = len(KL)
    eta = np.full(P, 1.0 / P)
    state = radius_margin_ratio(KL, y, eta, inner_tol, inner_max_iter)
    if not np.isfinite(state.psi):
        raise ValueError(
            "GRAM: the class hulls intersect under the uniform combination "
            "(squared hull distance %.3g); the radius-margin ratio is undefined"
            % state.margin_sq)
    recorder = TraceRecorder()
    callbacks = [recorder, *callbacks]
    _notify(callbacks, 0, eta, state.psi)
    it = 0
    while it < max_iter:
        grad = radius_margin_gradient(KL, y, state)
        step = step_size
        accepted = None
        for _ in range(31):
            cand = project_simplex(eta - step * grad)
            cstate = radius_margin_ratio(KL, y, cand, inner_tol, inner_max_iter)
            if cstate.psi <= state.psi:
                accepted = (cand, cstate)
                break
            step *= 0.5
        if accepted is None:
            break
        it += 1
        prev = state.psi
        eta, state = accepted
        _notify(callbacks, it, eta, state.psi)
        if abs(prev - state.psi) <= tol * prev:
            break
    hyper = {"lam": lam, "max_iter": max_iter, "step_size": step_size, "tol": tol}
    model = _finish(KL, y, eta, "gram", hyper, lam, inner_tol, inner_max_iter,
                    objective=state.psi, iterations=it)
    model.trace = recorder.trace
    for cb in callbacks:
        cb.on_finish(model)
    return model


# ---------------------------------------------------------------- estimators

class _MKL:
    algorithm = None

    def fit(self, KL, y):
        self.model_ = self._fit(KL, y)
        self.weights = self.model_.eta
        return self

    def decision_function(self, KL_test):
        return predict(self.model_, KL_test)[0]

    def predict(self, KL_test):
        return predict(self.model_, KL_test)[1]


class AverageMKL(_MKL):

    def __init__(self, lam=DEFAULT_LAMBDA, callbacks=()):
        self.lam = lam
        self.callbacks = callbacks

    def _fit(self, KL, y):
        return average_mkl_fit(KL, y, lam=self.lam, callbacks=self.callbacks)


class EasyMKL(_MKL):

    def __init__(self, lam=DEFAULT_LAMBDA, callbacks=()):
        self.lam = lam
        self.callbacks = callbacks

    def _fit(self, KL, y):
        return easymkl_fit(KL, y, lam=self.lam, callbacks=self.callbacks)


class GRAM(_MKL):

    def __init__(self, max_iter=1000, step_size=1.0, tol=1e-6, lam=DEFAULT_LAMBDA,
                 callbacks=()):
        self.max_iter = max_iter
        self.step_size = step_size
        self.tol = tol
        self.lam = lam
        self.callbacks = callbacks

    def _fit(self, KL, y):
        return gram_fit(KL, y, max_iter=self.max_iter, step_size=self.step_size,
                        tol=self.tol, lam=self.lam, callbacks=self.callbacks)


ALGORITHMS = {"average": average_mkl_fit, "easymkl": easymkl_fit, "gram": gram_fit}
