"""Synthetic data, the memory/time benchmark and the baseline comparison."""
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import Dataset
from .generators import lazy_list, reset_meter, meter_report
from .kernels import compute_list, compute_test_list
from .mkl import ALGORITHMS, average_mkl_fit, easymkl_fit, komd_fit, predict, decision_scores, sign_labels

MODES = ("list", "generator_cached", "generator_nocache")


def make_gaussians(n, d, seed=0, margin=2.0, binary=False):
    """Two isotropic Gaussian classes whose means are ``margin`` apart.

    Labels alternate before a seeded shuffle, so the classes differ in
    size by at most one.  Features are scaled by ``1/sqrt(d)`` to keep dot
    products of order one; ``binary=True`` thresholds them at zero.
    """
    if n < 2:
        raise ValueError("need at least 2 examples")
    if d < 1:
        raise ValueError("need at least 1 feature")
    rng = np.random.default_rng(seed)
    y = np.where(np.arange(n) % 2 == 0, 1, -1)
    y = y[rng.permutation(n)]
    direction = np.ones(d) / np.sqrt(d)
    X = rng.standard_normal((n, d)) + 0.5 * margin * y[:, None] * direction
    X /= np.sqrt(d)
    if binary:
        return Dataset((X > 0).astype(np.float64), y, "binary")
    return Dataset(X, y, "real")


def split_indices(n, fraction, seed):
    """Seeded shuffle; the first ``round(fraction * n)`` indices train."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("split fraction must be in (0, 1]")
    perm = np.random.default_rng(seed).permutation(n)
    k = max(1, int(round(fraction * n)))
    return np.sort(perm[:k]), np.sort(perm[k:])


def build_list(data, specs, mode, normalize=False):
    if mode == "list":
        return compute_list(data, specs, normalize=normalize)
    if mode not in MODES:
        raise ValueError("unknown mode %r" % mode)
    return lazy_list(data.X, specs, cache=(mode == "generator_cached"), normalize=normalize)


@dataclass
class BenchmarkRow:
    dataset: str
    n: int
    d: int
    P: int
    mode: str
    status: str = "ok"
    seconds: float = float("nan")
    peak_bytes: int = 0
    accuracy: float = float("nan")
    eta: Optional[np.ndarray] = field(default=None, repr=False)
    rss_max_mb: float = float("nan")


def _rss_mb():
    try:
        import resource
    except ImportError:  # pragma: no cover - non-POSIX
        return float("nan")
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0


def benchmark(data, specs, algorithm="easymkl", modes=MODES, name="data",
              normalize=False, **fit_kwargs):
    """Run the same fit under each kernel-list mode.

    Wall time covers kernel computation and training.  Peak bytes come
    from the allocation meter, reset before each mode.  Training accuracy
    is measured afterwards and is not timed.
    """
    fit = ALGORITHMS[algorithm]
    rows = []
    n = len(data)
    d = 0 if data.kind == "string" else data.X.shape[1]
    for mode in modes:
        row = BenchmarkRow(name, n, d, len(specs), mode)
        reset_meter()
        try:
            t0 = time.perf_counter()
            KL = build_list(data, specs, mode, normalize)
            model = fit(KL, data.y, **fit_kwargs)
            row.seconds = time.perf_counter() - t0
            row.peak_bytes = meter_report()[1]
            row.eta = model.eta
            _, labels = predict(model, KL)
            row.accuracy = float(np.mean(labels == data.y))
            del KL, model
        except MemoryError:
            row.status = "failed: out of memory"
        row.rss_max_mb = _rss_mb()
        rows.append(row)
    return rows


def modes_agree(rows, tol=1e-9):
    ok = [r for r in rows if r.status == "ok"]
    for r in ok[1:]:
        if np.max(np.abs(r.eta - ok[0].eta)) > tol or r.accuracy != ok[0].accuracy:
            return False
    return True


def accuracy(y_true, y_pred):
    return float(np.mean(np.asarray(y_true) == np.asarray(y_pred)))


def compare_baselines(train, test, specs, lam=0.1, normalize=False):
    """Test accuracy of every base kernel alone, AverageMKL and EasyMKL.

    Returns a list of ``(name, accuracy)`` pairs in that order.
    """
    KL = compute_list(train, specs, normalize=normalize)
    KLte = compute_test_list(train, test, specs, normalize=normalize)
    results = []
    for r, spec in enumerate(specs):
        gamma, bias = komd_fit(KL[r], train.y, lam)
        scores = decision_scores(KLte[r], train.y, gamma, bias)
        results.append((str(spec), accuracy(test.y, sign_labels(scores))))
    for name, fit in (("average", average_mkl_fit), ("easymkl", easymkl_fit)):
        model = fit(KL, train.y, lam=lam)
        results.append((name, accuracy(test.y, predict(model, KLte)[1])))
    return results
