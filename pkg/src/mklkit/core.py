"""Shared domain types: Gram matrices, labels, datasets and kernel lists."""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .meter import track

# rows per block when accumulating eta_r * K_r into a combination
_AXPY_BLOCK = 256


def validate_gram(K, tol=1e-9):
    """Check the symmetry and diagonal invariants of a Gram matrix.

    PSD-ness is deliberately not checked here (cubic cost); see
    :func:`min_eigenvalue_ok` for the test-time check.
    """
    K = np.asarray(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        return False
    if not np.all(np.isfinite(K)):
        return False
    if np.any(np.abs(K - K.T) > tol * (1.0 + np.abs(K))):
        return False
    return bool(np.all(np.diag(K) >= -1e-12))


def min_eigenvalue_ok(K):
    """PSD check: smallest eigenvalue >= -1e-8 * max(1, max diagonal)."""
    K = np.asarray(K, dtype=np.float64)
    lam = np.linalg.eigvalsh((K + K.T) / 2)
    scale = max(1.0, float(np.max(np.diag(K)))) if K.size else 1.0
    return bool(lam.min() >= -1e-8 * scale) if K.size else True


def check_labels(y, require_both=True):
    """Return ``y`` as an int array over {+1, -1}.

    Raises ``ValueError`` for other values, or for a single-class vector
    when ``require_both`` is set.
    """
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError("labels must be a 1-D sequence")
    if not np.all((y == 1) | (y == -1)):
        raise ValueError("labels must be +1 or -1")
    y = y.astype(np.int64)
    if require_both and not (np.any(y == 1) and np.any(y == -1)):
        raise ValueError("both classes (+1 and -1) must be present")
    return y


@dataclass(frozen=True)
class Dataset:
    """Samples plus optional binary labels.

    ``X`` is either an ``(n, d)`` float array or a tuple of ``n`` byte
    strings.  ``kind`` is ``"real"``, ``"binary"`` or ``"string"``.
    """
    X: Union[np.ndarray, tuple]
    y: Optional[np.ndarray] = None
    kind: str = "real"

    def __post_init__(self):
        if self.kind == "string":
            X = tuple(s.encode() if isinstance(s, str) else bytes(s) for s in self.X)
        else:
            X = np.array(self.X, dtype=np.float64)
            if X.ndim != 2:
                raise ValueError("vectorial data must be a 2-D matrix")
            if self.kind == "binary" and not np.all((X == 0) | (X == 1)):
                raise ValueError("binary dataset contains values outside {0, 1}")
            if self.kind not in ("real", "binary"):
                raise ValueError("unknown data kind %r" % self.kind)
            X.setflags(write=False)
        object.__setattr__(self, "X", X)
        if self.y is not None:
            y = check_labels(self.y, require_both=False)
            if len(y) != len(X):
                raise ValueError("got %d labels for %d samples" % (len(y), len(X)))
            y.setflags(write=False)
            object.__setattr__(self, "y", y)

    def __len__(self):
        return len(self.X)

    def subset(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        X = tuple(self.X[i] for i in idx) if self.kind == "string" else self.X[idx]
        y = None if self.y is None else self.y[idx]
        return Dataset(X, y, self.kind)


class KernelList(ABC):
    """Ordered, length-P source of kernel matrices over one sample set.

    ``KL[r]`` returns the r-th matrix.  Matrices may be square Gram
    matrices (train versus train) or rectangular (test versus train); all
    of them share ``shape``.
    """

    @abstractmethod
    def __len__(self):
        ...

    @abstractmethod
    def get(self, r):
        ...

    @property
    @abstractmethod
    def shape(self):
        ...

    def __getitem__(self, r):
        if not isinstance(r, (int, np.integer)):
            raise TypeError("kernel list indices must be integers")
        if r < 0:
            r += len(self)
        if not 0 <= r < len(self):
            raise IndexError("kernel index %d out of range" % r)
        return self.get(int(r))

    def __iter__(self):
        for r in range(len(self)):
            yield self.get(r)


class MaterializedKernelList(KernelList):
    """Kernel list holding all P matrices in memory."""

    def __init__(self, matrices, specs=None):
        mats = []
        for K in matrices:
            K = np.asarray(K, dtype=np.float64)
            if K.ndim != 2:
                raise ValueError("kernel matrices must be 2-D")
            mats.append(K)
        if not mats:
            raise ValueError("a kernel list needs at least one matrix")
        if any(K.shape != mats[0].shape for K in mats):
            raise ValueError("all kernels in a list must share the same shape")
        for K in mats:
            K.setflags(write=False)
        self._mats = mats
        self.specs = None if specs is None else tuple(specs)

    def __len__(self):
        return len(self._mats)

    def get(self, r):
        return self._mats[r]

    @property
    def shape(self):
        return self._mats[0].shape


def as_kernel_list(KL):
    """Accept a KernelList or a plain sequence of arrays."""
    if isinstance(KL, KernelList):
        return KL
    return MaterializedKernelList(KL)


def _axpy(acc, alpha, K):
    # acc += alpha * K without an n x n temporary
    for i in range(0, acc.shape[0], _AXPY_BLOCK):
        acc[i:i + _AXPY_BLOCK] += alpha * K[i:i + _AXPY_BLOCK]


def combine(KL, eta):
    """Return ``sum_r eta[r] * KL[r]``.

    The list is streamed: each matrix is requested, accumulated and
    released before the next one, so a lazy list keeps one output resident.
    """
    KL = as_kernel_list(KL)
    eta = np.asarray(eta, dtype=np.float64)
    if eta.ndim != 1 or len(eta) != len(KL):
        raise ValueError("expected %d weights, got %s" % (len(KL), eta.shape))
    if np.any(eta < 0):
        raise ValueError("combination weights must be non-negative")
    acc = track(np.zeros(KL.shape))
    for r in range(len(KL)):
        if eta[r] == 0:
            continue
        K = KL[r]
        _axpy(acc, eta[r], K)
        del K
    return acc
