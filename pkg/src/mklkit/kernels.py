"""Base kernels for vectorial, binary and string data.

All functions follow the ``kernel(X, Z=None)`` convention: ``X`` holds the
reference (training) samples and ``Z`` the samples being compared against
them; the result has one row per ``Z`` sample and one column per ``X``
sample.  ``Z=None`` means ``Z = X`` and yields a square Gram matrix.
"""
import math
import re
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .core import MaterializedKernelList
from .meter import track

_INT64_MAX = np.iinfo(np.int64).max

KINDS = ("linear", "hpk", "monotone_conjunctive", "monotone_disjunctive", "p_spectrum")

# short names used on the command line
ALIASES = {
    "linear": "linear",
    "hpk": "hpk",
    "mck": "monotone_conjunctive",
    "mdk": "monotone_disjunctive",
    "spectrum": "p_spectrum",
}
_SHORT = {v: k for k, v in ALIASES.items()}


@dataclass(frozen=True)
class KernelSpec:
    kind: str
    param: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError("unknown kernel kind %r" % self.kind)
        if isinstance(self.param, bool) or int(self.param) != self.param or self.param < 1:
            raise ValueError("kernel parameter must be a positive integer, got %r" % (self.param,))
        object.__setattr__(self, "param", int(self.param))

    @property
    def data_kind(self):
        if self.kind == "p_spectrum":
            return "string"
        if self.kind.startswith("monotone"):
            return "binary"
        return "real"

    def __str__(self):
        if self.kind == "linear":
            return "linear"
        return "%s:%d" % (_SHORT[self.kind], self.param)

    def __call__(self, X, Z=None):
        if self.kind == "linear":
            return linear_kernel(X, Z)
        if self.kind == "hpk":
            return hpk(X, Z, degree=self.param)
        if self.kind == "monotone_conjunctive":
            return monotone_conjunctive_kernel(X, Z, c=self.param)
        if self.kind == "monotone_disjunctive":
            return monotone_disjunctive_kernel(X, Z, d=self.param)
        return p_spectrum_kernel(X, Z, p=self.param)


_SPEC_RE = re.compile(r"^([a-z_]+)(?::(\d+)(?:-(\d+))?)?$")


def parse_specs(text):
    """Expand a spec string such as ``hpk:1-20`` into a list of KernelSpec.

    Several specs can be joined with commas: ``linear,mck:1-3``.
    """
    specs = []
    for token in text.split(","):
        token = token.strip()
        m = _SPEC_RE.match(token)
        if not m or m.group(1) not in ALIASES:
            raise ValueError("invalid kernel spec %r" % token)
        kind = ALIASES[m.group(1)]
        if kind == "linear":
            if m.group(2) is not None:
                raise ValueError("linear kernel takes no parameter: %r" % token)
            specs.append(KernelSpec("linear"))
            continue
        if m.group(2) is None:
            raise ValueError("kernel %r needs a parameter, e.g. %s:2" % (token, m.group(1)))
        lo = int(m.group(2))
        hi = int(m.group(3)) if m.group(3) is not None else lo
        if hi < lo:
            raise ValueError("empty range in kernel spec %r" % token)
        specs.extend(KernelSpec(kind, p) for p in range(lo, hi + 1))
    return specs


def _pair(X, Z):
    X = np.asarray(X, dtype=np.float64)
    Z = X if Z is None else np.asarray(Z, dtype=np.float64)
    if X.ndim != 2 or Z.ndim != 2:
        raise ValueError("expected 2-D sample matrices")
    if X.shape[1] != Z.shape[1]:
        raise ValueError("feature dimension mismatch: %d vs %d" % (X.shape[1], Z.shape[1]))
    return X, Z


def linear_kernel(X, Z=None):
    X, Z = _pair(X, Z)
    return track(Z @ X.T)


_POW_BLOCK = 128


def int_power(L, k, out):
    """``out = L ** k`` elementwise by repeated squaring, row block by row block.

    ``np.power`` is slow on negative bases; squaring also keeps the
    temporaries to a few row blocks.  ``out`` may be ``L`` itself.
    """
    for i in range(0, L.shape[0], _POW_BLOCK):
        base = L[i:i + _POW_BLOCK].copy()
        acc = None
        e = k
        while True:
            if e & 1:
                acc = base.copy() if acc is None else np.multiply(acc, base, out=acc)
            e >>= 1
            if not e:
                break
            np.multiply(base, base, out=base)
        out[i:i + _POW_BLOCK] = acc
    return out


def hpk(X, Z=None, degree=2):
    """Homogeneous polynomial kernel ``<z, x> ** degree``."""
    if degree < 1 or int(degree) != degree:
        raise ValueError("HPK degree must be a positive integer")
    L = linear_kernel(X, Z)
    if degree > 1:
        int_power(L, int(degree), L)
    return L


def _binary_pair(X, Z):
    X, Z = _pair(X, Z)
    for A in (X, Z):
        if not np.all((A == 0) | (A == 1)):
            raise ValueError("boolean kernels need binary {0, 1} data")
    return X, Z


def binomial_table(m_max, k):
    """``[C(m, k) for m in 0..m_max]`` as float64, refusing int64 overflow."""
    table = [math.comb(m, k) for m in range(m_max + 1)]
    if table and max(table) > _INT64_MAX:
        raise OverflowError(
            "C(%d, %d) exceeds the 64-bit integer range" % (m_max, k))
    return np.array(table, dtype=np.float64)


def _check_arity(arity, d, name):
    if int(arity) != arity or not 1 <= arity <= d:
        raise ValueError("%s must be in [1, %d], got %r" % (name, d, arity))


def binary_dot(X, Z=None):
    """Integer matrix of shared active bits, ``dot(Z_i, X_j)``."""
    X, Z = _binary_pair(X, Z)
    return track(np.rint(Z @ X.T).astype(np.int64))


def common_zeros(X, Z=None):
    """Integer matrix counting positions where both rows are 0.

    Equal to ``d - |x| - |z| + dot(x, z)``.
    """
    X, Z = _binary_pair(X, Z)
    return track(np.rint((1.0 - Z) @ (1.0 - X).T).astype(np.int64))


def conjunctive_from_dot(dot, d, c):
    table = binomial_table(d, c)
    return track(np.take(table, dot))


def disjunctive_from_zeros(zeros, popx, popz, d, a):
    """Disjunctive kernel given the common-zero counts.

    ``C(d,a) - C(d-|x|,a) - C(d-|z|,a) + C(zeros, a)``; the number of
    disjunctions true on both rows is all of them minus those false on
    either row.
    """
    table = binomial_table(d, a)
    out = track(np.take(table, zeros))
    out -= table[d - popz][:, None]
    out -= table[d - popx][None, :]
    out += table[d]
    return out


def monotone_conjunctive_kernel(X, Z=None, c=2):
    """Number of monotone conjunctions of exactly ``c`` variables true on both rows."""
    X, Z = _binary_pair(X, Z)
    _check_arity(c, X.shape[1], "arity c")
    dot = binary_dot(X, Z)
    return conjunctive_from_dot(dot, X.shape[1], c)


def monotone_disjunctive_kernel(X, Z=None, d=2):
    """Number of monotone disjunctions of exactly ``d`` variables true on both rows."""
    X, Z = _binary_pair(X, Z)
    nfeat = X.shape[1]
    _check_arity(d, nfeat, "arity d")
    zeros = common_zeros(X, Z)
    popx = np.rint(X.sum(axis=1)).astype(np.int64)
    popz = np.rint(Z.sum(axis=1)).astype(np.int64)
    return disjunctive_from_zeros(zeros, popx, popz, nfeat, d)


def _as_bytes(s):
    return s.encode() if isinstance(s, str) else bytes(s)


def spectrum_features(strings, p, vocab):
    """Sparse matrix of length-``p`` substring counts, one row per string.

    ``vocab`` maps substrings to columns and is extended in place.
    """
    rows, cols, vals = [], [], []
    for i, s in enumerate(strings):
        s = _as_bytes(s)
        counts = Counter(s[k:k + p] for k in range(len(s) - p + 1))
        for u, c in counts.items():
            rows.append(i)
            cols.append(vocab.setdefault(u, len(vocab)))
            vals.append(c)
    return rows, cols, vals


def p_spectrum_kernel(S, T=None, p=2):
    """p-spectrum kernel: sum over length-p substrings of occurrence products."""
    if int(p) != p or p < 1:
        raise ValueError("spectrum length p must be a positive integer")
    p = int(p)
    same = T is None
    T = S if same else T
    vocab = {}
    fs = spectrum_features(S, p, vocab)
    ft = fs if same else spectrum_features(T, p, vocab)
    dim = max(len(vocab), 1)
    FS = sparse.csr_matrix((fs[2], (fs[0], fs[1])), shape=(len(S), dim), dtype=np.int64)
    FT = FS if same else sparse.csr_matrix(
        (ft[2], (ft[0], ft[1])), shape=(len(T), dim), dtype=np.int64)
    return track(np.asarray((FT @ FS.T).toarray(), dtype=np.float64))


def compute_list(data, specs, normalize=False):
    """Materialize one matrix per spec over ``data`` (a Dataset or raw samples)."""
    from .metrics import normalize_kernel

    kind = getattr(data, "kind", None)
    X = getattr(data, "X", data)
    mats = []
    for spec in specs:
        if kind is not None and not _compatible(spec, kind):
            raise ValueError("kernel %s cannot be applied to %s data" % (spec, kind))
        K = spec(X)
        if normalize:
            K = normalize_kernel(K)
        mats.append(K)
    return MaterializedKernelList(mats, specs=specs)


def compute_test_list(train, test, specs, normalize=False):
    """Test-versus-train matrices, one per spec (rows: test samples)."""
    Xtr = getattr(train, "X", train)
    Xte = getattr(test, "X", test)
    mats = []
    for spec in specs:
        K = spec(Xtr, Xte)
        if normalize:
            K = normalize_rect(K, self_similarity(spec, Xtr), self_similarity(spec, Xte))
        mats.append(K)
    return MaterializedKernelList(mats, specs=specs)


def self_similarity(spec, X):
    """``k(x, x)`` for every sample, without forming the Gram matrix."""
    if spec.kind == "p_spectrum":
        out = []
        for s in X:
            s = _as_bytes(s)
            counts = Counter(s[k:k + spec.param] for k in range(len(s) - spec.param + 1))
            out.append(sum(c * c for c in counts.values()))
        return np.array(out, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    sq = np.einsum("ij,ij->i", X, X)
    if spec.kind == "linear":
        return sq
    if spec.kind == "hpk":
        return sq ** spec.param
    pop = np.rint(sq).astype(np.int64)
    d = X.shape[1]
    table = binomial_table(d, spec.param)
    if spec.kind == "monotone_conjunctive":
        return table[pop]
    return table[d] - table[d - pop]


def normalize_rect(K, diag_train, diag_test):
    """Cosine-normalize a test-versus-train matrix given both self-similarities."""
    if np.any(diag_train <= 0) or np.any(diag_test <= 0):
        raise ValueError("normalization needs strictly positive self-similarities")
    K /= np.sqrt(diag_test)[:, None]
    K /= np.sqrt(diag_train)[None, :]
    return K


def _compatible(spec, kind):
    need = spec.data_kind
    if need == "string" or kind == "string":
        return need == kind
    # binary data is also real-valued
    return need == "real" or kind == "binary"
