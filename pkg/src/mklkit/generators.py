"""Lazy kernel lists.

A generator computes its r-th kernel only when asked for it and keeps at
most one output resident, plus one cached auxiliary matrix shared by all
the kernels it produces:

* HPK generators cache the linear Gram matrix; every degree is an
  elementwise power of it.
* Boolean generators cache the integer dot-product matrix (conjunctive)
  or the common-zero count matrix (disjunctive); every arity is a table
  lookup of binomial coefficients.

Pass ``cache=False`` to recompute the auxiliary matrix on every access.
Consumers that want the residency bound must drop their reference to
``KL[r]`` before requesting the next kernel, as :func:`mklkit.core.combine`
does.
"""
import numpy as np

from .core import KernelList, MaterializedKernelList
from .kernels import (KernelSpec, binary_dot, common_zeros, conjunctive_from_dot,
                      disjunctive_from_zeros, int_power, linear_kernel, normalize_rect,
                      self_similarity)
from .meter import METER, AllocationMeter, meter_report, reset_meter, track  # noqa: F401
from .metrics import normalize_inplace


class LazyKernelList(KernelList):
    """Base class: computes ``KL[r]`` on demand and keeps one output resident."""

    def __init__(self, X, specs, Z=None, cache=True, normalize=False):
        self.X = X
        self.Z = Z
        self.specs = tuple(specs)
        if not self.specs:
            raise ValueError("a kernel list needs at least one kernel")
        self.cache = cache
        self.normalize = normalize
        self._resident = None
        self._aux = None
        self._diag = None

    def __len__(self):
        return len(self.specs)

    @property
    def shape(self):
        n = len(self.X)
        return (n if self.Z is None else len(self.Z), n)

    def _compute(self, r):
        raise NotImplementedError

    def get(self, r):
        self._resident = None
        out = self._compute(r)
        if self.normalize:
            self._normalize(out, self.specs[r])
        out.setflags(write=False)
        self._resident = out
        return out

    def _normalize(self, K, spec):
        if self.Z is None:
            normalize_inplace(K)
        else:
            normalize_rect(K, self_similarity(spec, self.X), self_similarity(spec, self.Z))

    def release(self):
        """Drop the resident output and the cached auxiliary matrix."""
        self._resident = None
        self._aux = None


class SpecGenerator(LazyKernelList):
    """Lazy list over arbitrary specs, no shared cache."""

    def _compute(self, r):
        return self.specs[r](self.X, self.Z)


class HPKGenerator(LazyKernelList):

    def __init__(self, X, degrees, Z=None, cache=True, normalize=False):
        degrees = list(degrees)
        if not degrees:
            raise ValueError("empty degree list")
        super().__init__(X, [KernelSpec("hpk", d) for d in degrees], Z, cache, normalize)
        self.degrees = tuple(d.param for d in self.specs)

    def _linear(self):
        if not self.cache:
            return linear_kernel(self.X, self.Z)
        if self._aux is None:
            self._aux = linear_kernel(self.X, self.Z)
        return self._aux

    def _compute(self, r):
        degree = self.degrees[r]
        if not self.cache:
            L = self._linear()
            if degree > 1:
                int_power(L, degree, L)
            return L
        L = self._linear()
        out = track(np.empty_like(L))
        if degree > 1:
            int_power(L, degree, out)
        else:
            out[...] = L
        return out


class BooleanGenerator(LazyKernelList):

    def __init__(self, X, kind, arities, Z=None, cache=True, normalize=False):
        if kind not in ("conjunctive", "disjunctive"):
            raise ValueError("kind must be 'conjunctive' or 'disjunctive'")
        arities = list(arities)
        if not arities:
            raise ValueError("empty arity list")
        X = np.asarray(X, dtype=np.float64)
        Zarr = None if Z is None else np.asarray(Z, dtype=np.float64)
        self.kind = kind
        self.nfeat = X.shape[1]
        for a in arities:
            if int(a) != a or not 1 <= a <= self.nfeat:
                raise ValueError("arity must be in [1, %d], got %r" % (self.nfeat, a))
        specs = [KernelSpec("monotone_" + kind, a) for a in arities]
        super().__init__(X, specs, Zarr, cache, normalize)
        self.arities = tuple(s.param for s in self.specs)
        # row popcounts are vectors, always kept
        self._popx = np.rint(X.sum(axis=1)).astype(np.int64)
        self._popz = self._popx if Zarr is None else np.rint(Zarr.sum(axis=1)).astype(np.int64)

    def _auxiliary(self):
        if self.cache and self._aux is not None:
            return self._aux
        if self.kind == "conjunctive":
            aux = binary_dot(self.X, self.Z)
        else:
            aux = common_zeros(self.X, self.Z)
        if self.cache:
            self._aux = aux
        return aux

    def _compute(self, r):
        aux = self._auxiliary()
        a = self.arities[r]
        if self.kind == "conjunctive":
            return conjunctive_from_dot(aux, self.nfeat, a)
        return disjunctive_from_zeros(aux, self._popx, self._popz, self.nfeat, a)


def hpk_generator(X, degrees, Z=None, cache=True, normalize=False):
    return HPKGenerator(X, degrees, Z=Z, cache=cache, normalize=normalize)


def boolean_generator(X, kind, arities, Z=None, cache=True, normalize=False):
    return BooleanGenerator(X, kind, arities, Z=Z, cache=cache, normalize=normalize)


def lazy_list(X, specs, Z=None, cache=True, normalize=False):
    """Pick the generator with the best shared cache for ``specs``."""
    specs = list(specs)
    kinds = {s.kind for s in specs}
    if kinds == {"hpk"}:
        return HPKGenerator(X, [s.param for s in specs], Z, cache, normalize)
    if kinds == {"monotone_conjunctive"}:
        return BooleanGenerator(X, "conjunctive", [s.param for s in specs], Z, cache, normalize)
    if kinds == {"monotone_disjunctive"}:
        return BooleanGenerator(X, "disjunctive", [s.param for s in specs], Z, cache, normalize)
    return SpecGenerator(X, specs, Z, cache, normalize)


def materialize(KL):
    """Compute every kernel of ``KL`` and keep them all in memory."""
    if isinstance(KL, MaterializedKernelList):
        return KL
    mats = [KL[r] for r in range(len(KL))]
    if isinstance(KL, LazyKernelList):
        KL.release()
    return MaterializedKernelList(mats, specs=getattr(KL, "specs", None))
