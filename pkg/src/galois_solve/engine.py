"""Core transforms of a kernel: the forward map, its adjoint, the
projector, subdifferentials and their inverse maps, and domain taxonomy.

All operations are pure functions of immutable inputs.  Coupling-table
kernels take a vectorised path (the inner supremum runs as one numpy
reduction per output block), otherwise a plain double loop over the
support evaluates the scalar slices.  Reductions are order-independent,
so optional data-parallel evaluation across output indices (capped by
the GALOIS_SOLVE_THREADS environment variable) is deterministic.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Optional, Tuple

import numpy as np

from .errors import ValidationError
from .extreal import DEFAULT_TOL, ExtReal, as_extreal
from .kernel import Kernel

_BLOCK = 256


def _thread_count() -> int:
    cap = os.environ.get("GALOIS_SOLVE_THREADS")
    if cap is None:
        return 1
    try:
        return max(1, int(cap))
    except ValueError:
        return 1


@dataclass(frozen=True, eq=False)
class FunctionOnSpace:
    """A function on a finite label set, valued in the extended reals."""

    labels: Tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.shape != (len(self.labels),):
            raise ValidationError("one value per label is required")
        if np.isnan(arr).any():
            raise ValidationError("NaN is not an extended real value")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "_index", {l: k for k, l in enumerate(self.labels)})

    @classmethod
    def from_mapping(cls, labels: Iterable[str], mapping: Mapping) -> "FunctionOnSpace":
        labels = tuple(labels)
        missing = [l for l in labels if l not in mapping]
        if missing:
            raise ValidationError(f"missing values for labels: {missing[:4]}")
        extra = set(mapping) - set(labels)
        if extra:
            raise ValidationError(f"values for unknown labels: {sorted(extra)[:4]}")
        vals = [float(as_extreal(mapping[l])) for l in labels]
        return cls(labels, np.array(vals))

    @classmethod
    def constant(cls, labels: Iterable[str], value) -> "FunctionOnSpace":
        labels = tuple(labels)
        return cls(labels, np.full(len(labels), float(as_extreal(value))))

    @classmethod
    def dirac(cls, labels: Iterable[str], at: str, value) -> "FunctionOnSpace":
        """The function equal to ``value`` at ``at`` and +inf elsewhere."""
        labels = tuple(labels)
        vals = np.full(len(labels), math.inf)
        try:
            vals[labels.index(at)] = float(as_extreal(value))
        except ValueError:
            raise ValidationError(f"unknown label: {at!r}") from None
        return cls(labels, vals)

    def value(self, label: str) -> ExtReal:
        return ExtReal(self.values[self._index[label]])

    def __getitem__(self, label: str) -> ExtReal:
        return self.value(label)

    def as_dict(self) -> Dict[str, ExtReal]:
        return {l: ExtReal(v) for l, v in zip(self.labels, self.values)}

    def with_value(self, label: str, value) -> "FunctionOnSpace":
        vals = self.values.copy()
        vals[self._index[label]] = float(as_extreal(value))
        return FunctionOnSpace(self.labels, vals)

    def pointwise_max(self, other: "FunctionOnSpace") -> "FunctionOnSpace":
        self._require_same_space(other)
        return FunctionOnSpace(self.labels, np.maximum(self.values, other.values))

    def pointwise_min(self, other: "FunctionOnSpace") -> "FunctionOnSpace":
        self._require_same_space(other)
        return FunctionOnSpace(self.labels, np.minimum(self.values, other.values))

    def leq(self, other: "FunctionOnSpace", tol: float = 0.0) -> bool:
        """Pointwise order, with ``tol`` of slack on finite comparisons."""
        self._require_same_space(other)
        return bool(np.all(self.values <= other.values + tol))

    def approx_eq(self, other: "FunctionOnSpace", tol: float = DEFAULT_TOL) -> bool:
        self._require_same_space(other)
        a, b = self.values, other.values
        same = a == b
        both_fin = np.isfinite(a) & np.isfinite(b)
        with np.errstate(invalid="ignore"):
            close = both_fin & (np.abs(np.where(both_fin, a - b, 0.0)) <= tol)
        return bool(np.all(same | close))

    def _require_same_space(self, other: "FunctionOnSpace"):
        if self.labels != other.labels:
            raise ValidationError("functions live on different spaces")

    def __repr__(self):
        inner = ", ".join(f"{l}={ExtReal(v)}" for l, v in zip(self.labels, self.values))
        return f"FunctionOnSpace({inner})"


@dataclass(frozen=True)
class DomainReport:
    """The four domain sets of a function on a finite (discrete) space."""

    ldom: Tuple[str, ...]
    udom: Tuple[str, ...]
    dom: Tuple[str, ...]
    idom: Tuple[str, ...]


@dataclass(frozen=True)
class SubdiffMap:
    """A set-valued map from one side's labels into subsets of the other."""

    source_labels: Tuple[str, ...]
    target_labels: Tuple[str, ...]
    sets: Dict[str, frozenset]

    def get(self, label: str) -> frozenset:
        return self.sets[label]

    def domain(self) -> Tuple[str, ...]:
        """Labels with a nonempty image, in source order."""
        return tuple(l for l in self.source_labels if self.sets[l])

    def invert(self) -> "SubdiffMap":
        out = {t: set() for t in self.target_labels}
        for s in self.source_labels:
            for t in self.sets[s]:
                out[t].add(s)
        return SubdiffMap(
            self.target_labels,
            self.source_labels,
            {t: frozenset(v) for t, v in out.items()},
        )


# ----------------------------------------------------------------------
# the sup-of-slices transforms


def _moreau_block(bbar: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Elementwise bbar(x,y) - lam(y) with -inf absorbing.

    ``bbar`` has one row per output point and never contains +inf;
    ``lam`` may contain either infinity.
    """
    with np.errstate(invalid="ignore"):
        out = bbar - lam
    pos = np.isposinf(lam)
    if pos.any():
        out[:, pos] = -np.inf
    neg = np.isneginf(lam)
    if neg.any():
        out[:, neg] = np.where(np.isneginf(bbar[:, neg]), -np.inf, np.inf)
    return out


def _moreau_sup(kernel: Kernel, lam: np.ndarray, by_rows: bool) -> np.ndarray:
    rows = kernel.bbar_row if by_rows else kernel.bbar_col
    n_out = len(kernel.x_labels) if by_rows else len(kernel.y_labels)

    def run(lo: int, hi: int) -> np.ndarray:
        block = np.vstack([rows(i) for i in range(lo, hi)])
        return _moreau_block(block, lam).max(axis=1)

    threads = _thread_count()
    if threads <= 1 or n_out <= _BLOCK:
        return np.concatenate(
            [run(lo, min(lo + _BLOCK, n_out)) for lo in range(0, n_out, _BLOCK)]
        )
    spans = [(lo, min(lo + _BLOCK, n_out)) for lo in range(0, n_out, _BLOCK)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda s: run(*s), spans))
    return np.concatenate(parts)


def apply_forward(kernel: Kernel, f: FunctionOnSpace) -> FunctionOnSpace:
    """The connection itself: (Bf)(x) = sup_y b(x, y, f(y))."""
    if f.labels != kernel.y_labels:
        raise ValidationError("function labels do not match the kernel's y side")
    if kernel.is_moreau:
        return FunctionOnSpace(kernel.x_labels, _moreau_sup(kernel, f.values, True))
    out = np.empty(len(kernel.x_labels))
    fv = f.values
    for i in range(len(kernel.x_labels)):
        best = -math.inf
        for j in kernel.support_row(i):
            v = kernel.entry(i, j).eval_float(fv[j])
            if v > best:
                best = v
        out[i] = best
    return FunctionOnSpace(kernel.x_labels, out)


def apply_adjoint(kernel: Kernel, g: FunctionOnSpace) -> FunctionOnSpace:
    """The adjoint connection: (B°g)(y) = sup_x b°(y, x, g(x))."""
    if g.labels != kernel.x_labels:
        raise ValidationError("function labels do not match the kernel's x side")
    if kernel.is_moreau:
        return FunctionOnSpace(kernel.y_labels, _moreau_sup(kernel, g.values, False))
    out = np.empty(len(kernel.y_labels))
    gv = g.values
    for j in range(len(kernel.y_labels)):
        best = -math.inf
        for i in kernel.support_col(j):
            v = kernel.adjoint_entry(j, i).eval_float(gv[i])
            if v > best:
                best = v
        out[j] = best
    return FunctionOnSpace(kernel.y_labels, out)


def projector(kernel: Kernel, g: FunctionOnSpace) -> FunctionOnSpace:
    """The composition of the two transforms: the largest element of the
    forward image below g.  Always <= g pointwise."""
    return apply_forward(kernel, apply_adjoint(kernel, g))


# ----------------------------------------------------------------------
# argmax machinery


def _members(vals: np.ndarray, support: np.ndarray, tol: float) -> np.ndarray:
    """Indices in ``support`` attaining the supremum of ``vals`` there,
    within an absolute tie tolerance on finite suprema.

    A supremum of -inf is attained by the whole support; +inf only by
    the entries that are exactly +inf.
    """
    sv = vals[support]
    m = sv.max()
    if m == -math.inf:
        return support
    if m == math.inf:
        return support[sv == math.inf]
    return support[sv >= m - tol]


def subdiff_inverse(kernel: Kernel, g: FunctionOnSpace,
                    tol: float = DEFAULT_TOL) -> SubdiffMap:
    """For each y, the set of x in the column support attaining
    sup_x b°(y, x, g(x)); these are the covering sets of the existence
    criterion.  All near-maximisers within ``tol`` are included."""
    if g.labels != kernel.x_labels:
        raise ValidationError("function labels do not match the kernel's x side")
    gv = g.values
    sets = {}
    for j, yl in enumerate(kernel.y_labels):
        support = np.asarray(kernel.support_col(j), dtype=int)
        if kernel.is_moreau:
            col = kernel.bbar_col(j).reshape(1, -1)
            vals = _moreau_block(col, gv)[0]
        else:
            vals = np.full(len(kernel.x_labels), -math.inf)
            for i in support:
                vals[i] = kernel.adjoint_entry(j, int(i)).eval_float(gv[i])
        idx = _members(vals, support, tol)
        sets[yl] = frozenset(kernel.x_labels[int(i)] for i in idx)
    return SubdiffMap(kernel.y_labels, kernel.x_labels, sets)


def subdiff(kernel: Kernel, f: FunctionOnSpace,
            tol: float = DEFAULT_TOL) -> SubdiffMap:
    """For each y, the set of x in the support where the supremum
    defining the forward transform is attained at y."""
    if f.labels != kernel.y_labels:
        raise ValidationError("function labels do not match the kernel's y side")
    bf = apply_forward(kernel, f).values
    fv = f.values
    sets = {}
    for j, yl in enumerate(kernel.y_labels):
        support = np.asarray(kernel.support_col(j), dtype=int)
        if kernel.is_moreau:
            col = kernel.bbar_col(j)
            vals = _eval_moreau_col(col, fv[j])
        else:
            vals = np.full(len(kernel.x_labels), -math.inf)
            for i in support:
                vals[i] = kernel.entry(int(i), j).eval_float(fv[j])
        members = [
            int(i) for i in support if _matches(vals[int(i)], bf[int(i)], tol)
        ]
        sets[yl] = frozenset(kernel.x_labels[i] for i in members)
    return SubdiffMap(kernel.y_labels, kernel.x_labels, sets)


def _eval_moreau_col(col: np.ndarray, lam: float) -> np.ndarray:
    if lam == math.inf:
        return np.full(col.shape, -math.inf)
    if lam == -math.inf:
        return np.where(np.isneginf(col), -math.inf, math.inf)
    return col - lam


def _matches(val: float, target: float, tol: float) -> bool:
    if val == target:
        return True
    if math.isinf(val) or math.isinf(target):
        return False
    return abs(val - target) <= tol


def domain_report(h: FunctionOnSpace) -> DomainReport:
    """Lower/upper/two-sided domains.  On a discrete space the inner
    domain coincides with the domain, so idom is reported as dom."""
    ldom = tuple(l for l, v in zip(h.labels, h.values) if v < math.inf)
    udom = tuple(l for l, v in zip(h.labels, h.values) if v > -math.inf)
    both = set(ldom) & set(udom)
    dom = tuple(l for l in h.labels if l in both)
    return DomainReport(ldom=ldom, udom=udom, dom=dom, idom=dom)


def compactness_conditions_hold(kernel: Kernel) -> bool:
    """Whether the compactness side conditions of the existence theory hold.

    For the finite index sets this engine works with they are vacuous
    (finite sets are compact, every function has relatively compact
    sublevel sets), so this is identically True.  It exists so callers
    can document the hypothesis they rely on.
    """
    return True
