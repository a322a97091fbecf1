"""Finite kernels over X x Y with explicit support tracking.

A kernel assigns every index pair a scalar slice; the support set S is
exactly the set of pairs whose slice is not the constant -inf.  Validity
means: every row and every column meets the support (so the transforms
never take an empty supremum), slices on the support are bijective, and
slices off the support are Off.

Max-plus style kernels derived from a coupling table bbar(x, y) get a
dense or lazy float backing so the transforms can run vectorised; the
slice view (affine with unit slope) is materialised on demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import ValidationError
from .extreal import as_extreal
from .scalar import Affine, Off, ScalarConnection, conn_from_dict, make_affine

#: Above this many entries a coupling-table kernel computes rows/columns
#: on demand instead of storing the dense matrix.
DENSE_LIMIT = 10**6

#: Hard cap on grid sizes (per GridSpec, all dimensions multiplied).
MAX_GRID_POINTS = 10**7


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid, one (min, max, step) triple per dimension."""

    dims: Tuple[Tuple[float, float, float], ...]

    def __post_init__(self):
        dims = tuple((float(a), float(b), float(s)) for a, b, s in self.dims)
        object.__setattr__(self, "dims", dims)
        if not dims:
            raise ValidationError("grid needs at least one dimension")
        total = 1
        for a, b, s in dims:
            if not (s > 0 and math.isfinite(s)):
                raise ValidationError("grid step must be positive and finite")
            if not b > a:
                raise ValidationError("grid needs max > min")
            total *= _axis_count(a, b, s)
        if total > MAX_GRID_POINTS:
            raise ValidationError(f"grid has {total} points, over the cap")

    @classmethod
    def line(cls, lo: float, hi: float, step: float) -> "GridSpec":
        return cls(((lo, hi, step),))

    @property
    def ndim(self) -> int:
        return len(self.dims)

    def axis(self, k: int = 0) -> np.ndarray:
        a, b, s = self.dims[k]
        n = _axis_count(a, b, s)
        pts = a + s * np.arange(n)
        pts.flags.writeable = False
        return pts

    def points(self) -> np.ndarray:
        """All grid points: shape (n,) in 1-D, (n, d) otherwise."""
        axes = [self.axis(k) for k in range(self.ndim)]
        if self.ndim == 1:
            return axes[0]
        mesh = np.meshgrid(*axes, indexing="ij")
        out = np.stack([m.ravel() for m in mesh], axis=1)
        out.flags.writeable = False
        return out

    def labels(self) -> Tuple[str, ...]:
        pts = self.points()
        if self.ndim == 1:
            return tuple(format(v, ".12g") for v in pts)
        return tuple(
            "(" + ",".join(format(c, ".12g") for c in row) + ")" for row in pts
        )

    def size(self) -> int:
        n = 1
        for a, b, s in self.dims:
            n *= _axis_count(a, b, s)
        return n

    def to_dict(self) -> dict:
        if self.ndim == 1:
            a, b, s = self.dims[0]
            return {"min": a, "max": b, "step": s}
        return {"dims": [list(d) for d in self.dims]}

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        if "dims" in d:
            return cls(tuple(tuple(x) for x in d["dims"]))
        return cls.line(d["min"], d["max"], d["step"])


def _axis_count(a: float, b: float, s: float) -> int:
    return int(math.floor((b - a) / s + 1e-9)) + 1


# kernel families for coupling-table grids


@dataclass(frozen=True)
class FenchelDot:
    """bbar(x, y) = <x, y>, the pairing of the classical conjugate."""


@dataclass(frozen=True)
class Quadratic:
    """bbar(x, y) = <x, y> - (a/2)|y|^2."""

    a: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a != 0):
            raise ValidationError("quadratic coefficient must be finite and nonzero")


@dataclass(frozen=True)
class OmegaLipschitz:
    """bbar(x, y) = -omega(y - x) with omega(u) = a*|u|^q.

    omega must be symmetric, subadditive and nonnegative; a*|.|^q has
    those properties exactly when a > 0 and 0 < q <= 1.  On a grid,
    subadditivity is only exercised at grid differences; construction
    additionally spot-checks it on sampled triples.
    """

    a: float = 1.0
    q: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0):
            raise ValidationError("omega scale must satisfy a > 0")
        if not (0 < self.q <= 1):
            raise ValidationError("omega exponent must satisfy 0 < q <= 1")

    def omega(self, u):
        return self.a * np.abs(u) ** self.q


@dataclass(frozen=True)
class WeightedPower:
    """bbar((x', x''), y) = -x''*|y - x'|^p over X = E x (0, inf)."""

    p: float

    def __post_init__(self):
        if not (math.isfinite(self.p) and self.p > 0):
            raise ValidationError("power exponent must be positive")


class Kernel:
    """Immutable kernel table; construct through the ``build_*`` helpers."""

    def __init__(
        self,
        x_labels: Sequence[str],
        y_labels: Sequence[str],
        *,
        entries: Optional[Sequence[Sequence[ScalarConnection]]] = None,
        bbar: Optional[np.ndarray] = None,
        row_fn: Optional[Callable[[int], np.ndarray]] = None,
        col_fn: Optional[Callable[[int], np.ndarray]] = None,
        is_grid: bool = False,
        check: bool = True,
    ):
        self.x_labels = tuple(str(l) for l in x_labels)
        self.y_labels = tuple(str(l) for l in y_labels)
        if not self.x_labels or not self.y_labels:
            raise ValidationError("index sets must be nonempty")
        if len(set(self.x_labels)) != len(self.x_labels):
            raise ValidationError("duplicate x labels")
        if len(set(self.y_labels)) != len(self.y_labels):
            raise ValidationError("duplicate y labels")
        self._xi = {l: i for i, l in enumerate(self.x_labels)}
        self._yi = {l: j for j, l in enumerate(self.y_labels)}
        self.is_grid = is_grid

        self._entries = None
        self._bbar = None
        self._row_fn = row_fn
        self._col_fn = col_fn

        nx, ny = len(self.x_labels), len(self.y_labels)
        if entries is not None:
            rows = [tuple(r) for r in entries]
            if len(rows) != nx or any(len(r) != ny for r in rows):
                raise ValidationError("entry table shape does not match labels")
            for r in rows:
                for e in r:
                    if not isinstance(e, ScalarConnection):
                        raise ValidationError(f"not a scalar form: {e!r}")
            self._entries = tuple(rows)
            self._support_rows = tuple(
                tuple(j for j, e in enumerate(r) if not isinstance(e, Off))
                for r in rows
            )
            self._support_cols = tuple(
                tuple(i for i in range(nx) if not isinstance(rows[i][j], Off))
                for j in range(ny)
            )
        elif bbar is not None:
            arr = np.asarray(bbar, dtype=float)
            if arr.shape != (nx, ny):
                raise ValidationError("coupling table shape does not match labels")
            if np.isposinf(arr).any():
                raise ValidationError("coupling entries must lie in R u {-inf}")
            if np.isnan(arr).any():
                raise ValidationError("coupling entries may not be NaN")
            arr = arr.copy()
            arr.flags.writeable = False
            self._bbar = arr
        elif row_fn is None or col_fn is None:
            raise ValidationError("kernel needs entries, a coupling table, or row/col functions")

        if check:
            self._check_support()

    # ------------------------------------------------------------------
    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.x_labels), len(self.y_labels)

    @property
    def is_moreau(self) -> bool:
        """True when the kernel is backed by a coupling table bbar."""
        return self._entries is None

    def x_index(self, label: str) -> int:
        try:
            return self._xi[label]
        except KeyError:
            raise ValidationError(f"unknown x label: {label!r}") from None

    def y_index(self, label: str) -> int:
        try:
            return self._yi[label]
        except KeyError:
            raise ValidationError(f"unknown y label: {label!r}") from None

    # ------------------------------------------------------------------
    def bbar_row(self, i: int) -> np.ndarray:
        if self._bbar is not None:
            return self._bbar[i]
        if self._row_fn is not None:
            return self._row_fn(i)
        raise ValidationError("kernel has no coupling-table backing")

    def bbar_col(self, j: int) -> np.ndarray:
        if self._bbar is not None:
            return self._bbar[:, j]
        if self._col_fn is not None:
            return self._col_fn(j)
        raise ValidationError("kernel has no coupling-table backing")

    def entry(self, i: int, j: int) -> ScalarConnection:
        """Slice at (x_i, y_j): lam -> b(x_i, y_j, lam)."""
        if self._entries is not None:
            return self._entries[i][j]
        return make_affine(float(self.bbar_row(i)[j]), 1.0)

    def adjoint_entry(self, j: int, i: int) -> ScalarConnection:
        """Adjoint slice at (y_j, x_i): the inverse of ``entry(i, j)``."""
        return self.entry(i, j).adjoint()

    def support_row(self, i: int) -> Tuple[int, ...]:
        if self._entries is not None:
            return self._support_rows[i]
        row = self.bbar_row(i)
        return tuple(np.nonzero(np.isfinite(row))[0])

    def support_col(self, j: int) -> Tuple[int, ...]:
        if self._entries is not None:
            return self._support_cols[j]
        col = self.bbar_col(j)
        return tuple(np.nonzero(np.isfinite(col))[0])

    def support(self) -> frozenset:
        """The support as label pairs.  Dense scan; desk-scale only."""
        out = []
        for i, xl in enumerate(self.x_labels):
            for j in self.support_row(i):
                out.append((xl, self.y_labels[j]))
        return frozenset(out)

    # ------------------------------------------------------------------
    def _check_support(self):
        if self._row_fn is not None and self._bbar is None and self._entries is None:
            # lazy family kernels are finite-valued by construction
            return
        nx, ny = self.shape
        for i in range(nx):
            if not self.support_row(i):
                raise ValidationError(
                    f"A1 violated: row {self.x_labels[i]!r} has empty support"
                )
        for j in range(ny):
            if not self.support_col(j):
                raise ValidationError(
                    f"A2 violated: column {self.y_labels[j]!r} has empty support"
                )
        if self._entries is not None:
            for i, row in enumerate(self._entries):
                for j, e in enumerate(row):
                    if not isinstance(e, Off) and not e.bijective:
                        raise ValidationError(
                            f"A3 violated: entry ({self.x_labels[i]}, "
                            f"{self.y_labels[j]}) is not a bijection"
                        )

    # ------------------------------------------------------------------
    def restrict(self, y_subset: Iterable[str]) -> "Kernel":
        """Kernel on X x Y', keeping the original column order.

        Semantically this forces f(y) = +inf off the subset.  Raises
        when a row loses all of its support (A1 would break).
        """
        wanted = set(y_subset)
        unknown = wanted - set(self.y_labels)
        if unknown:
            raise ValidationError(f"unknown y labels: {sorted(unknown)}")
        keep = [j for j, l in enumerate(self.y_labels) if l in wanted]
        if not keep:
            raise ValidationError("restriction to an empty column set")
        new_y = tuple(self.y_labels[j] for j in keep)
        if self._entries is not None:
            sub = [[row[j] for j in keep] for row in self._entries]
            return Kernel(self.x_labels, new_y, entries=sub, is_grid=self.is_grid)
        if self._bbar is not None:
            return Kernel(self.x_labels, new_y, bbar=self._bbar[:, keep],
                          is_grid=self.is_grid)
        keep_arr = np.asarray(keep)
        row_fn, col_fn = self._row_fn, self._col_fn
        new = Kernel(
            self.x_labels, new_y,
            row_fn=lambda i: row_fn(i)[keep_arr],
            col_fn=lambda jj: col_fn(int(keep_arr[jj])),
            is_grid=self.is_grid, check=False,
        )
        for i in range(len(self.x_labels)):
            if not new.support_row(i):
                raise ValidationError(
                    f"A1 violated after restriction: row {self.x_labels[i]!r}"
                )
        return new


# ----------------------------------------------------------------------
# builders


def _default_labels(prefix: str, n: int) -> Tuple[str, ...]:
    return tuple(f"{prefix}{k + 1}" for k in range(n))


def build_moreau(bbar, x_labels=None, y_labels=None) -> Kernel:
    """Kernel of the conjugacy Bf(x) = sup_y (bbar(x,y) - f(y)).

    Entries may be numbers or ``"-inf"``; a value of +inf is rejected.
    Finite entries become unit-slope affine slices, -inf entries are Off.
    """
    rows = [[float(as_extreal(_accept_neg_inf(v))) for v in row] for row in bbar]
    if not rows or not rows[0]:
        raise ValidationError("coupling table must be nonempty")
    nx, ny = len(rows), len(rows[0])
    if any(len(r) != ny for r in rows):
        raise ValidationError("coupling table must be rectangular")
    arr = np.array(rows, dtype=float)
    if np.isposinf(arr).any():
        raise ValidationError("coupling entries must lie in R u {-inf}")
    return Kernel(
        x_labels or _default_labels("x", nx),
        y_labels or _default_labels("y", ny),
        bbar=arr,
    )


def _accept_neg_inf(v):
    if v == "-inf":
        return -math.inf
    return v


def build_table(entries, x_labels=None, y_labels=None) -> Kernel:
    """Kernel from an explicit table of scalar forms (or their JSON dicts)."""
    rows = []
    for row in entries:
        rows.append([
            e if isinstance(e, ScalarConnection) else conn_from_dict(e)
            for e in row
        ])
    if not rows or not rows[0]:
        raise ValidationError("entry table must be nonempty")
    nx, ny = len(rows), len(rows[0])
    return Kernel(
        x_labels or _default_labels("x", nx),
        y_labels or _default_labels("y", ny),
        entries=rows,
    )


def build_grid_kernel(family, x_grid: GridSpec, y_grid: GridSpec) -> Kernel:
    """Coupling-table kernel for one of the parametric families.

    Below :data:`DENSE_LIMIT` entries the table is materialised densely;
    above it rows and columns are computed on demand.
    """
    if isinstance(family, WeightedPower):
        if x_grid.ndim != 2:
            raise ValidationError(
                "weighted-power kernels need a 2-D x grid: (x', x'') pairs"
            )
        if y_grid.ndim != 1:
            raise ValidationError("weighted-power kernels use a 1-D y grid")
        xsec_min, _, xsec_step = x_grid.dims[1]
        if xsec_min < xsec_step:
            raise ValidationError("x'' axis must start at or above its step (> 0)")
    elif x_grid.ndim != y_grid.ndim:
        raise ValidationError("x and y grids must share a dimension")

    xp = x_grid.points()
    yp = y_grid.points()
    row = _family_row_fn(family, xp, yp)
    col = _family_col_fn(family, xp, yp)
    nx, ny = x_grid.size(), y_grid.size()

    if isinstance(family, OmegaLipschitz):
        _spot_check_subadditive(family, yp)

    if nx * ny <= DENSE_LIMIT:
        dense = np.vstack([row(i) for i in range(nx)])
        return Kernel(x_grid.labels(), y_grid.labels(), bbar=dense, is_grid=True)
    return Kernel(x_grid.labels(), y_grid.labels(), row_fn=row, col_fn=col,
                  is_grid=True)


def _family_row_fn(family, xp, yp):
    if isinstance(family, FenchelDot):
        if xp.ndim == 1:
            return lambda i: xp[i] * yp
        return lambda i: yp @ xp[i]
    if isinstance(family, Quadratic):
        half = 0.5 * family.a
        if xp.ndim == 1:
            q = half * yp * yp
            return lambda i: xp[i] * yp - q
        q = half * np.sum(yp * yp, axis=1)
        return lambda i: yp @ xp[i] - q
    if isinstance(family, OmegaLipschitz):
        if xp.ndim == 1:
            return lambda i: -family.omega(yp - xp[i])
        return lambda i: -family.omega(
            np.sqrt(np.sum((yp - xp[i]) ** 2, axis=1))
        )
    if isinstance(family, WeightedPower):
        p = family.p
        return lambda i: -xp[i, 1] * np.abs(yp - xp[i, 0]) ** p
    raise ValidationError(f"unknown kernel family: {family!r}")


def _family_col_fn(family, xp, yp):
    if isinstance(family, FenchelDot):
        if xp.ndim == 1:
            return lambda j: xp * yp[j]
        return lambda j: xp @ yp[j]
    if isinstance(family, Quadratic):
        half = 0.5 * family.a
        if xp.ndim == 1:
            return lambda j: xp * yp[j] - half * yp[j] * yp[j]
        return lambda j: xp @ yp[j] - half * float(yp[j] @ yp[j])
    if isinstance(family, OmegaLipschitz):
        if xp.ndim == 1:
            return lambda j: -family.omega(yp[j] - xp)
        return lambda j: -family.omega(
            np.sqrt(np.sum((yp[j] - xp) ** 2, axis=1))
        )
    if isinstance(family, WeightedPower):
        p = family.p
        return lambda j: -xp[:, 1] * np.abs(yp[j] - xp[:, 0]) ** p
    raise ValidationError(f"unknown kernel family: {family!r}")


def _spot_check_subadditive(family: OmegaLipschitz, yp: np.ndarray, samples=128):
    """Sampled triple check of omega(u+v) <= omega(u) + omega(v).

    A full check over a continuum is impossible on a grid; this guards
    against future family edits breaking the contract.
    """
    rng = np.random.default_rng(7)
    flat = yp.ravel()
    u = rng.choice(flat, samples)
    v = rng.choice(flat, samples)
    lhs = family.omega(u + v)
    rhs = family.omega(u) + family.omega(v)
    bad = lhs > rhs + 1e-9
    if bad.any():
        k = int(np.argmax(bad))
        raise ValidationError(
            f"omega is not subadditive at u={u[k]}, v={v[k]}"
        )
