"""Finite set-covering machinery.

Coverings here are plain unions of finite sets; essential elements are
the algebraic kind (an index is essential when some point is covered by
that index alone).  In a discrete space this coincides with the
topological notion, which is why the solver can use it directly.

All iteration follows the declared index and universe order, so reports
and witnesses are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Dict, Iterable, Mapping, Optional, Tuple

from .errors import LimitExceeded, NotACoverError, ValidationError

#: Exhaustive subset search is only promised at desk scale.
EXACT_LIMIT = 20


@dataclass(frozen=True)
class CoverFamily:
    """A universe of points and an indexed family of subsets of it.

    Sets are intersected with the universe at construction; indices keep
    the order of ``index_pool`` and points keep the order of ``universe``.
    """

    universe: Tuple[str, ...]
    sets: Dict[str, frozenset]
    index_pool: Tuple[str, ...]

    @classmethod
    def build(cls, universe: Iterable, sets: Mapping,
              index_pool: Optional[Iterable] = None) -> "CoverFamily":
        uni = tuple(dict.fromkeys(universe))
        pool = tuple(index_pool) if index_pool is not None else tuple(sets)
        if len(set(pool)) != len(pool):
            raise ValidationError("duplicate indices in the pool")
        missing = [z for z in pool if z not in sets]
        if missing:
            raise ValidationError(f"pool indices without sets: {missing[:4]}")
        uset = set(uni)
        clipped = {z: frozenset(sets[z]) & uset for z in pool}
        return cls(uni, clipped, pool)

    def union(self, indices: Iterable[str]) -> frozenset:
        out: set = set()
        for z in indices:
            out |= self.sets[z]
        return frozenset(out)

    def covers(self, indices: Iterable[str]) -> bool:
        return self.union(indices) >= set(self.universe)


@dataclass(frozen=True)
class CoverReport:
    """Outcome of a covering test.

    ``essential`` lists the indices whose removal breaks the covering;
    each comes with a privately covered witness point.  The covering is
    minimal exactly when it covers and every index is essential.
    """

    is_cover: bool
    uncovered: Tuple[str, ...]
    essential: Tuple[str, ...]
    privately_covered: Dict[str, str]
    is_minimal: bool


def check_cover(family: CoverFamily) -> CoverReport:
    counts: Dict[str, int] = {w: 0 for w in family.universe}
    for z in family.index_pool:
        for w in family.sets[z]:
            counts[w] += 1
    uncovered = tuple(w for w in family.universe if counts[w] == 0)
    pos = {w: k for k, w in enumerate(family.universe)}
    essential = []
    witnesses: Dict[str, str] = {}
    for z in family.index_pool:
        private = [w for w in family.sets[z] if counts[w] == 1]
        if private:
            essential.append(z)
            witnesses[z] = min(private, key=pos.__getitem__)
    is_cover = not uncovered
    is_minimal = is_cover and len(essential) == len(family.index_pool)
    return CoverReport(
        is_cover=is_cover,
        uncovered=uncovered,
        essential=tuple(essential),
        privately_covered=witnesses,
        is_minimal=is_minimal,
    )


def irredundant_subcover(family: CoverFamily) -> Tuple[str, ...]:
    """Greedy removal in index order, leaving a subcover in which every
    index is essential.  Deterministic given the declared order."""
    if not check_cover(family).is_cover:
        raise NotACoverError("family does not cover the universe")
    kept = list(family.index_pool)
    counts: Dict[str, int] = {w: 0 for w in family.universe}
    for z in kept:
        for w in family.sets[z]:
            counts[w] += 1
    result = []
    for z in family.index_pool:
        removable = all(counts[w] > 1 for w in family.sets[z])
        if removable:
            for w in family.sets[z]:
                counts[w] -= 1
        else:
            result.append(z)
    return tuple(result)


def smallest_subcover(family: CoverFamily, limit: int = EXACT_LIMIT) -> Tuple[str, ...]:
    """Exact minimum-cardinality subcover by exhaustive search in size
    order, ties broken lexicographically by index order.  Set cover is
    NP-hard, so instances beyond ``limit`` indices are refused."""
    if len(family.index_pool) > limit:
        raise LimitExceeded(
            f"{len(family.index_pool)} sets exceed the exact-search limit {limit}"
        )
    if not check_cover(family).is_cover:
        raise NotACoverError("family does not cover the universe")
    for k in range(len(family.index_pool) + 1):
        for combo in combinations(family.index_pool, k):
            if family.covers(combo):
                return combo
    raise NotACoverError("unreachable: full pool fails to cover")  # pragma: no cover
