"""Combinatorial sparsity models.

A sparsity model over ``p`` coordinates is generated by a family of index sets
(the *generators*); a support is admissible when it is a subset of some
generator. Three generator families are supported:

``PlainK``
    every set of exactly ``k`` coordinates.
``DisjointGroups``
    unions of ``g`` cells of a fixed partition of ``[0, p)``.
``ExplicitFamily``
    an explicit list of index sets, kept in canonical (maximal-only) form.

Supports are plain sorted tuples of ints, so Python's tuple ordering is the
lexicographic order used for every tie-break in the package.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import InitVar, dataclass, field
from typing import Iterator, Sequence

import numpy as np

Support = tuple  # sorted, duplicate-free tuple of ints


class EnumerationBudgetExceeded(ValueError):
    """Raised when a model has more generators than an enumeration cap allows."""

    def __init__(self, count, cap, hint=""):
        self.count = count
        self.cap = cap
        msg = f"enumeration budget exceeded: {count} generator sets > cap {cap}"
        super().__init__(f"{msg}; {hint}" if hint else msg)


def make_support(indices, p=None) -> Support:
    """Validate ``indices`` and return them as a sorted duplicate-free tuple."""
    idx = sorted({int(i) for i in indices})
    if idx and idx[0] < 0:
        raise ValueError(f"negative index {idx[0]} in support")
    if p is not None and idx and idx[-1] >= p:
        raise ValueError(f"index {idx[-1]} out of range for dimension {p}")
    return tuple(idx)


def support_of(vector) -> Support:
    """Indices of the nonzero entries of ``vector``."""
    return tuple(int(i) for i in np.flatnonzero(np.asarray(vector)))


class SparsityModel:
    """Base class. Subclasses are immutable after construction."""

    p: int

    @property
    def order(self) -> int:
        raise NotImplementedError

    def contains(self, s: Sequence[int]) -> bool:
        raise NotImplementedError

    def expand(self, j: int) -> "SparsityModel":
        raise NotImplementedError

    def count_generators(self) -> int:
        raise NotImplementedError

    def iter_generators(self) -> Iterator[Support]:
        """Maximal generator sets in lexicographic order."""
        raise NotImplementedError

    def random_generator(self, rng: np.random.Generator, min_size=0) -> Support:
        raise NotImplementedError

    def _check_support(self, s):
        s = tuple(int(i) for i in s)
        for i in s:
            if not 0 <= i < self.p:
                raise ValueError(f"index {i} out of range for dimension {self.p}")
        return s


@dataclass(frozen=True)
class PlainK(SparsityModel):
    p: int
    k: int

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("ambient dimension must be positive")
        if not 1 <= self.k <= self.p:
            raise ValueError(f"PlainK needs 1 <= k <= p, got k={self.k}, p={self.p}")

    @property
    def order(self):
        return self.k

    def contains(self, s):
        return len(set(self._check_support(s))) <= self.k

    def expand(self, j):
        _check_order(j)
        return PlainK(self.p, min(j * self.k, self.p))

    def count_generators(self):
        return math.comb(self.p, self.k)

    def iter_generators(self):
        return itertools.combinations(range(self.p), self.k)

    def random_generator(self, rng, min_size=0):
        if min_size > self.k:
            raise ValueError(f"no generator of size >= {min_size} (k={self.k})")
        return tuple(sorted(int(i) for i in rng.choice(self.p, self.k, replace=False)))


@dataclass(frozen=True)
class DisjointGroups(SparsityModel):
    """Unions of ``g`` cells of a partition of ``[0, p)``.

    Cells are stored sorted by their smallest index; "cell index" elsewhere in
    the package refers to that order.
    """

    p: int
    cells: tuple
    g: int
    _indptr: np.ndarray = field(init=False, repr=False, compare=False)
    _indices: np.ndarray = field(init=False, repr=False, compare=False)
    _cell_of: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("ambient dimension must be positive")
        cells = [make_support(c, self.p) for c in self.cells]
        if any(len(c) == 0 for c in cells):
            raise ValueError("partition cells must be nonempty")
        cells.sort()
        flat = [i for c in cells for i in c]
        if len(flat) != len(set(flat)):
            raise ValueError("partition cells overlap")
        if sorted(flat) != list(range(self.p)):
            raise ValueError(f"partition cells do not cover [0, {self.p})")
        if not 1 <= self.g <= len(cells):
            raise ValueError(
                f"g_active must be in [1, {len(cells)}], got {self.g}"
            )
        object.__setattr__(self, "cells", tuple(cells))
        indptr = np.zeros(len(cells) + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(c) for c in cells])
        cell_of = np.empty(self.p, dtype=np.int64)
        for ci, c in enumerate(cells):
            cell_of[list(c)] = ci
        object.__setattr__(self, "_indptr", indptr)
        object.__setattr__(self, "_indices", np.asarray(flat, dtype=np.int64))
        object.__setattr__(self, "_cell_of", cell_of)

    @property
    def order(self):
        return sum(sorted((len(c) for c in self.cells), reverse=True)[: self.g])

    def contains(self, s):
        s = self._check_support(s)
        return len({int(self._cell_of[i]) for i in s}) <= self.g

    def expand(self, j):
        _check_order(j)
        return DisjointGroups(self.p, self.cells, min(j * self.g, len(self.cells)))

    def count_generators(self):
        return math.comb(len(self.cells), self.g)

    def union(self, cell_ids) -> Support:
        return tuple(sorted(i for ci in cell_ids for i in self.cells[ci]))

    def iter_generators(self):
        gens = [
            self.union(combo)
            for combo in itertools.combinations(range(len(self.cells)), self.g)
        ]
        gens.sort()
        return iter(gens)

    def random_generator(self, rng, min_size=0):
        if min_size > self.order:
            raise ValueError(f"no generator of size >= {min_size}")
        for _ in range(1000):
            ids = rng.choice(len(self.cells), self.g, replace=False)
            s = self.union(int(i) for i in ids)
            if len(s) >= min_size:
                return s
        # fall back to the largest cells
        ids = sorted(range(len(self.cells)), key=lambda c: -len(self.cells[c]))
        return self.union(ids[: self.g])


@dataclass(frozen=True)
class ExplicitFamily(SparsityModel):
    """Explicit generator list in canonical form (no set contains another).

    Construct through :func:`canonicalize_family` to drop subsumed sets; the
    constructor itself rejects non-canonical input.
    """

    p: int
    supports: tuple
    check_canonical: InitVar[bool] = True
    _indptr: np.ndarray = field(init=False, repr=False, compare=False)
    _indices: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self, check_canonical):
        if self.p < 1:
            raise ValueError("ambient dimension must be positive")
        sups = [make_support(s, self.p) for s in self.supports]
        if not sups:
            raise ValueError("empty generator family")
        if any(len(s) == 0 for s in sups):
            raise ValueError("generator sets must be nonempty")
        sups.sort()
        sets = [frozenset(s) for s in sups]
        pairs = itertools.permutations(range(len(sets)), 2) if check_canonical else ()
        for a, b in pairs:
            if len(sets[a]) <= len(sets[b]) and sets[a] <= sets[b]:
                raise ValueError(
                    f"generator {sups[a]} is contained in {sups[b]}; "
                    "use canonicalize_family"
                )
        object.__setattr__(self, "supports", tuple(sups))
        indptr = np.zeros(len(sups) + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(s) for s in sups])
        object.__setattr__(self, "_indptr", indptr)
        object.__setattr__(
            self, "_indices", np.asarray([i for s in sups for i in s], dtype=np.int64)
        )

    @property
    def order(self):
        return max(len(s) for s in self.supports)

    def contains(self, s):
        s = frozenset(self._check_support(s))
        return any(s <= frozenset(g) for g in self.supports)

    def expand(self, j):
        _check_order(j)
        if j == 1:
            return self
        unions = [
            frozenset().union(*combo)
            for combo in itertools.combinations_with_replacement(self.supports, j)
        ]
        return canonicalize_family(unions, self.p)

    def count_generators(self):
        return len(self.supports)

    def iter_generators(self):
        return iter(self.supports)

    def random_generator(self, rng, min_size=0):
        pool = [s for s in self.supports if len(s) >= min_size]
        if not pool:
            raise ValueError(f"no generator of size >= {min_size}")
        return pool[int(rng.integers(len(pool)))]


def _check_order(j):
    if j not in (1, 2, 3):
        raise ValueError(f"expansion order must be 1, 2 or 3, got {j}")


def canonicalize_family(supports, p) -> ExplicitFamily:
    """Drop every generator contained in another; sort lexicographically.

    Duplicates collapse to a single set.
    """
    if len(supports) == 0:
        raise ValueError("empty generator family")
    sets = {frozenset(make_support(s, p)) for s in supports}
    if frozenset() in sets:
        raise ValueError("generator sets must be nonempty")
    # larger sets first so each candidate only needs checking against keepers
    ordered = sorted(sets, key=lambda s: (-len(s), sorted(s)))
    kept = []
    for s in ordered:
        if not any(s <= t for t in kept):
            kept.append(s)
    return ExplicitFamily(p, tuple(tuple(sorted(s)) for s in kept), check_canonical=False)


def model_contains(model: SparsityModel, s) -> bool:
    """True iff ``s`` is a subset of some generator (the empty set always is)."""
    return model.contains(s)


def model_expand(model: SparsityModel, j: int) -> SparsityModel:
    """Model generated by all ``j``-fold unions of the generators."""
    return model.expand(j)


def enumerate_supports(model: SparsityModel, cap: int) -> list:
    """All maximal generator sets in lexicographic order.

    Raises
    ------
    EnumerationBudgetExceeded
        If the model has more than ``cap`` generators; ``.count`` carries the
        exact number.
    """
    count = model.count_generators()
    if count > cap:
        raise EnumerationBudgetExceeded(count, cap)
    return list(model.iter_generators())
