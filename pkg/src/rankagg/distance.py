"""Weighted Kendall, Cayley and generator-set distances between rankings.

Two routes are provided for the weighted Kendall distance: a closed form
for decreasing weight functions, and an exact shortest-path oracle over the
Cayley graph of S_n that accepts arbitrary nonnegative weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from rankagg.errors import OracleCapExceeded, UnreachableError, ValidationError
from rankagg.perm import (
    AdjacentTransposition,
    Permutation,
    _check_same_n,
    compose,
    cycle_count,
    disagreement_profile,
    identity,
    inverse,
    kendall_tau,
)

DEFAULT_CAP = 8
TOL = 1e-9


@dataclass(frozen=True)
class AdjacentWeightFunction:
    """Nonnegative weights on the n-1 adjacent transpositions.

    ``weights[a-1]`` is the cost of swapping ranks ``a`` and ``a+1``.
    """

    weights: tuple[float, ...]

    def __init__(self, weights: Iterable[float]):
        weights = tuple(float(w) for w in weights)
        if any(not np.isfinite(w) or w < 0 for w in weights):
            raise ValidationError(f"adjacent weights must be finite and nonnegative, got {weights}")
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, n: int, value: float = 1.0) -> "AdjacentWeightFunction":
        return cls([value] * (n - 1))

    @property
    def n(self) -> int:
        return len(self.weights) + 1

    def __getitem__(self, a: int) -> float:
        return self.weights[a - 1]

    def is_decreasing(self) -> bool:
        return all(x >= y for x, y in zip(self.weights, self.weights[1:]))

    def is_increasing(self) -> bool:
        return all(x <= y for x, y in zip(self.weights, self.weights[1:]))


class TranspositionWeightTable:
    """Symmetric nonnegative weights over all transpositions ``(a b)`` of ranks."""

    def __init__(self, n: int, entries: Mapping[tuple[int, int], float]):
        if n < 2:
            raise ValidationError("transposition table needs n >= 2")
        table = np.full((n, n), np.nan)
        for (a, b), w in entries.items():
            if not (1 <= a <= n and 1 <= b <= n) or a == b:
                raise ValidationError(f"invalid transposition ({a} {b}) for n={n}")
            w = float(w)
            if not np.isfinite(w) or w < 0:
                raise ValidationError(f"weight for ({a} {b}) must be nonnegative, got {w}")
            for i, j in ((a, b), (b, a)):
                prev = table[i - 1, j - 1]
                if not np.isnan(prev) and prev != w:
                    raise ValidationError(f"asymmetric weights given for ({a} {b})")
                table[i - 1, j - 1] = w
        self.n = n
        self._table = table

    @classmethod
    def uniform(cls, n: int, value: float = 1.0) -> "TranspositionWeightTable":
        return cls(n, {(a, b): value for a, b in combinations(range(1, n + 1), 2)})

    def weight(self, a: int, b: int) -> float:
        w = self._table[a - 1, b - 1]
        if np.isnan(w):
            raise KeyError((a, b))
        return float(w)

    def pairs(self) -> list[tuple[int, int, float]]:
        """Defined ``(a, b, weight)`` entries with ``a < b``."""
        return [
            (a, b, float(self._table[a - 1, b - 1]))
            for a, b in combinations(range(1, self.n + 1), 2)
            if not np.isnan(self._table[a - 1, b - 1])
        ]

    def is_complete(self) -> bool:
        return len(self.pairs()) == self.n * (self.n - 1) // 2


def transposition(n: int, a: int, b: int) -> Permutation:
    e = list(range(1, n + 1))
    e[a - 1], e[b - 1] = e[b - 1], e[a - 1]
    return Permutation(e)


@dataclass(frozen=True)
class GeneratorSet:
    """Inverse-closed set of non-identity permutations with per-generator costs."""

    generators: tuple[Permutation, ...]
    weights: tuple[float, ...]

    def __init__(self, generators: Sequence[Permutation], weights: Sequence[float] | None = None):
        generators = tuple(generators)
        if not generators:
            raise ValidationError("generator set is empty")
        _check_same_n(*generators)
        if weights is None:
            weights = [1.0] * len(generators)
        weights = tuple(float(w) for w in weights)
        if len(weights) != len(generators):
            raise ValidationError("one weight per generator is required")
        if any(not np.isfinite(w) or w < 0 for w in weights):
            raise ValidationError("generator weights must be nonnegative")
        if len(set(generators)) != len(generators):
            raise ValidationError("duplicate generators")
        e = identity(generators[0].n)
        members = set(generators)
        for g in generators:
            if g == e:
                raise ValidationError("the identity cannot be a generator")
            if inverse(g) not in members:
                raise ValidationError(f"generator set is not closed under inversion: missing inverse of {g}")
        object.__setattr__(self, "generators", generators)
        object.__setattr__(self, "weights", weights)

    @property
    def n(self) -> int:
        return self.generators[0].n

    @classmethod
    def adjacent(cls, n: int, w: AdjacentWeightFunction | None = None) -> "GeneratorSet":
        w = w or AdjacentWeightFunction.uniform(n)
        if w.n != n:
            raise ValidationError(f"weight function is for n={w.n}, not {n}")
        return cls([transposition(n, a, a + 1) for a in range(1, n)], w.weights)

    @classmethod
    def transpositions(cls, n: int, table: TranspositionWeightTable | None = None) -> "GeneratorSet":
        """All transpositions T_n, or only the pairs defined in ``table``."""
        if table is None:
            table = TranspositionWeightTable.uniform(n)
        if table.n != n:
            raise ValidationError(f"table is for n={table.n}, not {n}")
        pairs = table.pairs()
        return cls([transposition(n, a, b) for a, b, _ in pairs], [w for _, _, w in pairs])


@dataclass(frozen=True)
class Transformation:
    """A sequence of adjacent swaps taking one ranking to another.

    ``walks[i-1]`` lists the ranks visited by object ``i``; ``rounds`` groups
    the swap positions by the object that was being moved.
    """

    source: Permutation
    target: Permutation
    steps: tuple[AdjacentTransposition, ...]
    rounds: tuple[tuple[int, tuple[int, ...]], ...]
    walks: tuple[tuple[int, ...], ...]
    total_weight: float

    def replay(self) -> Permutation:
        p = self.source
        for step in self.steps:
            p = step.apply(p)
        return p

    def coefficients(self) -> tuple[int, ...]:
        """How many times each adjacent transposition ``(a a+1)`` is used."""
        counts = [0] * (self.source.n - 1)
        for step in self.steps:
            counts[step.a - 1] += 1
        return tuple(counts)

    def peaks(self) -> tuple[int, ...]:
        return tuple(max(walk) for walk in self.walks)


def _check_weights(p: Permutation, q: Permutation, w: AdjacentWeightFunction) -> int:
    n = _check_same_n(p, q)
    if w.n != n:
        raise ValidationError(f"weight function has {len(w.weights)} entries, expected {n - 1}")
    return n


def _require_decreasing(w: AdjacentWeightFunction) -> None:
    if not w.is_decreasing():
        raise ValidationError(
            "closed form requires a decreasing weight function; use weighted_kendall_exact instead"
        )


def walk_peaks(p: Permutation, q: Permutation) -> tuple[int, ...]:
    """Turning rank of each object's optimal walk: (rank_p + rank_q + I_i) / 2."""
    prof = disagreement_profile(p, q)
    rp, rq = p.ranks(), q.ranks()
    peaks = []
    for i in range(p.n):
        twice = (rp[i] + 1) + (rq[i] + 1) + prof.counts[i]
        assert twice % 2 == 0, f"odd walk-peak numerator {twice} for object {i + 1}"
        peaks.append(twice // 2)
    return tuple(peaks)


def weighted_kendall_monotone(p: Permutation, q: Permutation, w: AdjacentWeightFunction) -> float:
    """Weighted Kendall distance for a decreasing weight function, in O(n^2)."""
    n = _check_weights(p, q, w)
    _require_decreasing(w)
    # prefix[k] = sum of weights of (1 2), ..., (k-1 k)
    prefix = np.concatenate(([0.0, 0.0], np.cumsum(w.weights)))
    rp, rq = p.ranks(), q.ranks()
    total = 0.0
    for i, peak in enumerate(walk_peaks(p, q)):
        assert peak <= n
        total += 2 * prefix[peak] - prefix[rp[i] + 1] - prefix[rq[i] + 1]
    return float(total / 2)


def minimum_weight_transformation(
    p: Permutation, q: Permutation, w: AdjacentWeightFunction
) -> Transformation:
    """Build a transformation attaining ``weighted_kendall_monotone(p, q, w)``.

    Round ``k`` bubbles the object ``q(k)`` up from its current rank to rank
    ``k``; for ``q`` the identity this moves objects in increasing order.
    """
    n = _check_weights(p, q, w)
    _require_decreasing(w)
    current = list(p.entries)
    walks = {obj: [rank + 1] for rank, obj in enumerate(current)}
    steps = []
    rounds = []
    total = 0.0
    for k in range(1, n + 1):
        obj = q(k)
        pos = current.index(obj) + 1
        moved = []
        while pos > k:
            a = pos - 1
            other = current[a - 1]
            current[a - 1], current[a] = obj, other
            walks[obj].append(a)
            walks[other].append(a + 1)
            steps.append(AdjacentTransposition(a, n))
            moved.append(a)
            total += w[a]
            pos = a
        rounds.append((obj, tuple(moved)))
    return Transformation(
        source=p,
        target=q,
        steps=tuple(steps),
        rounds=tuple(rounds),
        walks=tuple(tuple(walks[i]) for i in range(1, n + 1)),
        total_weight=total,
    )


# ---------------------------------------------------------------------------
# Exact oracle: Dijkstra over the Cayley graph of S_n.


@lru_cache(maxsize=16)
def all_permutations(n: int) -> np.ndarray:
    """Every permutation of 1..n as rows, in lexicographic order."""
    return np.array(list(permutations(range(1, n + 1))), dtype=np.int64).reshape(-1, n)


def _codes(rows: np.ndarray, n: int) -> np.ndarray:
    base = (n + 1) ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return rows @ base


@lru_cache(maxsize=16)
def _sorted_codes(n: int) -> np.ndarray:
    return _codes(all_permutations(n), n)


def perm_index(p: Permutation | Sequence[int]) -> int:
    """Position of ``p`` in the lexicographic enumeration of S_n."""
    row = np.asarray(tuple(p), dtype=np.int64)
    n = len(row)
    return int(np.searchsorted(_sorted_codes(n), _codes(row[None, :], n))[0])


@lru_cache(maxsize=32)
def _neighbor_table(n: int, gens: tuple[tuple[int, ...], ...]) -> np.ndarray:
    perms = all_permutations(n)
    cols = []
    for g in gens:
        moved = perms[:, np.asarray(g) - 1]  # rows of p o g
        cols.append(np.searchsorted(_sorted_codes(n), _codes(moved, n)))
    return np.stack(cols, axis=1)


@lru_cache(maxsize=64)
def _cayley_graph(n: int, gens: tuple[tuple[int, ...], ...], weights: tuple[float, ...]) -> csr_matrix:
    nbrs = _neighbor_table(n, gens)
    size = nbrs.shape[0]
    rows = np.repeat(np.arange(size), len(gens))
    data = np.tile(np.asarray(weights, dtype=float), size)
    # explicit zeros are kept as edges by csgraph
    return csr_matrix((data, (rows, nbrs.ravel())), shape=(size, size))


def _graph_for(gen: GeneratorSet, cap: int) -> csr_matrix:
    if gen.n > cap:
        raise OracleCapExceeded(f"oracle cap exceeded: n={gen.n} > {cap}")
    return _cayley_graph(gen.n, tuple(g.entries for g in gen.generators), gen.weights)


def distances_to(q: Permutation, gen: GeneratorSet, cap: int = DEFAULT_CAP) -> np.ndarray:
    """``d_G(pi, q)`` for every pi in lexicographic order (``inf`` if unreachable)."""
    graph = _graph_for(gen, cap)
    return dijkstra(graph.T.tocsr(), directed=True, indices=perm_index(q))


def distances_from(p: Permutation, gen: GeneratorSet, cap: int = DEFAULT_CAP) -> np.ndarray:
    """``d_G(p, pi)`` for every pi in lexicographic order (``inf`` if unreachable)."""
    graph = _graph_for(gen, cap)
    return dijkstra(graph, directed=True, indices=perm_index(p))


def weighted_generator_distance(
    p: Permutation, q: Permutation, gen: GeneratorSet, cap: int = DEFAULT_CAP
) -> float:
    """Minimum total generator cost over all G-transformations of ``p`` into ``q``.

    Raises ``UnreachableError`` if ``q`` is not in ``p``'s coset of <G>.
    """
    if _check_same_n(p, q) != gen.n:
        raise ValidationError(f"generators act on n={gen.n}, rankings have n={p.n}")
    graph = _graph_for(gen, cap)
    dist = dijkstra(graph, directed=True, indices=perm_index(p))[perm_index(q)]
    if np.isinf(dist):
        raise UnreachableError(f"{q} is unreachable from {p} with the given generators")
    return float(dist)


def weighted_kendall_exact(
    p: Permutation, q: Permutation, w: AdjacentWeightFunction, cap: int = DEFAULT_CAP
) -> float:
    """Weighted Kendall distance for arbitrary nonnegative weights (shortest path)."""
    n = _check_weights(p, q, w)
    if n == 1:
        return 0.0
    return weighted_generator_distance(p, q, GeneratorSet.adjacent(n, w), cap=cap)


def cayley_distance(p: Permutation, q: Permutation) -> int:
    """Minimum number of transpositions taking ``p`` to ``q``."""
    n = _check_same_n(p, q)
    return n - cycle_count(compose(inverse(q), p))


def weighted_cayley_distance(
    p: Permutation, q: Permutation, table: TranspositionWeightTable, cap: int = DEFAULT_CAP
) -> float:
    n = _check_same_n(p, q)
    if table.n != n:
        raise ValidationError(f"table is for n={table.n}, rankings have n={n}")
    if not table.is_complete():
        raise ValidationError("weighted Cayley distance needs a weight for every transposition")
    if n == 1:
        return 0.0
    return weighted_generator_distance(p, q, GeneratorSet.transpositions(n, table), cap=cap)


# ---------------------------------------------------------------------------
# Distance selection for aggregation and the CLI.

METRICS = ("kendall", "wkendall", "cayley", "wcayley", "gendist")


@dataclass(frozen=True)
class Metric:
    """A named distance with its parameters.

    ``exact`` routes ``wkendall`` through the shortest-path oracle, which also
    admits non-monotone weights.
    """

    name: str = "kendall"
    weights: AdjacentWeightFunction | None = None
    table: TranspositionWeightTable | None = None
    generators: GeneratorSet | None = None
    exact: bool = False
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.name not in METRICS:
            raise ValidationError(f"unknown distance {self.name!r}; expected one of {METRICS}")
        if self.name == "wkendall":
            if self.weights is None:
                raise ValidationError("wkendall needs adjacent weights")
            if not self.exact:
                _require_decreasing(self.weights)
        if self.name == "wcayley":
            if self.table is None or not self.table.is_complete():
                raise ValidationError("wcayley needs a complete transposition weight table")
        if self.name == "gendist" and self.generators is None:
            if self.table is None:
                raise ValidationError("gendist needs a generator set or transposition table")
            object.__setattr__(self, "generators", GeneratorSet.transpositions(self.table.n, self.table))

    def __call__(self, p: Permutation, q: Permutation) -> float:
        if self.name == "kendall":
            return kendall_tau(p, q)
        if self.name == "cayley":
            return cayley_distance(p, q)
        if self.name == "wkendall":
            if self.exact:
                return weighted_kendall_exact(p, q, self.weights, cap=self.cap)
            return weighted_kendall_monotone(p, q, self.weights)
        if self.name == "wcayley":
            return weighted_cayley_distance(p, q, self.table, cap=self.cap)
        return weighted_generator_distance(p, q, self.generators, cap=self.cap)

    def generator_set(self, n: int) -> GeneratorSet:
        if self.name == "kendall":
            return GeneratorSet.adjacent(n)
        if self.name == "cayley":
            return GeneratorSet.transpositions(n)
        if self.name == "wkendall":
            return GeneratorSet.adjacent(n, self.weights)
        if self.name == "wcayley":
            return GeneratorSet.transpositions(n, self.table)
        return self.generators

    def to_target(self, q: Permutation) -> np.ndarray:
        """``d(pi, q)`` for every pi of S_n in lexicographic order."""
        n = q.n
        if n == 1:
            return np.zeros(1)
        if self.name == "kendall":
            ranks = np.argsort(all_permutations(n), axis=1)
            rq = np.asarray(q.ranks())
            total = np.zeros(len(ranks), dtype=np.int64)
            for a, b in combinations(range(n), 2):
                total += (ranks[:, a] < ranks[:, b]) != (rq[a] < rq[b])
            return total.astype(float)
        return distances_to(q, self.generator_set(n), cap=self.cap)
