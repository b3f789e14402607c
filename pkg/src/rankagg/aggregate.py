"""Profile aggregation: Borda, positional Borda and distance-minimizing rules."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from rankagg.distance import DEFAULT_CAP, TOL, Metric, all_permutations
from rankagg.errors import OracleCapExceeded, ValidationError
from rankagg.perm import AdjacentTransposition, Permutation, as_permutation, random_permutation


@dataclass(frozen=True)
class Profile:
    rankings: tuple[Permutation, ...]

    def __init__(self, rankings: Iterable[Permutation | Sequence[int]]):
        rankings = tuple(as_permutation(r) for r in rankings)
        if not rankings:
            raise ValidationError("a profile needs at least one ranking")
        sizes = {r.n for r in rankings}
        if len(sizes) != 1:
            raise ValidationError(f"rankings in a profile must share n, got sizes {sorted(sizes)}")
        object.__setattr__(self, "rankings", rankings)

    @property
    def m(self) -> int:
        return len(self.rankings)

    @property
    def n(self) -> int:
        return self.rankings[0].n

    def rank_matrix(self) -> np.ndarray:
        """m x n matrix whose row i holds the 1-based rank of each object under voter i."""
        return np.array([r.ranks() for r in self.rankings], dtype=float) + 1.0

    def __iter__(self):
        return iter(self.rankings)

    def __len__(self) -> int:
        return len(self.rankings)


@dataclass(frozen=True)
class PositionalScores:
    """Scores ``s[k] = phi_1 + ... + phi_{k-1}`` for the k-th preference."""

    phi: tuple[float, ...]

    def __init__(self, phi: Iterable[float]):
        phi = tuple(float(x) for x in phi)
        if any(not np.isfinite(x) or x < 0 for x in phi):
            raise ValidationError(f"positional increments must be nonnegative, got {phi}")
        object.__setattr__(self, "phi", phi)

    @property
    def n(self) -> int:
        return len(self.phi) + 1

    @property
    def s(self) -> np.ndarray:
        return np.concatenate(([0.0], np.cumsum(self.phi)))


class Aggregate(NamedTuple):
    ranking: Permutation
    scores: np.ndarray


class KemenyResult(NamedTuple):
    ranking: Permutation
    cost: float


def order_by_scores(scores: Sequence[float]) -> Permutation:
    """Objects sorted by ascending score; ties (on a 1e-9 grid) by ascending id."""
    keys = np.round(np.asarray(scores, dtype=float), 9)
    return Permutation(np.argsort(keys, kind="stable") + 1)


def borda_aggregate(profile: Profile) -> Aggregate:
    scores = profile.rank_matrix().mean(axis=0)
    return Aggregate(order_by_scores(scores), scores)


def generalized_borda(profile: Profile, pos: PositionalScores) -> Aggregate:
    if pos.n != profile.n:
        raise ValidationError(f"positional scores are for n={pos.n}, profile has n={profile.n}")
    s = pos.s
    ranks = profile.rank_matrix().astype(int) - 1
    scores = s[ranks].mean(axis=0)
    return Aggregate(order_by_scores(scores), scores)


def kemeny_costs(profile: Profile, metric: Metric) -> np.ndarray:
    """Cumulative distance to the profile for every ranking in lexicographic order."""
    total = np.zeros(len(all_permutations(profile.n)))
    for sigma in profile:
        total += metric.to_target(sigma)
    return total


def kemeny_exact(profile: Profile, metric: Metric | None = None, cap: int = DEFAULT_CAP) -> KemenyResult:
    """Exhaustive minimizer of the cumulative distance over S_n.

    Among optima within 1e-9 of the minimum the lexicographically smallest
    ranking is returned.
    """
    metric = metric or Metric()
    if profile.n > cap:
        raise OracleCapExceeded(f"oracle cap exceeded: n={profile.n} > {cap}")
    costs = kemeny_costs(profile, metric)
    best = costs.min()
    idx = int(np.flatnonzero(costs <= best + TOL)[0])
    return KemenyResult(Permutation(all_permutations(profile.n)[idx]), float(costs[idx]))


def total_cost(profile: Profile, ranking: Permutation, metric: Metric) -> float:
    return float(sum(metric(ranking, sigma) for sigma in profile))


def local_search_aggregate(
    profile: Profile,
    metric: Metric | None = None,
    start: Permutation | str | None = None,
    rng=None,
) -> KemenyResult:
    """First-improvement descent over single adjacent swaps.

    ``start`` defaults to the Borda ranking; pass ``"random"`` together with
    ``rng`` for a random starting point.  Swaps are scanned from the top of
    the ranking and the scan restarts after every accepted move.
    """
    metric = metric or Metric()
    if start is None:
        current = borda_aggregate(profile).ranking
    elif isinstance(start, str):
        if start != "random" or rng is None:
            raise ValidationError("start must be a Permutation, None, or 'random' with an rng")
        current = random_permutation(profile.n, rng)
    else:
        current = as_permutation(start)
        if current.n != profile.n:
            raise ValidationError("start ranking does not match profile size")
    cost = total_cost(profile, current, metric)
    improved = True
    while improved:
        improved = False
        for a in range(1, profile.n):
            candidate = AdjacentTransposition(a, profile.n).apply(current)
            c = total_cost(profile, candidate, metric)
            if c < cost - TOL:
                current, cost, improved = candidate, c, True
                break
    return KemenyResult(current, cost)
