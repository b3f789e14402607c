"""Fast built-in invariant checks used by ``rankagg selftest``."""

from __future__ import annotations

import random
from collections import deque
from itertools import permutations
from typing import Callable

import numpy as np

from rankagg.aggregate import Profile, borda_aggregate, kemeny_exact
from rankagg.distance import (
    AdjacentWeightFunction,
    cayley_distance,
    minimum_weight_transformation,
    transposition,
    weighted_kendall_exact,
    weighted_kendall_monotone,
)
from rankagg.errors import ValidationError
from rankagg.gossip import (
    GossipNetwork,
    build_mixing_matrix,
    gossip_step,
    init_borda_state,
    lambda2,
)
from rankagg.perm import Permutation, compose, identity, is_between, kendall_tau

CHECKS: list[tuple[str, Callable[[], bool]]] = []


def check(name):
    def register(fn):
        CHECKS.append((name, fn))
        return fn

    return register


def _sym(n):
    return [Permutation(p) for p in permutations(range(1, n + 1))]


def _bfs(source, gens):
    dist = {source: 0}
    queue = deque([source])
    while queue:
        p = queue.popleft()
        for g in gens:
            q = compose(p, g)
            if q not in dist:
                dist[q] = dist[p] + 1
                queue.append(q)
    return dist


@check("example-4312-walks")
def _walks():
    t = minimum_weight_transformation(Permutation([4, 3, 1, 2]), identity(4), AdjacentWeightFunction([3, 2, 1]))
    return t.walks == ((3, 2, 1), (4, 3, 2), (2, 3, 4, 3), (1, 2, 3, 4))


@check("example-4312-steps")
def _steps():
    t = minimum_weight_transformation(Permutation([4, 3, 1, 2]), identity(4), AdjacentWeightFunction([3, 2, 1]))
    return tuple(s.a for s in t.steps) == (2, 1, 3, 2, 3) and t.coefficients() == (1, 2, 2)


@check("kendall-equals-adjacent-bfs-n<=4")
def _kendall_bfs():
    for n in range(1, 5):
        gens = [transposition(n, a, a + 1) for a in range(1, n)]
        e = identity(n)
        dist = _bfs(e, gens)
        if any(kendall_tau(p, e) != dist[p] for p in _sym(n)):
            return False
    return True


@check("cayley-equals-transposition-bfs-n<=4")
def _cayley_bfs():
    for n in range(2, 5):
        gens = [transposition(n, a, b) for a in range(1, n + 1) for b in range(a + 1, n + 1)]
        e = identity(n)
        dist = _bfs(e, gens)
        if any(cayley_distance(p, e) != dist[p] for p in _sym(n)):
            return False
    return True


@check("betweenness-iff-additivity-S4")
def _between():
    perms = _sym(4)
    for p in perms:
        for q in perms:
            dpq = kendall_tau(p, q)
            for w in perms:
                additive = dpq == kendall_tau(p, w) + kendall_tau(w, q)
                if additive != is_between(p, w, q):
                    return False
    return True


@check("closed-form-equals-oracle-S4")
def _closed_form():
    rng = random.Random(7)
    perms = _sym(4)
    for _ in range(3):
        w = AdjacentWeightFunction(sorted((rng.random() for _ in range(3)), reverse=True))
        for p in perms:
            for q in perms:
                if abs(weighted_kendall_monotone(p, q, w) - weighted_kendall_exact(p, q, w)) > 1e-9:
                    return False
    return True


@check("non-monotone-weights-rejected")
def _monotone_guard():
    w = AdjacentWeightFunction([1, 2, 3])
    try:
        weighted_kendall_monotone(Permutation([4, 3, 1, 2]), identity(4), w)
    except ValidationError:
        return True
    return False


@check("kemeny-small-profile")
def _kemeny():
    res = kemeny_exact(Profile([[1, 2, 3], [1, 2, 3], [3, 2, 1]]))
    return res.ranking == identity(3) and res.cost == 3


@check("borda-score-sum")
def _borda():
    prof = Profile([[1, 2, 3, 4], [2, 1, 3, 4], [1, 2, 4, 3]])
    return abs(borda_aggregate(prof).scores.sum() - 10) < 1e-9


@check("lambda2-known-values")
def _lambda2():
    two = lambda2(build_mixing_matrix(GossipNetwork(2, [(0, 1)])))
    three = lambda2(build_mixing_matrix(GossipNetwork.complete(3)))
    return abs(two) < 1e-12 and abs(three - 0.5) < 1e-8


@check("gossip-conserves-column-sums")
def _conservation():
    rng = np.random.default_rng(3)
    net = GossipNetwork.complete(5)
    prof = Profile([rng.permutation(4) + 1 for _ in range(5)])
    state = init_borda_state(prof)
    start = state.b.sum(axis=0)
    for k in rng.integers(len(net.edges), size=1000):
        state = gossip_step(state, net.edges[k], net)
    return bool(np.all(np.abs(state.b.sum(axis=0) - start) < 1e-9))


def run_selftest(out=print) -> bool:
    ok = True
    for name, fn in CHECKS:
        try:
            passed = bool(fn())
        except Exception as exc:  # a crash is reported as a failure of that check
            passed = False
            name = f"{name} ({type(exc).__name__}: {exc})"
        ok &= passed
        out(f"{'PASS' if passed else 'FAIL'} {name}")
    return ok
