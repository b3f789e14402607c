import random
from collections import Counter
from itertools import product

import pytest
from hypothesis import given, strategies as st

from rankagg.errors import ValidationError
from rankagg.perm import (
    AdjacentTransposition,
    Permutation,
    compose,
    disagreement_profile,
    identity,
    inverse,
    is_between,
    kendall_tau,
    random_permutation,
)

from oracles import bfs_distances, inversions, sym


def perms(n):
    return st.permutations(list(range(1, n + 1))).map(Permutation)


sized_triples = st.integers(1, 7).flatmap(lambda n: st.tuples(perms(n), perms(n), perms(n)))


@pytest.mark.parametrize("n, expected", [(4, (1, 2, 3, 4)), (1, (1,)), (2, (1, 2))])
def test_identity(n, expected):
    assert identity(n).entries == expected


def test_identity_rejects_zero():
    with pytest.raises(ValidationError):
        identity(0)


@pytest.mark.parametrize("entries", [(1, 1, 2), (0, 1, 2), (1, 2, 4), ()])
def test_not_a_bijection(entries):
    with pytest.raises(ValidationError):
        Permutation(entries)


def test_compose_examples():
    assert compose(Permutation([3, 2, 1]), identity(3)) == Permutation([3, 2, 1])
    assert compose(Permutation([2, 1, 3]), Permutation([2, 1, 3])) == identity(3)
    assert compose(Permutation([4, 3, 1, 2]), Permutation([2, 1, 3, 4])) == Permutation([3, 4, 1, 2])


def test_compose_matches_function_table():
    # brute force: build the maps as dicts and compose them pointwise
    for p, q in product(sym(4), repeat=2):
        pm = {k + 1: v for k, v in enumerate(p.entries)}
        qm = {k + 1: v for k, v in enumerate(q.entries)}
        assert compose(p, q).entries == tuple(pm[qm[k]] for k in range(1, 5))


def test_compose_rejects_mismatch():
    with pytest.raises(ValidationError):
        compose(identity(3), identity(4))


@pytest.mark.parametrize(
    "p, expected", [((1, 2, 3), (1, 2, 3)), ((2, 3, 1), (3, 1, 2)), ((4, 3, 1, 2), (3, 4, 2, 1))]
)
def test_inverse_examples(p, expected):
    p = Permutation(p)
    assert inverse(p).entries == expected
    assert compose(p, inverse(p)) == identity(p.n)


def test_adjacent_transposition_acts_on_ranks():
    t = AdjacentTransposition(1, 4)
    assert t.apply(Permutation([4, 3, 1, 2])) == compose(Permutation([4, 3, 1, 2]), t.as_permutation())
    with pytest.raises(ValidationError):
        AdjacentTransposition(4, 4)


@pytest.mark.parametrize(
    "p, q, expected", [((1, 2, 3, 4), (1, 2, 3, 4), 0), ((2, 1), (1, 2), 1), ((4, 3, 1, 2), (1, 2, 3, 4), 5)]
)
def test_kendall_examples(p, q, expected):
    assert kendall_tau(Permutation(p), Permutation(q)) == expected
    assert inversions(p, q) == expected


def test_kendall_rejects_mismatch():
    with pytest.raises(ValidationError):
        kendall_tau(identity(2), identity(3))


def test_disagreement_profile_example():
    prof = disagreement_profile(Permutation([4, 3, 1, 2]), identity(4))
    assert prof.counts == (2, 2, 3, 3)
    assert prof.pairs == 5
    prof = disagreement_profile(Permutation([2, 1]), identity(2))
    assert prof.counts == (1, 1) and prof.pairs == 1
    assert disagreement_profile(Permutation([3, 1, 2]), Permutation([3, 1, 2])).counts == (0, 0, 0)


def test_is_between_examples():
    assert is_between(Permutation([3, 2, 1, 4]), Permutation([2, 3, 1, 4]), identity(4))
    p, q = Permutation([2, 3, 1]), Permutation([3, 1, 2])
    assert is_between(p, p, q)
    assert not is_between(Permutation([1, 2]), Permutation([2, 1]), Permutation([1, 2]))


@pytest.mark.parametrize("n", range(1, 6))
def test_kendall_equals_adjacent_bfs(n):
    for q in sym(n):
        dist = bfs_distances(q.entries, [(a, a + 1) for a in range(1, n)])
        for p in sym(n):
            assert kendall_tau(p, q) == dist[p.entries]


def test_kendall_metric_exhaustive_s4():
    perms4 = sym(4)
    d = {(p, q): kendall_tau(p, q) for p in perms4 for q in perms4}
    for p, q, r in product(perms4, repeat=3):
        assert d[p, q] == d[q, p]
        assert (d[p, q] == 0) == (p == q)
        assert d[p, r] <= d[p, q] + d[q, r]


@given(sized_triples)
def test_kendall_metric_random(triple):
    p, q, r = triple
    assert kendall_tau(p, q) == kendall_tau(q, p) >= 0
    assert kendall_tau(p, r) <= kendall_tau(p, q) + kendall_tau(q, r)
    # left-invariance: relabeling objects by r
    assert kendall_tau(compose(r, p), compose(r, q)) == kendall_tau(p, q)


@given(sized_triples)
def test_profile_sums_to_twice_tau(triple):
    p, q, _ = triple
    prof = disagreement_profile(p, q)
    assert sum(prof.counts) == 2 * prof.pairs == 2 * kendall_tau(p, q)


@given(sized_triples)
def test_compose_inverse_roundtrip(triple):
    p, q, r = triple
    assert compose(p, inverse(p)) == identity(p.n) == compose(inverse(p), p)
    assert compose(compose(p, q), r) == compose(p, compose(q, r))


def test_random_permutation_deterministic_and_trivial():
    assert random_permutation(1, random.Random(5)) == identity(1)
    assert random_permutation(3, random.Random(11)) == random_permutation(3, random.Random(11))
    with pytest.raises(ValidationError):
        random_permutation(0, random.Random(0))


def test_random_permutation_uniform_s3():
    rng = random.Random(2024)
    counts = Counter(random_permutation(3, rng) for _ in range(60_000))
    assert len(counts) == 6
    sigma = (60_000 * (1 / 6) * (5 / 6)) ** 0.5
    for c in counts.values():
        assert abs(c - 10_000) <= 3 * sigma
