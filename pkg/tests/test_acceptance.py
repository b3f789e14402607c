"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Lines are also collected into the "acceptance criteria" section of the
pytest terminal summary.
"""

import random
import time
from itertools import product

import numpy as np

from rankagg.aggregate import Profile, kemeny_costs, kemeny_exact, local_search_aggregate
from rankagg.distance import (
    AdjacentWeightFunction,
    GeneratorSet,
    Metric,
    cayley_distance,
    minimum_weight_transformation,
    weighted_generator_distance,
    weighted_kendall_exact,
    weighted_kendall_monotone,
)
from rankagg.gossip import (
    BordaState,
    GossipNetwork,
    build_mixing_matrix,
    gap_and_spread,
    gossip_step,
    init_borda_state,
    lambda2,
    run_trials,
    tail_from_times,
    theoretical_bound,
)
from rankagg.perm import Permutation, compose, identity, is_between, kendall_tau

from oracles import sym

TOL = 1e-9


def report(criterion, name, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'} [{name}] {detail}"
    print(line)
    criterion(name, passed, detail)
    assert passed, line


def decreasing(rng, n):
    return AdjacentWeightFunction(sorted((rng.random() for _ in range(n - 1)), reverse=True))


def distinct_mean_profile(seed, n, m):
    rng = np.random.default_rng(seed)
    while True:
        prof = Profile([rng.permutation(n) + 1 for _ in range(m)])
        if not gap_and_spread(prof).degenerate:
            return prof


# shared gossip setup for criteria 8, 9 and 11
K8 = GossipNetwork.complete(8)
PROFILE_N4 = distinct_mean_profile(2024, 4, 8)


def test_c01_worked_example(criterion):
    pi, e = Permutation([4, 3, 1, 2]), identity(4)
    w = AdjacentWeightFunction([3.0, 2.0, 1.0])
    minimum_weight_transformation(pi, e, w)  # warm-up
    times = []
    for _ in range(25):
        start = time.perf_counter()
        t = minimum_weight_transformation(pi, e, w)
        times.append(time.perf_counter() - start)
    elapsed = float(np.median(times))
    rounds = tuple(tuple((a, a + 1) for a in steps) for _, steps in t.rounds if steps)
    ok = (
        t.walks == ((3, 2, 1), (4, 3, 2), (2, 3, 4, 3), (1, 2, 3, 4))
        and rounds == (((2, 3), (1, 2)), ((3, 4), (2, 3)), ((3, 4),))
        and t.coefficients() == (1, 2, 2)
        and elapsed < 1e-3
    )
    report(criterion, "1 worked example", ok, f"coefficients={t.coefficients()} median={elapsed * 1e3:.3f} ms")


def test_c02_closed_form_vs_oracle(criterion):
    rng = random.Random(2)
    start = time.perf_counter()
    worst, checked = 0.0, 0
    perms5 = sym(5)
    for _ in range(5):
        w = decreasing(rng, 5)
        for p in perms5:
            for q in perms5:
                worst = max(worst, abs(weighted_kendall_monotone(p, q, w) - weighted_kendall_exact(p, q, w)))
                checked += 1
    for n in (6, 7):
        base = list(range(1, n + 1))
        pairs = [(Permutation(rng.sample(base, n)), Permutation(rng.sample(base, n))) for _ in range(200)]
        for _ in range(20):
            w = decreasing(rng, n)
            for p, q in pairs:
                worst = max(worst, abs(weighted_kendall_monotone(p, q, w) - weighted_kendall_exact(p, q, w)))
                checked += 1
    elapsed = time.perf_counter() - start
    ok = worst <= TOL and elapsed < 60 and checked == 14400 * 5 + 2 * 200 * 20
    report(criterion, "2 closed form = oracle", ok, f"pairs={checked} max|diff|={worst:.2e} time={elapsed:.1f}s")


def test_c03_reductions(criterion):
    start = time.perf_counter()
    perms5 = sym(5)
    unit = AdjacentWeightFunction.uniform(5)
    tn = GeneratorSet.transpositions(5)
    bad = 0
    for p in perms5:
        for q in perms5:
            tau = kendall_tau(p, q)
            bad += weighted_kendall_exact(p, q, unit) != tau
            bad += weighted_kendall_monotone(p, q, unit) != tau
            bad += cayley_distance(p, q) != weighted_generator_distance(p, q, tn)
    elapsed = time.perf_counter() - start
    report(criterion, "3 reductions", bad == 0 and elapsed < 30, f"violations={bad} time={elapsed:.1f}s")


def test_c04_metric_laws(criterion):
    perms4 = sym(4)
    d = {(p, q): kendall_tau(p, q) for p in perms4 for q in perms4}
    bad = 0
    for p, q in product(perms4, repeat=2):
        bad += d[p, q] != d[q, p]
        bad += (d[p, q] == 0) != (p == q)
    for p, q, r in product(perms4, repeat=3):
        bad += d[p, r] > d[p, q] + d[q, r]
    for s, p, q in product(perms4, repeat=3):
        bad += d[compose(s, p), compose(s, q)] != d[p, q]

    rng = random.Random(4)
    base = list(range(1, 6))
    triples = 0
    for _ in range(100):
        w = AdjacentWeightFunction([rng.choice([0.0, rng.uniform(0, 5)]) for _ in range(4)])
        for _ in range(100):
            p, q, r, s = (Permutation(rng.sample(base, 5)) for _ in range(4))
            dpq = weighted_kendall_exact(p, q, w)
            bad += abs(dpq - weighted_kendall_exact(q, p, w)) > TOL
            bad += weighted_kendall_exact(p, r, w) > dpq + weighted_kendall_exact(q, r, w) + TOL
            bad += abs(weighted_kendall_exact(compose(s, p), compose(s, q), w) - dpq) > TOL
            triples += 1
    report(criterion, "4 metric laws", bad == 0 and triples == 10_000, f"violations={bad} weighted triples={triples}")


def test_c05_betweenness(criterion):
    start = time.perf_counter()
    perms4 = sym(4)
    d = {(p, q): kendall_tau(p, q) for p in perms4 for q in perms4}
    bad = 0
    for p, w, q in product(perms4, repeat=3):
        bad += (d[p, q] == d[p, w] + d[w, q]) != is_between(p, w, q)
    elapsed = time.perf_counter() - start
    report(criterion, "5 betweenness", bad == 0 and elapsed < 10, f"triples=13824 mismatches={bad} time={elapsed:.1f}s")


def test_c06_kemeny(criterion):
    rng = random.Random(6)
    metric = Metric()
    worse, equal = 0, 0
    for _ in range(100):
        prof = Profile([rng.sample(range(1, 5), 4) for _ in range(5)])
        exact = kemeny_exact(prof, metric).cost
        local = local_search_aggregate(prof, metric).cost
        worse += local < exact - TOL
        equal += abs(local - exact) <= TOL
    costs = kemeny_costs(Profile(sym(3)), metric)
    flat = bool(np.all(costs == costs[0]))
    ok = worse == 0 and flat
    report(criterion, "6 Kemeny exactness", ok, f"local<exact in {worse}/100, local=exact in {equal}/100, S3 costs all {costs[0]:g}")


def test_c07_conservation_and_convergence(criterion):
    rng = np.random.default_rng(7)
    prof5 = distinct_mean_profile(77, 5, 8)
    state = init_borda_state(prof5)
    start_sums = state.b.sum(axis=0)
    b = state.b
    for k in rng.choice(len(K8.edges), size=10_000, p=K8.probs):
        b = gossip_step(BordaState(b), K8.edges[k], K8).b
    drift = float(np.max(np.abs(b.sum(axis=0) - start_sums) / np.abs(start_sums)))

    shrink = []
    for seed in range(20):
        batch = run_trials(prof5, K8, 1, 5000, np.random.default_rng(seed), grid=(0, 5000))
        shrink.append(batch.max_dev[0, 0] / max(batch.max_dev[1, 0], 1e-300))
    ok = drift < 1e-9 and min(shrink) >= 1e6
    report(criterion, "7 conservation/convergence", ok, f"drift={drift:.1e} min shrink={min(shrink):.2e} over 20 seeds")


def test_c08_persistence(criterion):
    start = time.perf_counter()
    batch = run_trials(PROFILE_N4, K8, 2000, 100_000, np.random.default_rng(8), track_persistence=True)
    elapsed = time.perf_counter() - start
    finite = bool(np.isfinite(batch.T).all())
    reverts = int(batch.reverted.sum())
    ok = finite and reverts == 0
    report(
        criterion,
        "8 consensus persistence",
        ok,
        f"trials=2000 reverted={reverts} all T finite={finite} max T={batch.T.max():g} time={elapsed:.1f}s",
    )


def test_c09_tail_bound(criterion):
    start = time.perf_counter()
    inputs = gap_and_spread(PROFILE_N4).with_lambda2(lambda2(build_mixing_matrix(K8)))
    grid = list(range(0, 401, 5))
    batch = run_trials(PROFILE_N4, K8, 2000, 100_000, np.random.default_rng(9))
    checked, bad = 0, []
    for point in tail_from_times(batch.T, grid):
        bound = theoretical_bound(point.t, inputs)
        if bound >= 1:
            continue
        checked += 1
        half = (point.wilson_hi - point.wilson_lo) / 2
        if point.tail > bound + half:
            bad.append(point.t)
    elapsed = time.perf_counter() - start
    ok = not bad and checked > 0 and elapsed < 180
    report(criterion, "9 tail bound", ok, f"grid points with bound<1: {checked}, violations at t={bad} time={elapsed:.1f}s")


def test_c10_spectral(criterion):
    lam_pair = lambda2(build_mixing_matrix(GossipNetwork(2, [(0, 1)])))
    W3 = build_mixing_matrix(GossipNetwork.complete(3))
    lam3 = lambda2(W3)
    # det(xI - W) for K3 is (x - 1)(x - 1/2)^2
    charpoly_ok = abs(np.polyval(np.poly(W3), lam3)) < 1e-10 and np.allclose(np.poly(W3), np.poly([1, 0.5, 0.5]), atol=1e-12)
    rng = np.random.default_rng(10)
    connected = [
        lambda2(build_mixing_matrix(GossipNetwork.random_connected(int(rng.integers(2, 16)), rng))) for _ in range(50)
    ]
    disconnected = []
    for _ in range(10):
        sizes = rng.integers(1, 6, size=int(rng.integers(2, 4)))
        sizes[0] = max(sizes[0], 2)
        edges, off = [], 0
        for size in sizes:
            edges += [(off + int(rng.integers(k)), off + k) for k in range(1, size)]
            off += size
        net = GossipNetwork(off, edges, rng.dirichlet(np.ones(len(edges))) if len(edges) > 1 else None)
        assert not net.is_connected()
        disconnected.append(lambda2(build_mixing_matrix(net)))
    ok = (
        abs(lam_pair) <= 1e-12
        and abs(lam3 - 0.5) <= 1e-8
        and charpoly_ok
        and max(connected) < 1
        and all(abs(x - 1) <= 1e-10 for x in disconnected)
    )
    report(
        criterion,
        "10 spectral",
        ok,
        f"pair={lam_pair:.1e} K3={lam3:.12f} max connected={max(connected):.6f} "
        f"disconnected in [{min(disconnected):.12f}, {max(disconnected):.12f}]",
    )


def test_c11_second_moment(criterion):
    lam = lambda2(build_mixing_matrix(K8))
    grid = (0, 5, 10, 20, 30, 40, 60, 80, 100)
    trials = 2000
    batch = run_trials(PROFILE_N4, K8, trials, max(grid), np.random.default_rng(11), grid=grid)
    y0 = batch.sq_dev[0, 0]
    worst, bad = -np.inf, 0
    for k, t in enumerate(grid):
        samples = batch.sq_dev[k]
        mean = samples.mean(axis=0)
        se = samples.std(axis=0, ddof=1) / np.sqrt(trials)
        rel_se = np.divide(se, mean, out=np.zeros_like(se), where=mean > 0)
        limit = lam**t * y0 * (1 + 3 * rel_se)
        ratio = np.divide(mean, limit, out=np.zeros_like(mean), where=limit > 0)
        worst = max(worst, float(ratio.max()))
        bad += int(np.sum(mean > limit * (1 + 1e-12)))
    report(criterion, "11 second-moment contraction", bad == 0, f"points={len(grid) * PROFILE_N4.n} violations={bad} max mean/limit={worst:.4f}")
