"""Randomized gossip averaging of Borda vectors and its consensus time.

Agents are indexed from 0 in this module; the network file format and the
CLI use 1-based agent ids and convert at the boundary.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.stats import binomtest

from rankagg.aggregate import Profile
from rankagg.errors import DegenerateGapError, ValidationError

PROB_TOL = 1e-12
TIE_DECIMALS = 9


@dataclass(frozen=True)
class GossipNetwork:
    m: int
    edges: tuple[tuple[int, int], ...]
    probs: np.ndarray = field(compare=False)

    def __init__(self, m: int, edges: Iterable[tuple[int, int]], probs: Sequence[float] | None = None):
        edges = tuple((int(i), int(j)) for i, j in edges)
        if m < 1:
            raise ValidationError("a network needs at least one agent")
        if not edges:
            raise ValidationError("a network needs at least one edge")
        seen = set()
        norm = []
        for i, j in edges:
            if i == j:
                raise ValidationError(f"self-loop at agent {i}")
            if not (0 <= i < m and 0 <= j < m):
                raise ValidationError(f"edge ({i}, {j}) references an agent outside 0..{m - 1}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValidationError(f"duplicate edge {key}")
            seen.add(key)
            norm.append(key)
        if probs is None:
            probs = np.full(len(norm), 1.0 / len(norm))
        probs = np.asarray(probs, dtype=float)
        if probs.shape != (len(norm),):
            raise ValidationError("one probability per edge is required")
        if np.any(probs <= 0):
            raise ValidationError("edge probabilities must be strictly positive")
        if abs(probs.sum() - 1.0) > PROB_TOL:
            raise ValidationError(f"edge probabilities sum to {probs.sum()!r}, not 1")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "edges", tuple(norm))
        object.__setattr__(self, "probs", probs)

    @classmethod
    def complete(cls, m: int) -> "GossipNetwork":
        return cls(m, [(i, j) for i in range(m) for j in range(i + 1, m)])

    @classmethod
    def random_connected(cls, m: int, rng: np.random.Generator, extra: float = 0.3) -> "GossipNetwork":
        """Random spanning tree plus each remaining pair with probability ``extra``; random edge weights."""
        order = rng.permutation(m)
        edges = {tuple(sorted((int(order[k]), int(order[rng.integers(k)])))) for k in range(1, m)}
        for i in range(m):
            for j in range(i + 1, m):
                if rng.random() < extra:
                    edges.add((i, j))
        edges = sorted(edges)
        w = rng.uniform(0.1, 1.0, size=len(edges))
        return cls(m, edges, w / w.sum())

    def neighbors(self) -> list[list[int]]:
        adj = [[] for _ in range(self.m)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return adj

    def components(self) -> int:
        adj = self.neighbors()
        seen = [False] * self.m
        count = 0
        for s in range(self.m):
            if seen[s]:
                continue
            count += 1
            seen[s] = True
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for v in adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        queue.append(v)
        return count

    def is_connected(self) -> bool:
        return self.components() == 1

    def edge_index(self, edge: tuple[int, int]) -> int:
        key = (min(edge), max(edge))
        try:
            return self.edges.index(key)
        except ValueError:
            raise ValidationError(f"edge {edge} is not in the network") from None


@dataclass(frozen=True)
class BordaState:
    b: np.ndarray
    t: int = 0

    def __post_init__(self):
        b = np.array(self.b, dtype=float)
        if b.ndim != 2:
            raise ValidationError("Borda state must be an m x n matrix")
        b.setflags(write=False)
        object.__setattr__(self, "b", b)

    @property
    def m(self) -> int:
        return self.b.shape[0]

    @property
    def n(self) -> int:
        return self.b.shape[1]

    def mean(self) -> np.ndarray:
        return self.b.mean(axis=0)

    def max_deviation(self, target: np.ndarray) -> float:
        """max over agents of ||b_i - target||."""
        return float(np.linalg.norm(self.b - target, axis=1).max())


class BoundInputs(NamedTuple):
    r: np.ndarray
    d: np.ndarray
    m: int
    order: tuple[int, ...]
    lambda2: float | None = None

    @property
    def degenerate(self) -> bool:
        return bool(np.any(self.r <= 0))

    def with_lambda2(self, lam: float) -> "BoundInputs":
        return self._replace(lambda2=float(lam))


def init_borda_state(profile: Profile) -> BordaState:
    """Row i is voter i's inverse permutation, i.e. the rank of each object."""
    return BordaState(profile.rank_matrix(), 0)


def gossip_step(state: BordaState, edge: tuple[int, int], network: GossipNetwork) -> BordaState:
    i, j = network.edges[network.edge_index(edge)]
    if network.m != state.m:
        raise ValidationError("network and state disagree on the number of agents")
    b = state.b.copy()
    avg = 0.5 * (b[i] + b[j])
    b[i] = avg
    b[j] = avg
    return BordaState(b, state.t + 1)


def neighbor_aggregation_step(state: BordaState, network: GossipNetwork) -> BordaState:
    """Synchronous update: every agent takes the mean over its closed neighborhood.

    Unlike pairwise gossip this does not conserve column sums when degrees differ.
    """
    if network.m != state.m:
        raise ValidationError("network and state disagree on the number of agents")
    b = np.empty_like(state.b)
    for i, nbrs in enumerate(network.neighbors()):
        b[i] = state.b[[i, *nbrs]].mean(axis=0)
    return BordaState(b, state.t + 1)


def _tie_groups(target: np.ndarray) -> np.ndarray:
    """Group label per object: rank of its (rounded) target value among distinct values."""
    keys = np.round(np.asarray(target, dtype=float), TIE_DECIMALS)
    _, labels = np.unique(keys, return_inverse=True)
    return labels.reshape(-1)


def _rows_consistent(rows: np.ndarray, labels: np.ndarray) -> np.ndarray:
    order = np.argsort(rows, axis=-1, kind="stable")
    return np.all(np.diff(labels[order], axis=-1) >= 0, axis=-1)


def _consistency_check(target: np.ndarray):
    """Vectorized row check against ``target``'s ordering.

    With no ties in ``target`` it suffices to compare consecutive objects of
    the target order lexicographically on (score, id).
    """
    labels = _tie_groups(target)
    if len(np.unique(labels)) < len(labels):
        return lambda rows: _rows_consistent(rows, labels)
    cols = np.argsort(labels)
    id_up = cols[:-1] < cols[1:]

    def check(rows):
        d = np.diff(rows[..., cols], axis=-1)
        return np.all((d > 0) | ((d == 0) & id_up), axis=-1)

    return check


def is_consensus_time(state: BordaState, target: Sequence[float]) -> bool:
    """True iff every agent orders the objects as ``target`` does.

    Orders are ascending score with ties by object id; objects tied in
    ``target`` may appear in any relative order.
    """
    target = np.asarray(target, dtype=float)
    if target.shape != (state.n,):
        raise ValidationError("target length does not match the number of objects")
    return bool(np.all(_consistency_check(target)(state.b)))


class ConsensusRun(NamedTuple):
    T: int | None
    timed_out: bool
    deviations: list[tuple[int, float]]


def _edge_sampler(network: GossipNetwork, rng: np.random.Generator, shape, chunk: int = 4096):
    """Endless stream of i.i.d. edge indices drawn from ``network.probs``."""
    cdf = np.cumsum(network.probs)
    last = len(cdf) - 1
    if np.all(network.probs == network.probs[0]):
        while True:
            yield from rng.integers(0, last + 1, size=(chunk, *shape))
    while True:
        draws = np.searchsorted(cdf, rng.random(size=(chunk, *shape)), side="right")
        yield from np.minimum(draws, last)


def run_to_consensus(
    profile: Profile,
    network: GossipNetwork,
    rng: np.random.Generator,
    t_max: int,
    log_every: int = 100,
) -> ConsensusRun:
    """Gossip until every agent's ordering matches the average's, or ``t_max`` steps."""
    if t_max < 0:
        raise ValidationError("t_max must be nonnegative")
    if network.m != profile.m:
        raise ValidationError(f"network has {network.m} agents, profile has {profile.m} voters")
    state = init_borda_state(profile)
    target = state.mean()
    check = _consistency_check(target)
    b = state.b.copy()
    ok = check(b)
    deviations = [(0, state.max_deviation(target))]
    if ok.all():
        return ConsensusRun(0, False, deviations)
    edges = np.asarray(network.edges)
    sampler = _edge_sampler(network, rng, ())
    for t in range(1, t_max + 1):
        i, j = edges[next(sampler)]
        avg = 0.5 * (b[i] + b[j])
        b[i] = avg
        b[j] = avg
        ok[i] = ok[j] = check(avg)
        if t % log_every == 0:
            deviations.append((t, float(np.linalg.norm(b - target, axis=1).max())))
        if ok.all():
            deviations.append((t, float(np.linalg.norm(b - target, axis=1).max())))
            return ConsensusRun(t, False, deviations)
    return ConsensusRun(None, True, deviations)


@dataclass
class TrialBatch:
    """Outcome of many independent gossip runs on one profile.

    ``T`` is ``inf`` for trials that had not reached consensus by ``t_max``.
    ``sq_dev[k, trial, j]`` is ``||y^j(t)||^2`` at ``grid[k]``.
    """

    T: np.ndarray
    reverted: np.ndarray
    grid: tuple[int, ...]
    sq_dev: np.ndarray
    max_dev: np.ndarray
    t_max: int


def run_trials(
    profile: Profile,
    network: GossipNetwork,
    trials: int,
    t_max: int,
    rng: np.random.Generator,
    grid: Sequence[int] = (),
    track_persistence: bool = False,
) -> TrialBatch:
    """Simulate ``trials`` independent gossip chains in lockstep.

    The simulation stops once every trial has reached consensus and the last
    grid time has been recorded, unless ``track_persistence`` asks for the
    full ``t_max`` horizon (every step after T is then checked).
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    if network.m != profile.m:
        raise ValidationError(f"network has {network.m} agents, profile has {profile.m} voters")
    grid = tuple(sorted(set(int(t) for t in grid)))
    if grid and grid[0] < 0:
        raise ValidationError("grid times must be nonnegative")
    b0 = init_borda_state(profile).b
    target = b0.mean(axis=0)
    check = _consistency_check(target)
    b = np.repeat(b0[None, :, :], trials, axis=0)
    ar = np.arange(trials)
    ok = np.repeat(check(b0)[None, :], trials, axis=0)
    T = np.full(trials, np.inf)
    reverted = np.zeros(trials, dtype=bool)
    sq_dev = np.zeros((len(grid), trials, profile.n))
    max_dev = np.zeros((len(grid), trials))

    def record(t):
        k = grid.index(t)
        y = b - target
        sq_dev[k] = (y**2).sum(axis=1)
        max_dev[k] = np.linalg.norm(y, axis=2).max(axis=1)

    done = ok.all(axis=1)
    T[done] = 0
    if 0 in grid:
        record(0)
    grid_set = set(grid)
    last_needed = grid[-1] if grid else 0
    m = network.m
    flat_b = b.reshape(trials * m, profile.n)
    flat_ok = ok.reshape(trials * m)
    base = ar * m
    edges = np.asarray(network.edges)
    sampler = _edge_sampler(network, rng, (trials,), chunk=max(1, 2**18 // trials))
    all_reached = bool(done.all())
    for t in range(1, t_max + 1):
        if not track_persistence and all_reached and t > last_needed:
            break
        pick = edges[next(sampler)]
        i = base + pick[:, 0]
        j = base + pick[:, 1]
        avg = 0.5 * (flat_b[i] + flat_b[j])
        flat_b[i] = avg
        flat_b[j] = avg
        row_ok = check(avg)
        flat_ok[i] = row_ok
        flat_ok[j] = row_ok
        done = ok.all(axis=1)
        if all_reached:
            reverted |= ~done
        else:
            reached = np.isfinite(T)
            reverted |= reached & ~done
            T[done & ~reached] = t
            all_reached = bool(np.isfinite(T).all())
        if t in grid_set:
            record(t)
    return TrialBatch(T, reverted, grid, sq_dev, max_dev, t_max)


def build_mixing_matrix(network: GossipNetwork) -> np.ndarray:
    """Expected one-step averaging operator ``sum_e P_e (I - (e_i - e_j)(e_i - e_j)^T / 2)``."""
    W = np.zeros((network.m, network.m))
    eye = np.eye(network.m)
    for (i, j), p in zip(network.edges, network.probs):
        diff = eye[i] - eye[j]
        W += p * (eye - 0.5 * np.outer(diff, diff))
    return W


def jacobi_eigenvalues(A: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending."""
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError("matrix must be square")
    if not np.allclose(A, A.T, atol=1e-12, rtol=0):
        raise ValidationError("matrix must be symmetric")
    m = A.shape[0]
    scale = max(1.0, float(np.linalg.norm(A)))
    mask = ~np.eye(m, dtype=bool)
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(A[mask]))
        if off < tol * scale:
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = A[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = A[q, p] = 0.0
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    return np.sort(np.diag(A))[::-1]


def lambda2(W: np.ndarray) -> float:
    """Second largest eigenvalue of the symmetric mixing matrix ``W``."""
    eig = jacobi_eigenvalues(W)
    if len(eig) < 2:
        return 0.0
    return float(eig[1])


def gap_and_spread(profile: Profile) -> BoundInputs:
    """Per-object gap ``r`` and initial spread ``d``, listed in ascending-mean order.

    The first and last objects use their only neighbor's gap.  Zero gaps are
    kept (``degenerate`` reports them); ``theoretical_bound`` refuses them.
    """
    b = profile.rank_matrix()
    means = b.mean(axis=0)
    keys = np.round(means, TIE_DECIMALS)
    order = np.argsort(keys, kind="stable")
    n = profile.n
    r = np.full(n, np.inf)
    # gaps from the exact means; values equal on the tie grid count as zero gaps
    gaps = np.where(np.diff(keys[order]) == 0, 0.0, np.diff(means[order]))
    for k in range(n):
        nbr = []
        if k > 0:
            nbr.append(gaps[k - 1])
        if k < n - 1:
            nbr.append(gaps[k])
        if nbr:
            r[k] = min(nbr)
    d = (b.max(axis=0) - b.min(axis=0))[order]
    return BoundInputs(r=r, d=d, m=profile.m, order=tuple(int(x) + 1 for x in order))


def theoretical_bound(t: int, inputs: BoundInputs) -> float:
    """Tail bound ``4 m lambda2^t sum_j (d_j / r_j)^2`` on P(T > t)."""
    if inputs.degenerate:
        raise DegenerateGapError("degenerate gaps: tied average scores make the bound inapplicable")
    lam = inputs.lambda2
    if lam is None:
        raise ValidationError("lambda2 is required")
    if not 0.0 <= lam < 1.0:
        raise ValidationError(f"lambda2 must lie in [0, 1), got {lam}")
    if t < 0:
        raise ValidationError("t must be nonnegative")
    ratio = float(np.sum((inputs.d / inputs.r) ** 2))
    return 4.0 * inputs.m * lam**t * ratio


class TailPoint(NamedTuple):
    t: int
    tail: float
    wilson_lo: float
    wilson_hi: float


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    ci = binomtest(int(successes), int(trials)).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def tail_from_times(T: np.ndarray, t_grid: Sequence[int]) -> list[TailPoint]:
    out = []
    for t in t_grid:
        k = int(np.count_nonzero(T > t))
        lo, hi = wilson_interval(k, len(T))
        out.append(TailPoint(int(t), k / len(T), lo, hi))
    return out


def monte_carlo_tail(
    profile: Profile,
    network: GossipNetwork,
    trials: int,
    t_grid: Sequence[int],
    rng: np.random.Generator,
    t_max: int | None = None,
) -> list[TailPoint]:
    """Empirical P(T > t) with Wilson 95% intervals at each grid time.

    Trials still short of consensus at ``t_max`` count as ``T > t`` for all t.
    """
    if gap_and_spread(profile).degenerate:
        raise DegenerateGapError("degenerate gaps: tied average scores")
    t_grid = [int(t) for t in t_grid]
    if not t_grid:
        raise ValidationError("t_grid is empty")
    horizon = max(t_grid) if t_max is None else max(int(t_max), max(t_grid))
    batch = run_trials(profile, network, trials, horizon, rng)
    return tail_from_times(batch.T, t_grid)
