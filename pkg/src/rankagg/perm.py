"""Permutations in one-line notation, Kendall's tau and betweenness.

A ranking over objects ``1..n`` is stored by rank: ``entries[k-1]`` is the
object placed at rank ``k``.  The rank of object ``j`` is therefore
``inverse(p)(j)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from rankagg.errors import ValidationError


@dataclass(frozen=True)
class Permutation:
    entries: tuple[int, ...]

    def __init__(self, entries: Iterable[int]):
        entries = tuple(int(x) for x in entries)
        n = len(entries)
        if n < 1:
            raise ValidationError("a permutation needs at least one entry")
        if sorted(entries) != list(range(1, n + 1)):
            raise ValidationError(f"{entries} is not a bijection on 1..{n}")
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return len(self.entries)

    def __call__(self, k: int) -> int:
        return self.entries[k - 1]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, idx):
        return self.entries[idx]

    def __mul__(self, other: "Permutation") -> "Permutation":
        return compose(self, other)

    def __str__(self) -> str:
        return " ".join(map(str, self.entries))

    def ranks(self) -> tuple[int, ...]:
        """Rank of each object, 0-based positions indexed by 0-based object."""
        out = [0] * len(self.entries)
        for pos, obj in enumerate(self.entries):
            out[obj - 1] = pos
        return tuple(out)


@dataclass(frozen=True)
class AdjacentTransposition:
    """Swap of the objects at ranks ``a`` and ``a + 1``."""

    a: int
    n: int

    def __post_init__(self):
        if not 1 <= self.a <= self.n - 1:
            raise ValidationError(f"adjacent transposition ({self.a} {self.a + 1}) outside 1..{self.n}")

    def as_permutation(self) -> Permutation:
        e = list(range(1, self.n + 1))
        e[self.a - 1], e[self.a] = e[self.a], e[self.a - 1]
        return Permutation(e)

    def apply(self, p: Permutation) -> Permutation:
        """Right-multiply: returns ``p * (a a+1)``."""
        entries = list(p.entries)
        entries[self.a - 1], entries[self.a] = entries[self.a], entries[self.a - 1]
        return Permutation(entries)


@dataclass(frozen=True)
class DisagreementProfile:
    counts: tuple[int, ...]
    pairs: int


def _check_same_n(*perms: Permutation) -> int:
    ns = {p.n for p in perms}
    if len(ns) != 1:
        raise ValidationError(f"permutations have mismatched sizes {sorted(ns)}")
    return ns.pop()


def as_permutation(p: Permutation | Sequence[int]) -> Permutation:
    return p if isinstance(p, Permutation) else Permutation(p)


def identity(n: int) -> Permutation:
    if n < 1:
        raise ValidationError("identity needs n >= 1")
    return Permutation(range(1, n + 1))


def compose(p: Permutation, q: Permutation) -> Permutation:
    """Return ``p o q`` with ``(p o q)(k) = p(q(k))``.

    Right-multiplying by an adjacent transposition swaps two ranks;
    left-multiplying relabels objects.
    """
    _check_same_n(p, q)
    return Permutation(p.entries[k - 1] for k in q.entries)


def inverse(p: Permutation) -> Permutation:
    return Permutation(r + 1 for r in p.ranks())


def _disagreeing_pairs(p: Permutation, q: Permutation):
    rp, rq = p.ranks(), q.ranks()
    for a, b in combinations(range(p.n), 2):
        if (rp[a] < rp[b]) != (rq[a] < rq[b]):
            yield a, b


def kendall_tau(p: Permutation, q: Permutation) -> int:
    """Number of object pairs on which ``p`` and ``q`` disagree."""
    _check_same_n(p, q)
    return sum(1 for _ in _disagreeing_pairs(p, q))


def disagreement_profile(p: Permutation, q: Permutation) -> DisagreementProfile:
    """Per-object disagreement counts ``I_i(p, q)`` (index ``i-1`` holds object ``i``)."""
    n = _check_same_n(p, q)
    counts = [0] * n
    pairs = 0
    for a, b in _disagreeing_pairs(p, q):
        counts[a] += 1
        counts[b] += 1
        pairs += 1
    return DisagreementProfile(tuple(counts), pairs)


def is_between(p: Permutation, w: Permutation, q: Permutation) -> bool:
    """True iff ``w`` agrees with ``p`` or with ``q`` on every object pair."""
    _check_same_n(p, w, q)
    rp, rw, rq = p.ranks(), w.ranks(), q.ranks()
    for a, b in combinations(range(p.n), 2):
        ow = rw[a] < rw[b]
        if ow != (rp[a] < rp[b]) and ow != (rq[a] < rq[b]):
            return False
    return True


def cycle_count(p: Permutation) -> int:
    seen = [False] * p.n
    cycles = 0
    for start in range(p.n):
        if seen[start]:
            continue
        cycles += 1
        k = start
        while not seen[k]:
            seen[k] = True
            k = p.entries[k] - 1
    return cycles


def random_permutation(n: int, rng) -> Permutation:
    """Uniform draw from S_n.

    ``rng`` may be a ``random.Random`` or a ``numpy.random.Generator``.
    """
    if n < 1:
        raise ValidationError("random_permutation needs n >= 1")
    if hasattr(rng, "permutation"):
        return Permutation(int(x) + 1 for x in rng.permutation(n))
    entries = list(range(1, n + 1))
    rng.shuffle(entries)
    return Permutation(entries)
