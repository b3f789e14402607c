"""Text formats for rankings, weights and gossip networks.

All formats are line oriented; blank lines and lines starting with ``#``
are ignored.
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from rankagg.distance import AdjacentWeightFunction, TranspositionWeightTable
from rankagg.errors import ValidationError
from rankagg.gossip import GossipNetwork
from rankagg.perm import Permutation


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def _read(path) -> str:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"no such file: {path}")
    return path.read_text()


def _number(token: str, lineno: int) -> float:
    try:
        return float(Fraction(token))
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"line {lineno}: {token!r} is not a number") from None


def parse_ranking(tokens) -> Permutation:
    try:
        entries = [int(tok) for tok in tokens]
    except ValueError as exc:
        raise ValidationError(f"ranking must contain integers: {exc}") from None
    return Permutation(entries)


def parse_rankings(text: str) -> list[Permutation]:
    """One ranking per line, most-preferred object first, e.g. ``4 3 1 2``."""
    out = []
    for lineno, line in _lines(text):
        try:
            out.append(parse_ranking(line.split()))
        except ValidationError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
    return out


def read_rankings(path) -> list[Permutation]:
    return parse_rankings(_read(path))


def format_ranking(p: Permutation) -> str:
    return " ".join(str(x) for x in p.entries)


def format_rankings(perms) -> str:
    return "".join(format_ranking(p) + "\n" for p in perms)


def parse_values(text: str) -> list[float]:
    values = []
    for lineno, line in _lines(text):
        parts = line.split()
        if len(parts) != 1:
            raise ValidationError(f"line {lineno}: expected a single number")
        values.append(_number(parts[0], lineno))
    return values


def read_adjacent_weights(path) -> AdjacentWeightFunction:
    """``n - 1`` lines, line ``a`` holding the weight of ``(a a+1)``."""
    return AdjacentWeightFunction(parse_values(_read(path)))


def read_values(path) -> list[float]:
    return parse_values(_read(path))


def parse_transposition_table(text: str, n: int) -> TranspositionWeightTable:
    """Lines ``a b w`` giving the weight of transposition ``(a b)``."""
    entries = {}
    for lineno, line in _lines(text):
        parts = line.split()
        if len(parts) != 3:
            raise ValidationError(f"line {lineno}: expected 'a b w'")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValidationError(f"line {lineno}: positions must be integers") from None
        key = (min(a, b), max(a, b))
        if key in entries:
            raise ValidationError(f"line {lineno}: duplicate entry for ({a} {b})")
        entries[key] = _number(parts[2], lineno)
    return TranspositionWeightTable(n, entries)


def read_transposition_table(path, n: int) -> TranspositionWeightTable:
    return parse_transposition_table(_read(path), n)


def parse_network(text: str) -> GossipNetwork:
    """First line ``m``, then ``i j p`` per edge with 1-based agents.

    Probabilities may be decimals or fractions such as ``1/3``; they must sum
    to 1 within 1e-12.
    """
    lines = list(_lines(text))
    if not lines:
        raise ValidationError("network file is empty")
    lineno, first = lines[0]
    try:
        m = int(first)
    except ValueError:
        raise ValidationError(f"line {lineno}: expected the agent count") from None
    edges, probs = [], []
    for lineno, line in lines[1:]:
        parts = line.split()
        if len(parts) != 3:
            raise ValidationError(f"line {lineno}: expected 'i j p'")
        try:
            i, j = int(parts[0]), int(parts[1])
            p = Fraction(parts[2])
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"line {lineno}: malformed edge") from None
        edges.append((i - 1, j - 1))
        probs.append(float(p))
    return GossipNetwork(m, edges, probs)


def read_network(path) -> GossipNetwork:
    return parse_network(_read(path))


def format_network(net: GossipNetwork) -> str:
    lines = [str(net.m)]
    lines += [f"{i + 1} {j + 1} {p!r}" for (i, j), p in zip(net.edges, net.probs.tolist())]
    return "\n".join(lines) + "\n"
