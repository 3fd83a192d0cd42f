"""Seeded instance corpora shared by the suites and the acceptance tests."""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Iterator

from .formula import CLASS, Const, Formula
from .theories import get_theory

POOLS = {
    "eq": [Const(i) for i in range(5)],
    "dlo": [Const(Fraction(v)) for v in ("-1", "0", "1/2", "1", "2")],
    "erel": [Const(v) for v in ((0, 0), (0, 1), (1, 0), (1, 1), (2, 0))],
}
CLASSES = [Const(i, CLASS) for i in range(3)]


def _element(name: str, rng: random.Random) -> Const:
    if name == "erel" and rng.random() < 0.15:
        return rng.choice(CLASSES)
    return rng.choice(POOLS[name])


def _tuple(name: str, rng: random.Random, n: int) -> tuple[Const, ...]:
    return tuple(_element(name, rng) for _ in range(n))


def triples(theory, seed: int, count: int, max_arity: int = 2, max_base: int = 2) -> list[tuple]:
    """(a, b, base) with tuple arities in 1..max_arity and |base| <= max_base."""
    name = get_theory(theory).name
    rng = random.Random(f"{name}:{seed}")
    out = []
    for _ in range(count):
        a = _tuple(name, rng, rng.randint(1, max_arity))
        b = _tuple(name, rng, rng.randint(1, max_arity))
        base = tuple(sorted(set(_tuple(name, rng, rng.randint(0, max_base))), key=_key))
        out.append((a, b, base))
    return out


def _key(c: Const):
    return (c.sort, c.value)


def symmetry_corpus(theory, seed: int = 42, count: int = 200) -> list[tuple]:
    return triples(theory, seed, count)


def type_corpus(theory, seed: int = 5, count: int = 50, max_arity: int = 2, max_base: int = 2) -> list:
    """Distinct complete types tp(a/base), up to relabelling. When the
    draws keep repeating (EQ has few small types) the arity and base bounds
    grow by one, up to 4."""
    th = get_theory(theory)
    rng = random.Random(f"types:{th.name}:{seed}")
    seen = set()
    out = []
    attempts = misses = 0
    while len(out) < count and attempts < 50 * count:
        attempts += 1
        if misses >= 100 and max(max_arity, max_base) < 4:
            max_arity, max_base = min(max_arity + 1, 4), min(max_base + 1, 4)
            misses = 0
        a = _tuple(th.name, rng, rng.randint(1, max_arity))
        base = frozenset(_tuple(th.name, rng, rng.randint(0, max_base)))
        m = th.relabel(sorted(base, key=_key) + list(a))
        key = (frozenset(m[c] for c in base), tuple(m[c] for c in a))
        if key in seen:
            misses += 1
            continue
        misses = 0
        seen.add(key)
        out.append(th.type_of(a, base))
    return out


# DLO definable sets in up to three variables with at most four parameters.
DLO_SETS = [
    "x = 0",
    "x < 0",
    "0 < x & x < 1",
    "x = 0 | x = 1",
    "x < 0 | x = 1",
    "x != 1/2",
    "x = 2 | 0 < x & x < 1",
    "x < -1 | x = 0 | 1 < x & x < 2",
    "x = x",
    "x1 < x2",
    "x1 = x2",
    "x1 = 0 & x2 = 1",
    "x1 = 0 & 0 < x2",
    "x1 < x2 & x2 < 1",
    "x1 = x2 | x1 = 0",
    "x1 = 1/2 & x2 = 1/2",
    "x1 < 0 & x2 = x1",
    "0 < x1 & x1 < 1 & 0 < x2 & x2 < 1",
    "x1 = 0 | x2 = 0",
    "x1 = 0 & x2 = 0 | x1 < x2",
    "x1 < 0 & x2 = 1 | x1 = -1 & x2 = 2",
    "x1 != x2",
    "x1 < x2 -> x2 = 1",
    "exists y. x1 < y & y < x2",
    "forall y. y < x1 | x2 < y",
    "x1 = 2 & x2 < -1",
    "x2 = 1 & x1 = 1",
    "0 < x1 & x1 < x2 & x2 < 1",
    "x1 = 0 & x2 = 1/2 | x1 = 1 & x2 = 2",
    "x1 < -1 & 2 < x2",
    "x1 = x2 & x2 = x3",
    "x1 < x2 & x2 < x3",
    "x1 = 0 & x2 = 1 & x3 = 2",
    "x1 = x2 & x3 = 0",
    "x1 < x2 & x3 = x1",
    "x1 = 0 | x2 = 1 | x3 = 2",
    "x1 = 0 & x2 = 1 & 0 < x3 & x3 < 1",
    "x1 = x2 & x2 < x3 & x3 < 0",
    "x1 = 1/2 & x2 = x3",
    "x1 < 0 & x2 = 0 & x3 = 1",
    "x1 = 0 & x2 = 0 | x3 = 1",
    "x1 = x3 & x2 = 2",
    "0 < x1 & x1 < 1 & x2 = 1 & x3 = 2",
    "x1 = -1 & x2 = 0 & x3 = 1 | x1 < x2",
    "exists y. y < x1 & x2 < y & x3 = y",
    "x1 = x2 | x2 = x3",
    "x1 != x2 & x2 = 0 & x3 = 0",
    "x1 = 2 & x2 = 2 & x3 = 2",
    "-1 < x1 & x1 < 0 & x2 = x1 & x3 = 1/2",
    "x1 = 0 & (x2 = 1 | x2 = 2) & x3 = x2",
    "x < 2 & -1 < x & x != 0 & x != 1",
    "x1 < x2 & x2 < 0 & x3 = -1",
]


def dlo_sets() -> list[Formula]:
    th = get_theory("dlo")
    return [th.parse(s) for s in DLO_SETS]


def iter_theories() -> Iterator[str]:
    yield from ("eq", "dlo", "erel")
