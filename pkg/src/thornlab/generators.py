"""Seeded random generators for formulas, elements and instances."""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

from .formula import (
    CLASS,
    ELEM,
    And,
    Cl,
    Const,
    Eq,
    Exists,
    Forall,
    Formula,
    Implies,
    Lt,
    Not,
    Or,
    SameClass,
    Term,
    Var,
)
from .theories import Theory

ELEMENT_POOLS = {
    "eq": [Const(i) for i in range(5)],
    "dlo": [Const(Fraction(v)) for v in ("-1", "0", "1/2", "1", "2")],
    "erel": [Const(v) for v in ((0, 0), (0, 1), (1, 0), (1, 1), (2, 0))],
}

CLASS_POOL = [Const(i, CLASS) for i in range(3)]


def free_variables(theory: Theory) -> tuple[Var, ...]:
    if theory.name == "erel":
        return (Var("x"), Var("y"), Var("u", CLASS))
    return (Var("x"), Var("y"), Var("z"))


def random_element(theory: Theory, rng: random.Random, sort: str = ELEM) -> Const:
    if sort == CLASS:
        return rng.choice(CLASS_POOL)
    return rng.choice(ELEMENT_POOLS[theory.name])


def random_tuple(theory: Theory, rng: random.Random, n: int) -> tuple[Const, ...]:
    return tuple(random_element(theory, rng) for _ in range(n))


class FormulaGen:
    """Random well-sorted formulas with bounded quantifier depth and size."""

    def __init__(self, theory: Theory, rng: random.Random, max_qdepth: int = 3, max_atoms: int = 6):
        self.th = theory
        self.rng = rng
        self.max_qdepth = max_qdepth
        self.max_atoms = max_atoms
        self.counter = 0

    def formula(self, scope: Sequence[Var]) -> Formula:
        self.counter = 0
        self.budget = self.rng.randint(1, self.max_atoms)
        return self._f(list(scope), self.max_qdepth)

    def _term(self, scope, sort) -> Term:
        rng = self.rng
        vs = [v for v in scope if v.sort == sort]
        if sort == CLASS:
            options = []
            if vs:
                options.append(lambda: rng.choice(vs))
            options.append(lambda: rng.choice(CLASS_POOL))
            evs = [v for v in scope if v.sort == ELEM]
            options.append(lambda: Cl(rng.choice(evs) if evs and rng.random() < 0.7 else random_element(self.th, rng)))
            return rng.choice(options)()
        if vs and rng.random() < 0.75:
            return rng.choice(vs)
        return random_element(self.th, rng)

    def _atom(self, scope) -> Formula:
        rng = self.rng
        name = self.th.name
        if name == "dlo":
            kind = rng.choice(("eq", "lt", "lt"))
        elif name == "erel":
            kind = rng.choice(("eq", "ceq", "ceq", "same"))
        else:
            kind = "eq"
        if kind == "ceq":
            return Eq(self._term(scope, CLASS), self._term(scope, CLASS))
        a, b = self._term(scope, ELEM), self._term(scope, ELEM)
        if kind == "lt":
            return Lt(a, b)
        if kind == "same":
            return SameClass(a, b)
        return Eq(a, b)

    def _f(self, scope, qdepth) -> Formula:
        rng = self.rng
        if self.budget <= 1:
            self.budget -= 1
            return self._atom(scope)
        r = rng.random()
        if qdepth > 0 and r < 0.5:
            self.counter += 1
            sort = CLASS if self.th.name == "erel" and rng.random() < 0.3 else ELEM
            v = Var(f"v{self.counter}", sort)
            body = self._f(scope + [v], qdepth - 1)
            return (Exists if rng.random() < 0.5 else Forall)((v,), body)
        if r < 0.62:
            return Not(self._f(scope, qdepth))
        if r < 0.92:
            self.budget -= 1
            left_budget = max(1, self.budget // 2)
            saved = self.budget - left_budget
            self.budget = left_budget
            a = self._f(scope, qdepth)
            self.budget = max(1, saved)
            b = self._f(scope, qdepth)
            kind = rng.choice((And, Or, Or, Implies))
            if kind is Implies:
                return Implies(a, b)
            return kind((a, b))
        self.budget -= 1
        return self._atom(scope)


def random_assignment(theory: Theory, rng: random.Random, variables: Sequence[Var]) -> dict[Var, Const]:
    return {v: random_element(theory, rng, v.sort) for v in variables}
