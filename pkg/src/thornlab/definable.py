"""Definable families of formulas and the exact checks built on them:
k-inconsistency, algebraicity of types and families of conjugates."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .formula import (
    ATOMS,
    CLASS,
    And,
    Bottom,
    Cl,
    Const,
    Eq,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    SameClass,
    Top,
    Var,
    all_vars,
    conj,
    constants,
    disj,
    free_vars,
    is_quantifier_free,
    map_terms,
    substitute,
)
from .theories import Theory, TheoryError, get_theory


@dataclass(frozen=True)
class Family:
    """The family {delta(x, a') : a' satisfies pi}.

    ``pi`` mentions only the parameter variables ``y`` (plus element
    constants); ``delta`` mentions only ``x`` and ``y``.
    """

    theory: str
    delta: Formula
    x: tuple[Var, ...]
    y: tuple[Var, ...]
    pi: Formula

    def __post_init__(self):
        extra = free_vars(self.delta) - set(self.x) - set(self.y)
        if extra:
            raise TheoryError(f"delta has free variables outside x;y: {_names(extra)}")
        extra = free_vars(self.pi) - set(self.y)
        if extra:
            raise TheoryError(f"pi has free variables outside y: {_names(extra)}")

    def render(self) -> str:
        th = get_theory(self.theory)
        return f"{{{th.render(self.delta)}}} over {th.render(self.pi)}"


def _names(vs: Iterable[Var]) -> str:
    return ", ".join(sorted(v.name for v in vs))


def split_vars(delta: Formula, params: Sequence[Var] | None = None) -> tuple[tuple[Var, ...], tuple[Var, ...]]:
    """Object and parameter variables of ``delta``. Unless given
    explicitly, parameter variables are the free ones whose name starts
    with ``y``."""
    fv = sorted(free_vars(delta), key=lambda v: v.name)
    if params is None:
        params = tuple(v for v in fv if v.name.startswith("y"))
    params = tuple(params)
    x = tuple(v for v in fv if v not in params)
    return x, params


def _fresh(stem: str, taken: set[str]) -> str:
    for i in itertools.count(1):
        name = f"{stem}{i}"
        if name not in taken:
            taken.add(name)
            return name
    raise AssertionError  # pragma: no cover


def conjugates_sentence(fam: Family, k: int) -> Formula:
    """Quantifier-free formula whose satisfiability says that ``k``
    pairwise distinct parameter tuples in ``pi`` give jointly consistent
    instances (all free variables read existentially)."""
    th = get_theory(fam.theory)
    delta = fam.delta if is_quantifier_free(fam.delta) else th.qe(fam.delta)
    pi = fam.pi if is_quantifier_free(fam.pi) else th.qe(fam.pi)
    taken = {v.name for v in all_vars(delta) | all_vars(pi)} | {v.name for v in fam.x + fam.y}
    copies = []
    parts = []
    for _ in range(k):
        ren = {y: Var(_fresh(f"{y.name}_", taken), y.sort) for y in fam.y}
        copies.append(ren)
        parts.append(substitute(pi, ren))
        parts.append(substitute(delta, ren))
    for r1, r2 in itertools.combinations(copies, 2):
        parts.append(disj([Not(Eq(r1[y], r2[y])) for y in fam.y]))
    return conj(parts)


def fiber_bound(fam: Family) -> int | None:
    """Largest number of members of the family sharing a common solution,
    or None when some point lies in infinitely many.

    The structures are homogeneous, so the number of b satisfying
    pi(y) & delta(e, y) depends only on the type of e over the constants of
    delta and pi; one realization per such type suffices.
    """
    got = _FIBER_CACHE.get(fam, _MISSING)
    if got is _MISSING:
        got = _FIBER_CACHE[fam] = _fiber_bound(fam)
    return got


_FIBER_CACHE: dict = {}
_MISSING = object()


def _fiber_bound(fam: Family) -> int | None:
    th = get_theory(fam.theory)
    P = frozenset(constants(fam.delta)) | frozenset(constants(fam.pi))
    # object variables absent from delta do not affect the count
    x = tuple(v for v in fam.x if v in free_vars(fam.delta))
    best = 0
    for e in representatives(th, x, P):
        f = conj([fam.pi, substitute(fam.delta, dict(zip(x, e)))])
        n = th.solution_count(f, fam.y)
        if n.infinite:
            return None
        best = max(best, n.n)
    return best


def representatives(th: Theory, x: Sequence[Var], P: Iterable[Const]) -> Iterable[tuple[Const, ...]]:
    """Tuples realizing every type of ``x`` over ``P`` (with repetitions),
    chosen one coordinate at a time from the 1-type representatives over
    ``P`` plus the earlier coordinates."""
    P = frozenset(P)

    def go(i: int, prefix: tuple):
        if i == len(x):
            yield prefix
            return
        for c in th.one_types(x[i].sort, P | set(prefix)):
            yield from go(i + 1, prefix + (c,))

    return go(0, ())


def clear_caches() -> None:
    _FIBER_CACHE.clear()


def k_inconsistent(fam: Family, k: int) -> bool:
    """Whether every ``k`` distinct members of the family are jointly
    inconsistent (vacuously true when ``pi`` has fewer than ``k``
    solutions)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    bound = fiber_bound(fam)
    return bound is not None and bound < k


def k_inconsistent_tableau(fam: Family, k: int) -> bool:
    """Same answer as :func:`k_inconsistent`, decided by satisfiability of
    the k-copy sentence. Exponential in k; kept as a cross-check."""
    if k < 1:
        raise ValueError("k must be at least 1")
    th = get_theory(fam.theory)
    return not th.satisfiable(conjugates_sentence(fam, k))


def min_k(fam: Family, k_max: int = 6) -> int | None:
    """Least k in 2..k_max with the family k-inconsistent, else None."""
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    bound = fiber_bound(fam)
    if bound is None:
        return None
    k = max(2, bound + 1)
    return k if k <= k_max else None


def is_algebraic(theory: str | Theory, a: Sequence[Const], base: Iterable[Const]) -> bool:
    th = get_theory(theory)
    return th.is_algebraic_type(th.type_of(tuple(a), base))


def family_of_conjugates(
    theory: str | Theory,
    delta: Formula,
    a: Sequence[Const],
    base: Iterable[Const],
    params: Sequence[Var] | None = None,
) -> Family:
    """{delta(x, a') : a' realizes tp(a/base)}, with pi the isolating
    formula of that type."""
    th = get_theory(theory)
    x, y = split_vars(delta, params)
    a = tuple(a)
    if len(a) != len(y):
        raise TheoryError(f"{len(y)} parameter variables but {len(a)} values")
    t = th.type_of(a, base, y)
    return Family(th.name, delta, x, y, t.formula)


# ------------------------------------------------------ canonical parameters


@dataclass(frozen=True)
class Instance:
    """A formula delta(x, a) written with explicit parameter variables:
    ``formula`` mentions ``params`` where the original had ``values``."""

    formula: Formula
    x: tuple[Var, ...]
    params: tuple[Var, ...]
    values: tuple[Const, ...]

    def instantiate(self) -> Formula:
        return substitute(self.formula, dict(zip(self.params, self.values)))


def _unfold_classes(th: Theory, f: Formula) -> Formula:
    """E(s, t) becomes cl(s) = cl(t); cl of a literal becomes the class
    literal."""
    if isinstance(f, SameClass):
        f = Eq(Cl(f.left), Cl(f.right))
    if isinstance(f, ATOMS):
        return map_terms(f, th.norm_term)
    if isinstance(f, (Top, Bottom)):
        return f
    if isinstance(f, Not):
        return Not(_unfold_classes(th, f.arg))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_unfold_classes(th, a) for a in f.args))
    if isinstance(f, Implies):
        return Implies(_unfold_classes(th, f.left), _unfold_classes(th, f.right))
    if isinstance(f, (Exists, Forall)):
        return type(f)(f.vars, _unfold_classes(th, f.body))
    raise TypeError(f)


def canonical_instance(theory: str | Theory, f: Formula, base: Iterable[Const]) -> Instance:
    """Abstract every parameter of ``f`` outside ``base``.

    An element that only occurs under ``cl`` is replaced by its class, so
    the parameter is the imaginary the formula really depends on (the
    class sort plays the role of the quotient).
    """
    th = get_theory(theory)
    base = frozenset(base)
    g = _unfold_classes(th, f)
    values = tuple(c for c in constants(g) if c not in base)
    taken = {v.name for v in all_vars(g)}
    params = tuple(Var(_fresh("p", taken), c.sort) for c in values)
    mapping = dict(zip(values, params))
    g = map_terms(g, lambda t: mapping.get(t, t) if isinstance(t, Const) else t)
    x = tuple(sorted(free_vars(f), key=lambda v: v.name))
    return Instance(g, x, params, values)


__all__ = [
    "CLASS",
    "Family",
    "Instance",
    "canonical_instance",
    "conjugates_sentence",
    "family_of_conjugates",
    "is_algebraic",
    "k_inconsistent",
    "min_k",
    "split_vars",
]
