"""Closed-form ground truth for the shipped theories.

Nothing here touches the forking or rank searches; only the backends'
evaluation and quantifier elimination are used.

EREL rank table. Work over a finite set C of elements and classes and let
cls(C) be the classes named in C (class literals, plus the class of every
element). Forking chains for a single element e are:

* e in C: no forking extension, rank 0;
* cl(e) in cls(C), e not in C: the only forking extension makes e
  algebraic (e = d for a new parameter d), rank 1;
* cl(e) not in cls(C): first fix the class (cl(x) = d), then the element,
  rank 2; nothing longer exists since each step must make a new coordinate
  of (cl(e), e) algebraic.

A class variable u has rank 0 if u is in cls(C) and 1 otherwise. A tuple
is ranked coordinate by coordinate, each over C plus the earlier
coordinates (additivity for finite ranks). EQ and DLO are the same
computation with a single sort and rank 1 for a new element: acl is the
identity there.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .formula import CLASS, Const, Exists, Forall, Formula, Implies, Lt, Var, conj, free_vars, substitute
from .theories import TheoryError, TypeDesc, get_theory


@dataclass(frozen=True)
class OracleReport:
    query: dict
    verdict: object
    rule: str


def _classes(cs: Iterable[Const]) -> set[int]:
    return {c.value if c.sort == CLASS else c.value[0] for c in cs}


def oracle_rank(theory, a: Sequence[Const], base: Iterable[Const]) -> int:
    """Closed-form U-rank (equivalently dimension) of tp(a/base)."""
    name = get_theory(theory).name
    known = set(base)
    total = 0
    for c in a:
        if name == "erel":
            if c in known:
                r = 0
            elif c.sort == CLASS:
                r = 0 if c.value in _classes(known) else 1
            else:
                r = 1 if c.value[0] in _classes(known) else 2
        else:
            r = 0 if c in known else 1
        total += r
        known.add(c)
    return total


def oracle_indep(theory, a: Sequence[Const], b: Sequence[Const], base: Iterable[Const]) -> bool:
    th = get_theory(theory)
    base = set(base)
    if th.name == "eq":
        return (set(a) & set(b)) <= base
    return oracle_rank(th, a, base | set(b)) == oracle_rank(th, a, base)


def oracle_indep_report(theory, a, b, base) -> OracleReport:
    th = get_theory(theory)
    rule = {
        "eq": "acl-disjointness",
        "dlo": "dimension preservation",
        "erel": "U-rank preservation (closed-form table)",
    }[th.name]
    query = {
        "a": [th.render_element(c) for c in a],
        "b": [th.render_element(c) for c in b],
        "base": [th.render_element(c) for c in base],
    }
    return OracleReport(query, oracle_indep(th, a, b, base), rule)


def oracle_dim(f: Formula, variables: Sequence[Var] | None = None) -> int:
    """o-minimal dimension of the subset of Q^n defined by ``f`` in DLO.

    Projects away the last variable: dim S = max(dim pr(S), 1 + dim I)
    where I is the set of points whose fiber contains an open interval (a
    definable subset of Q is infinite iff it contains one).
    """
    th = get_theory("dlo")
    if variables is None:
        variables = sorted(free_vars(f), key=lambda v: v.name)
    variables = tuple(variables)
    if free_vars(f) - set(variables):
        raise TheoryError("formula has free variables outside the designated tuple")
    f = th.qe(f)
    if not th.satisfiable(f):
        raise TheoryError("oracle_dim needs a consistent formula")
    return _dim(th, f, variables)


def _dim(th, f: Formula, variables: tuple) -> int:
    if not th.satisfiable(f):
        return -1
    if not variables:
        return 0
    *rest, v = variables
    rest = tuple(rest)
    proj = th.qe(Exists((v,), f))
    u, w, t = Var("_u"), Var("_w"), Var("_t")
    fiber = substitute(f, {v: t})
    interval = th.qe(
        Exists((u, w), conj([Lt(u, w), Forall((t,), Implies(conj([Lt(u, t), Lt(t, w)]), fiber))]))
    )
    return max(_dim(th, proj, rest), 1 + _dim(th, interval, rest))


def oracle_uth(t: TypeDesc) -> int:
    th = get_theory(t.theory)
    if th.name == "dlo":
        return oracle_dim(t.formula, t.variables)
    r = th.realize_type(t)
    return oracle_rank(th, r, t.base)
