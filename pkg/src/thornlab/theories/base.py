"""Shared machinery for the decidable backends.

A backend supplies four theory-specific pieces:

* literal normalization and exact consistency of a conjunction of literals,
* elimination of one existential variable from a conjunction of literals,
* representatives of every 1-type over a finite set of elements, ordered by
  the deterministic fresh-element rule,
* the atomic diagram of a tuple over a finite base (the isolating formula).

Everything else (DNF-based quantifier elimination, evaluation in the
canonical model, tableau satisfiability, counting, type enumeration and
realization) is generic and lives here.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from ..formula import (
    ATOMS,
    FALSE,
    TRUE,
    And,
    Bottom,
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
    Signature,
    Term,
    Top,
    Var,
    conj,
    constants,
    disj,
    free_vars,
    is_quantifier_free,
    neg,
    parse,
    render,
    substitute,
)


class TheoryError(ValueError):
    pass


class NotClosedError(TheoryError):
    pass


class TypeExhaustedError(TheoryError):
    """An algebraic type has no realization outside the avoid set."""


@dataclass(frozen=True)
class SolutionCount:
    """``Finite(n, witnesses)`` when ``witnesses`` is not None, else Infinite."""

    witnesses: tuple | None

    @property
    def infinite(self) -> bool:
        return self.witnesses is None

    @property
    def n(self) -> int | None:
        return None if self.witnesses is None else len(self.witnesses)

    def __repr__(self):
        if self.infinite:
            return "Infinite"
        return f"Finite({self.n}, {list(self.witnesses)!r})"


INFINITE = SolutionCount(None)


@dataclass(frozen=True)
class TypeDesc:
    """A complete type over a finite base, given by an isolating
    quantifier-free formula in ``variables``."""

    theory: str
    variables: tuple[Var, ...]
    base: frozenset
    formula: Formula

    def render(self) -> str:
        from . import get_theory

        return render(self.formula, get_theory(self.theory).sig)

    def __repr__(self):
        return f"TypeDesc({self.theory}: {self.render()} over {sorted(map(repr, self.base))})"


def _term_key(t: Term):
    if isinstance(t, Var):
        return (0, t.sort, t.name)
    if isinstance(t, Const):
        v = t.value
        return (1, t.sort, v)
    return (2,) + _term_key(t.arg)


def lit_key(lit: Formula):
    if isinstance(lit, Not):
        return (1,) + lit_key(lit.arg)[1:]
    return (0, type(lit).__name__, _term_key(lit.left), _term_key(lit.right))


def is_literal(f: Formula) -> bool:
    return isinstance(f, ATOMS) or (isinstance(f, Not) and isinstance(f.arg, ATOMS))


class Theory:
    name: str
    sig: Signature
    #: upper bound on how many rank levels one coordinate of each sort adds
    rank_per_sort: dict[str, int]

    def __init__(self):
        self._qe_cache: dict = {}
        self._sat_cache: dict = {}
        self._cons_cache: dict = {}

    # ---------------------------------------------------------- syntax

    def parse(self, text: str, sorts=None) -> Formula:
        return parse(text, self.sig, sorts)

    def render(self, f: Formula) -> str:
        return render(f, self.sig)

    def element(self, text: str) -> Const:
        return self.sig.literal(text.strip())

    def elements(self, text: str) -> tuple[Const, ...]:
        """Parse a comma separated list of element literals."""
        return tuple(self.element(t) for t in text.split(",") if t.strip())

    def render_element(self, c: Const) -> str:
        return self.sig.render_literal(c)

    # ------------------------------------------------ theory-specific hooks

    def norm_term(self, t: Term) -> Term:
        return t

    def consistent(self, lits: Sequence[Formula]) -> bool:  # pragma: no cover
        raise NotImplementedError

    def eliminate(self, v: Var, lits: frozenset) -> list[frozenset]:  # pragma: no cover
        raise NotImplementedError

    def eval_atom(self, atom: Formula) -> bool:  # pragma: no cover
        raise NotImplementedError

    def one_types(self, sort: str, known: Iterable[Const], avoid: Iterable[Const] = ()) -> list[Const]:
        """Representatives of all 1-types of ``sort`` over ``known``:
        non-algebraic ones first (chosen outside ``avoid`` by the fresh rule),
        then the elements of ``known`` itself."""
        raise NotImplementedError  # pragma: no cover

    def diagram(self, values: Sequence[Const], variables: Sequence[Var], base: frozenset) -> Formula:
        raise NotImplementedError  # pragma: no cover

    def determined(self, lits: Sequence[Formula], variables: Sequence[Var]) -> dict[Var, Const] | None:
        """For a consistent conjunction, the variables forced to a constant."""
        raise NotImplementedError  # pragma: no cover

    def relabel(self, elements: Sequence[Const]) -> dict[Const, Const]:
        """An order/class-preserving injection of ``elements`` onto small
        canonical labels; it extends to an automorphism of the model."""
        raise NotImplementedError  # pragma: no cover

    def acl(self, elements: Iterable[Const]) -> frozenset:
        return frozenset(elements)

    # ----------------------------------------------- literal normalization

    def norm_atom(self, a: Formula) -> Formula:
        """Normalize a positive atom to a canonical literal, TRUE or FALSE."""
        if isinstance(a, SameClass):
            a = Eq(Cl(a.left), Cl(a.right))
        left = self.norm_term(a.left)
        right = self.norm_term(a.right)
        if isinstance(a, Eq):
            if left == right:
                return TRUE
            if isinstance(left, Const) and isinstance(right, Const):
                return TRUE if left == right else FALSE
            if _term_key(right) < _term_key(left):
                left, right = right, left
            return Eq(left, right)
        if isinstance(a, Lt):
            if left == right:
                return FALSE
            if isinstance(left, Const) and isinstance(right, Const):
                return TRUE if left.value < right.value else FALSE
            return Lt(left, right)
        raise TypeError(a)

    def nnf(self, f: Formula, positive: bool = True) -> Formula:
        """Negation normal form of a quantifier-free formula, over
        normalized literals."""
        if isinstance(f, Top):
            return TRUE if positive else FALSE
        if isinstance(f, Bottom):
            return FALSE if positive else TRUE
        if isinstance(f, ATOMS):
            a = self.norm_atom(f)
            if positive or isinstance(a, (Top, Bottom)):
                return a if positive else neg(a)
            return self.negate_atom(a)
        if isinstance(f, Not):
            return self.nnf(f.arg, not positive)
        if isinstance(f, And):
            parts = [self.nnf(a, positive) for a in f.args]
            return conj(parts) if positive else disj(parts)
        if isinstance(f, Or):
            parts = [self.nnf(a, positive) for a in f.args]
            return disj(parts) if positive else conj(parts)
        if isinstance(f, Implies):
            if positive:
                return disj([self.nnf(f.left, False), self.nnf(f.right, True)])
            return conj([self.nnf(f.left, True), self.nnf(f.right, False)])
        raise TheoryError("nnf expects a quantifier-free formula")

    def negate_atom(self, a: Formula) -> Formula:
        return Not(a)

    # -------------------------------------------------------------- DNF

    def cons(self, lits: frozenset) -> bool:
        got = self._cons_cache.get(lits)
        if got is None:
            got = self.consistent(list(lits))
            if len(self._cons_cache) > 500_000:
                self._cons_cache.clear()
            self._cons_cache[lits] = got
        return got

    def dnf(self, f: Formula) -> list[frozenset]:
        """Disjunctive normal form of a quantifier-free formula as a list of
        consistent literal sets (inconsistent partial products are pruned)."""
        return self._dnf(self.nnf(f))

    def _dnf(self, g: Formula) -> list[frozenset]:
        if isinstance(g, Top):
            return [frozenset()]
        if isinstance(g, Bottom):
            return []
        if isinstance(g, Or):
            out: list[frozenset] = []
            for a in g.args:
                out.extend(self._dnf(a))
            return _dedupe(out)
        if isinstance(g, And):
            acc = [frozenset()]
            # literals first: they prune the product early
            args = sorted(g.args, key=lambda a: 0 if is_literal(a) else 1)
            for a in args:
                part = self._dnf(a)
                nxt = []
                for c1 in acc:
                    for c2 in part:
                        c = c1 | c2
                        if self.cons(c):
                            nxt.append(c)
                acc = _dedupe(nxt)
                if not acc:
                    return []
            return acc
        lit = frozenset((g,))
        return [lit] if self.cons(lit) else []

    def dnf_formula(self, cubes: list[frozenset]) -> Formula:
        cubes = _subsumption(cubes)
        parts = [conj(sorted(c, key=lit_key)) for c in cubes]
        parts.sort(key=lambda p: render(p, self.sig))
        return disj(parts)

    # --------------------------------------------------------------- QE

    def qe(self, f: Formula) -> Formula:
        """A quantifier-free formula equivalent to ``f`` in the model."""
        got = self._qe_cache.get(f)
        if got is not None:
            return got
        out = self._qe(f)
        if len(self._qe_cache) > 100_000:
            self._qe_cache.clear()
        self._qe_cache[f] = out
        return out

    def _qe(self, f: Formula) -> Formula:
        if isinstance(f, (Top, Bottom)) or isinstance(f, ATOMS):
            self._check_atom(f)
            return f
        if isinstance(f, Not):
            return neg(self.qe(f.arg))
        if isinstance(f, And):
            return conj([self.qe(a) for a in f.args])
        if isinstance(f, Or):
            return disj([self.qe(a) for a in f.args])
        if isinstance(f, Implies):
            return disj([neg(self.qe(f.left)), self.qe(f.right)])
        if isinstance(f, Forall):
            return neg(self.qe(Exists(f.vars, Not(f.body))))
        if isinstance(f, Exists):
            body = self.qe(f.body)
            cubes = self.dnf(body)
            for v in reversed(f.vars):
                nxt: list[frozenset] = []
                for c in cubes:
                    if any(v in free_vars(l) for l in c):
                        for c2 in self.eliminate(v, c):
                            if self.cons(c2):
                                nxt.append(c2)
                    else:
                        nxt.append(c)
                cubes = _dedupe(nxt)
            return self.dnf_formula(cubes)
        raise TypeError(f"not a formula: {f!r}")

    def _check_atom(self, f: Formula) -> None:
        if isinstance(f, Lt) and "<" not in self.sig.relations:
            raise TheoryError(f"'<' is not supported by {self.name}")
        if isinstance(f, SameClass) and "E" not in self.sig.relations:
            raise TheoryError(f"E is not supported by {self.name}")

    def subst_lits(self, lits: Iterable[Formula], binding: dict) -> frozenset | None:
        """Substitute into literals and renormalize; None if a literal
        became false."""
        out = set()
        for l in lits:
            g = substitute(l, binding)
            g = self.nnf(g)
            if isinstance(g, Top):
                continue
            if isinstance(g, Bottom):
                return None
            out.add(g)
        return frozenset(out)

    # ------------------------------------------------------ satisfiability

    def satisfiable(self, f: Formula) -> bool:
        """Whether some assignment of the free variables satisfies ``f``."""
        if not is_quantifier_free(f):
            f = self.qe(f)
        got = self._sat_cache.get(f)
        if got is None:
            got = self._sat([self.nnf(f)], ())
            if len(self._sat_cache) > 200_000:
                self._sat_cache.clear()
            self._sat_cache[f] = got
        return got

    def _sat(self, todo: list, lits: tuple) -> bool:
        lit_list = list(lits)
        ors: list[Or] = []
        stack = list(todo)
        while stack:
            g = stack.pop()
            if isinstance(g, Top):
                continue
            if isinstance(g, Bottom):
                return False
            if isinstance(g, And):
                stack.extend(g.args)
            elif isinstance(g, Or):
                ors.append(g)
            else:
                lit_list.append(g)
        base = frozenset(lit_list)
        if not self.cons(base):
            return False
        if not ors:
            return True
        # prune literal disjuncts against the current literals, branch on
        # the most constrained disjunction
        best = None
        for o in ors:
            viable = [d for d in o.args if not is_literal(d) or self.cons(base | {d})]
            if not viable:
                return False
            if best is None or len(viable) < len(best[1]):
                best = (o, viable)
                if len(viable) == 1:
                    break
        o, viable = best
        rest = [x for x in ors if x is not o]
        lits = tuple(base)
        for d in viable:
            if self._sat([d] + rest, lits):
                return True
        return False

    def implies(self, f: Formula, g: Formula) -> bool:
        return not self.satisfiable(conj([f, neg(g)]))

    # ---------------------------------------------------------- evaluation

    def holds(self, f: Formula) -> bool:
        """Truth of a closed formula in the canonical model, by direct
        evaluation (quantifiers range over one representative per 1-type
        over the elements in play, which is exact by homogeneity)."""
        if free_vars(f):
            names = ", ".join(sorted(v.name for v in free_vars(f)))
            raise NotClosedError(f"holds needs a closed formula; free: {names}")
        return self._eval(f, {}, tuple(constants(f)))

    def _eval(self, f: Formula, env: dict, known: tuple) -> bool:
        if isinstance(f, Top):
            return True
        if isinstance(f, Bottom):
            return False
        if isinstance(f, ATOMS):
            self._check_atom(f)
            return self.eval_atom(substitute(f, env) if env else f)
        if isinstance(f, Not):
            return not self._eval(f.arg, env, known)
        if isinstance(f, And):
            return all(self._eval(a, env, known) for a in f.args)
        if isinstance(f, Or):
            return any(self._eval(a, env, known) for a in f.args)
        if isinstance(f, Implies):
            return (not self._eval(f.left, env, known)) or self._eval(f.right, env, known)
        want = isinstance(f, Exists)
        return self._quant(f.vars, f.body, env, known, want)

    def _quant(self, vs, body, env, known, want: bool) -> bool:
        v, rest = vs[0], vs[1:]
        for c in self.one_types(v.sort, known):
            env2 = dict(env)
            env2[v] = c
            k2 = known if c in known else known + (c,)
            if rest:
                r = self._quant(rest, body, env2, k2, want)
            else:
                r = self._eval(body, env2, k2)
            if r == want:
                return want
        return not want

    # ------------------------------------------------------------ counting

    def solution_count(self, f: Formula, variables: Sequence[Var]) -> SolutionCount:
        """Exact number of tuples for ``variables`` satisfying ``f``."""
        variables = tuple(variables)
        extra = free_vars(f) - set(variables)
        if extra:
            raise TheoryError(f"free variables outside the designated tuple: {sorted(v.name for v in extra)}")
        q = self.qe(f) if not is_quantifier_free(f) else f
        found = []
        for cube in self.dnf(q):
            det = self.determined(list(cube), variables)
            if det is None:
                continue
            if any(v not in det for v in variables):
                return INFINITE
            found.append(tuple(det[v] for v in variables))
        uniq = sorted(set(found), key=lambda t: [_term_key(c) for c in t])
        return SolutionCount(tuple(uniq))

    # --------------------------------------------------------------- types

    def type_of(self, values: Sequence[Const], base: Iterable[Const], variables: Sequence[Var] | None = None) -> TypeDesc:
        values = tuple(values)
        base = frozenset(base)
        if variables is None:
            variables = default_vars(values)
        variables = tuple(variables)
        if len(variables) != len(values):
            raise TheoryError("tuple and variable list differ in length")
        for v, c in zip(variables, values):
            if v.sort != c.sort:
                raise TheoryError(f"variable {v.name} has sort {v.sort} but value has sort {c.sort}")
        return TypeDesc(self.name, variables, base, self.diagram(values, variables, base))

    def enumerate_types(self, variables: Sequence[Var], base: Iterable[Const]) -> list[TypeDesc]:
        """All complete types of ``variables`` over ``base``."""
        base = frozenset(base)
        variables = tuple(variables)
        out = []
        for r in self._type_reps(variables, base):
            out.append(self.type_of(r, base, variables))
        return out

    def _type_reps(self, variables, base) -> list[tuple]:
        known0 = tuple(sorted(base, key=_term_key))
        reps = [((), known0)]
        for v in variables:
            nxt = []
            for r, known in reps:
                for c in self.one_types(v.sort, known):
                    nxt.append((r + (c,), known if c in known else known + (c,)))
            reps = nxt
        return [r for r, _ in reps]

    def realize_type(self, t: TypeDesc, avoid: Iterable[Const] = ()) -> tuple[Const, ...]:
        """Deterministic realization of ``t`` (fresh-element rule), disjoint
        from ``avoid`` in every non-algebraic coordinate."""
        avoid = frozenset(avoid)
        known = tuple(sorted(t.base | set(constants(t.formula)), key=_term_key))
        chosen: list[Const] = []
        f = t.formula
        for v in t.variables:
            for c in self.one_types(v.sort, known, avoid):
                g = substitute(f, {v: c})
                if self.satisfiable(g):
                    chosen.append(c)
                    f = g
                    if c not in known:
                        known = known + (c,)
                    break
            else:
                raise TheoryError(f"type {self.render(t.formula)} is inconsistent")
        out = tuple(chosen)
        if avoid and set(out) & avoid and not self.solution_count(t.formula, t.variables).infinite:
            raise TypeExhaustedError(f"algebraic type {self.render(t.formula)} is exhausted by the avoid set")
        return out

    def is_algebraic_type(self, t: TypeDesc) -> bool:
        return not self.solution_count(t.formula, t.variables).infinite


def default_vars(values: Sequence[Const], stem: str = "x") -> tuple[Var, ...]:
    if len(values) == 1:
        return (Var(stem, values[0].sort),)
    return tuple(Var(f"{stem}{i + 1}", c.sort) for i, c in enumerate(values))


def _dedupe(cubes: list[frozenset]) -> list[frozenset]:
    seen = set()
    out = []
    for c in cubes:
        if c not in seen:
            seen.add(c)
            out.append(c)
    return out


def _subsumption(cubes: list[frozenset]) -> list[frozenset]:
    cubes = sorted(_dedupe(cubes), key=len)
    kept: list[frozenset] = []
    for c in cubes:
        if not any(k <= c for k in kept):
            kept.append(c)
    return kept


class UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        p = self.parent
        if x not in p:
            p[x] = x
            return x
        root = x
        while p[root] != root:
            root = p[root]
        while p[x] != root:
            p[x], x = root, p[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb

    def groups(self) -> dict:
        out: dict = {}
        for x in list(self.parent):
            out.setdefault(self.find(x), []).append(x)
        return out
