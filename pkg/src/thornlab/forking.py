"""Strong dividing, thorn-dividing, thorn-forking and thorn-independence,
with re-checkable certificates, and thorn-Morley sequences."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .definable import Family, Instance, canonical_instance, k_inconsistent, min_k, split_vars
from . import definable
from .formula import (
    CLASS,
    ELEM,
    Bottom,
    Cl,
    Const,
    Eq,
    Forall,
    Formula,
    Implies,
    Lt,
    Not,
    Top,
    Var,
    conj,
    constants,
    disj,
    free_vars,
    map_constants,
    substitute,
    walk,
)
from .theories import Theory, TheoryError, TypeDesc, get_theory
from .theories.base import _term_key

YES = "yes"
NO = "no"
UNKNOWN = "unknown"


class InconsistentFormulaError(TheoryError):
    """Raised when a thorn-forking query is posed for an inconsistent formula."""


class MorleyError(TheoryError):
    pass


@dataclass(frozen=True)
class SearchBudget:
    witness_len: int = 2
    disjuncts: int = 4
    pool_depth: int = 1
    k_max: int = 6
    strict: bool = False

    def __post_init__(self):
        for name in ("witness_len", "disjuncts", "pool_depth"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.k_max < 2:
            raise ValueError("k_max must be at least 2")

    def bounds(self) -> dict:
        return {
            "witness_len": self.witness_len,
            "disjuncts": self.disjuncts,
            "pool_depth": self.pool_depth,
            "k_max": self.k_max,
            "strict": self.strict,
        }


DEFAULT_BUDGET = SearchBudget()


@dataclass(frozen=True)
class Decision:
    verdict: str
    cert: object = None
    bounds: dict = field(default_factory=dict)

    @property
    def yes(self) -> bool:
        return self.verdict == YES

    @property
    def no(self) -> bool:
        return self.verdict == NO

    @property
    def unknown(self) -> bool:
        return self.verdict == UNKNOWN


def _exhausted(budget: SearchBudget) -> Decision:
    return Decision(UNKNOWN if budget.strict else NO, None, budget.bounds())


# ------------------------------------------------------------ serialization


def _vars_to_json(vs: Sequence[Var]) -> list:
    return [{"name": v.name, "sort": v.sort} for v in vs]


def _vars_from_json(data) -> tuple[Var, ...]:
    return tuple(Var(d["name"], d["sort"]) for d in data)


def _sorts(vs: Iterable[Var]) -> dict:
    return {v.name: v.sort for v in vs}


def _elems_to_json(th: Theory, cs: Iterable[Const]) -> list:
    return [th.render_element(c) for c in cs]


def _elems_from_json(th: Theory, data) -> tuple[Const, ...]:
    return tuple(th.element(s) for s in data)


def _sorted_elems(cs: Iterable[Const]) -> tuple[Const, ...]:
    return tuple(sorted(set(cs), key=_term_key))


def _closure(x: Sequence[Var], f: Formula) -> Formula:
    return Forall(tuple(x), f) if x else f


# ------------------------------------------------------------ certificates


@dataclass(frozen=True)
class DivideCert:
    """Evidence that ``formula`` thorn-divides over ``base``: with the
    witness ``c``, the conjugates of the parameter tuple over base + c form
    a k-inconsistent family and the parameter type is non-algebraic."""

    theory: str
    formula: Formula
    base: tuple[Const, ...]
    witness: tuple[Const, ...]
    instance: Instance
    pi: Formula
    k: int

    def family(self) -> Family:
        i = self.instance
        return Family(self.theory, i.formula, i.x, i.params, self.pi)

    def verify(self) -> bool:
        th = get_theory(self.theory)
        i = self.instance
        if not i.params:
            return False
        same = conj([Implies(self.formula, i.instantiate()), Implies(i.instantiate(), self.formula)])
        if not th.holds(_closure(i.x, same)):
            return False
        t = th.type_of(i.values, set(self.base) | set(self.witness), i.params)
        if not th.satisfiable(conj([t.formula, self.pi])) or not th.implies(t.formula, self.pi):
            return False
        if not th.solution_count(self.pi, i.params).infinite:
            return False
        return k_inconsistent(self.family(), self.k)

    def elements(self) -> set:
        return set(constants(self.formula)) | set(self.base) | set(self.witness) | set(self.instance.values) | set(
            constants(self.pi)
        )

    def mapped(self, m: dict) -> "DivideCert":
        i = self.instance
        inst = Instance(map_constants(i.formula, m), i.x, i.params, tuple(m.get(c, c) for c in i.values))
        return DivideCert(
            self.theory,
            map_constants(self.formula, m),
            tuple(m.get(c, c) for c in self.base),
            tuple(m.get(c, c) for c in self.witness),
            inst,
            map_constants(self.pi, m),
            self.k,
        )

    def to_dict(self) -> dict:
        th = get_theory(self.theory)
        i = self.instance
        return {
            "kind": "divide",
            "theory": self.theory,
            "formula": th.render(self.formula),
            "x": _vars_to_json(i.x),
            "base": _elems_to_json(th, self.base),
            "witness": _elems_to_json(th, self.witness),
            "delta": th.render(i.formula),
            "params": _vars_to_json(i.params),
            "values": _elems_to_json(th, i.values),
            "pi": th.render(self.pi),
            "k": self.k,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DivideCert":
        th = get_theory(d["theory"])
        x = _vars_from_json(d["x"])
        params = _vars_from_json(d["params"])
        sorts = _sorts(x + params)
        inst = Instance(th.parse(d["delta"], sorts), x, params, _elems_from_json(th, d["values"]))
        return cls(
            th.name,
            th.parse(d["formula"], sorts),
            _elems_from_json(th, d["base"]),
            _elems_from_json(th, d["witness"]),
            inst,
            th.parse(d["pi"], sorts),
            int(d["k"]),
        )


@dataclass(frozen=True)
class ForkCert:
    """``phi`` implies the disjunction of ``disjuncts``, each of which
    thorn-divides over ``base``."""

    theory: str
    phi: Formula
    x: tuple[Var, ...]
    base: tuple[Const, ...]
    disjuncts: tuple[DivideCert, ...]

    def implication(self) -> Formula:
        return _closure(self.x, Implies(self.phi, disj([d.formula for d in self.disjuncts])))

    def verify(self) -> bool:
        th = get_theory(self.theory)
        if not self.disjuncts:
            return False
        for d in self.disjuncts:
            if set(d.base) != set(self.base) or not d.verify():
                return False
        return th.holds(self.implication())

    def elements(self) -> set:
        out = set(constants(self.phi)) | set(self.base)
        for d in self.disjuncts:
            out |= d.elements()
        return out

    def mapped(self, m: dict) -> "ForkCert":
        return ForkCert(
            self.theory,
            map_constants(self.phi, m),
            self.x,
            tuple(m.get(c, c) for c in self.base),
            tuple(d.mapped(m) for d in self.disjuncts),
        )

    def to_dict(self) -> dict:
        th = get_theory(self.theory)
        return {
            "kind": "fork",
            "theory": self.theory,
            "phi": th.render(self.phi),
            "x": _vars_to_json(self.x),
            "base": _elems_to_json(th, self.base),
            "disjuncts": [d.to_dict() for d in self.disjuncts],
            "implication": th.render(self.implication()),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForkCert":
        th = get_theory(d["theory"])
        x = _vars_from_json(d["x"])
        return cls(
            th.name,
            th.parse(d["phi"], _sorts(x)),
            x,
            _elems_from_json(th, d["base"]),
            tuple(DivideCert.from_dict(e) for e in d["disjuncts"]),
        )


def cert_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "divide":
        return DivideCert.from_dict(d)
    if kind == "fork":
        return ForkCert.from_dict(d)
    raise ValueError(f"unknown certificate kind {kind!r}")


# --------------------------------------------------------------- relabeling


def _canonical_map(th: Theory, elements: Iterable[Const]) -> dict[Const, Const]:
    return th.relabel(_sorted_elems(elements))


def transport(th: Theory, m: dict[Const, Const], extra: Iterable[Const]) -> dict[Const, Const]:
    """Extend the partial isomorphism ``m`` to ``extra`` by realizing the
    type of ``extra`` over dom(m) over the image of m."""
    extra = tuple(c for c in _sorted_elems(extra) if c not in m)
    if not extra:
        return dict(m)
    dom = frozenset(m)
    t = th.type_of(extra, dom)
    image = TypeDesc(th.name, t.variables, frozenset(m.values()), map_constants(t.formula, m))
    realized = th.realize_type(image, avoid=())
    out = dict(m)
    out.update(zip(extra, realized))
    return out


# ------------------------------------------------------------ witness pool


def witness_pool(th: Theory, elements: Iterable[Const], base: Iterable[Const], depth: int = 1) -> list[Const]:
    """Instance elements plus, per level, one fresh realization of every
    1-type over what is known so far. Base elements are left out."""
    base = frozenset(base)
    known = list(_sorted_elems(set(elements) | base))
    for _ in range(depth):
        added = []
        for sort in th.sig.sorts:
            for c in th.one_types(sort, known):
                if c not in known and c not in added:
                    added.append(c)
        known.extend(added)
    return [c for c in known if c not in base]


def witness_sets(pool: Sequence[Const], max_len: int) -> Iterable[tuple[Const, ...]]:
    for n in range(max_len + 1):
        yield from itertools.combinations(pool, n)


# --------------------------------------------------------- strong dividing


_STRONG_CACHE: dict = {}
_DIVIDES_NO_CACHE: set = set()
_FORKS_CACHE: dict = {}


def clear_caches() -> None:
    _STRONG_CACHE.clear()
    _DIVIDES_NO_CACHE.clear()
    _FORKS_CACHE.clear()
    definable.clear_caches()


def _instance_key(th: Theory, inst: Instance, base: frozenset, extra=()) -> tuple:
    m = _canonical_map(th, set(inst.values) | base)
    names = {v: Var(f"_o{i}", v.sort) for i, v in enumerate(inst.x)}
    names.update({v: Var(f"_p{i}", v.sort) for i, v in enumerate(inst.params)})
    f = substitute(map_constants(inst.formula, m), names)
    return (th.name, f, tuple(m[c] for c in inst.values), frozenset(m[c] for c in base)) + tuple(extra)


def _strong(th: Theory, inst: Instance, base: frozenset, k_max: int) -> tuple[bool, int | None, Formula | None]:
    """Strong dividing of a canonical instance over ``base``; also returns
    the isolating formula of the parameter type."""
    if not inst.params:
        return False, None, None
    t = th.type_of(inst.values, base, inst.params)
    key = _instance_key(th, inst, base, (k_max,))
    got = _STRONG_CACHE.get(key)
    if got is None:
        if th.is_algebraic_type(t):
            got = (False, None)
        else:
            k = min_k(Family(th.name, inst.formula, inst.x, inst.params, t.formula), k_max)
            got = (k is not None, k)
        _STRONG_CACHE[key] = got
    return got[0], got[1], t.formula


def _instance_of(th: Theory, delta: Formula, a: Sequence[Const], base: frozenset, params) -> tuple[Formula, Instance]:
    a = tuple(a)
    if a or params is not None:
        x, y = split_vars(delta, params)
        if len(y) != len(a):
            raise TheoryError(f"{len(y)} parameter variables but {len(a)} values")
        f = substitute(delta, dict(zip(y, a)))
    else:
        f = delta
    return f, canonical_instance(th, f, base)


def strongly_divides(
    theory: str | Theory,
    delta: Formula,
    a: Sequence[Const] = (),
    base: Iterable[Const] = (),
    params: Sequence[Var] | None = None,
    k_max: int = 6,
) -> tuple[bool, int | None]:
    """Whether delta(x, a) strongly divides over ``base``, with the least k."""
    th = get_theory(theory)
    base = frozenset(base)
    _, inst = _instance_of(th, delta, a, base, params)
    ok, k, _ = _strong(th, inst, base, k_max)
    return ok, k


def thorn_divides(
    theory: str | Theory,
    delta: Formula,
    a: Sequence[Const] = (),
    base: Iterable[Const] = (),
    budget: SearchBudget = DEFAULT_BUDGET,
    params: Sequence[Var] | None = None,
) -> Decision:
    """Search the witness pool for c with delta(x, a) strongly dividing
    over base + c."""
    th = get_theory(theory)
    base = frozenset(base)
    f, inst = _instance_of(th, delta, a, base, params)
    if not inst.params:
        return _exhausted(budget)
    key = _instance_key(th, inst, base, (budget.witness_len, budget.pool_depth, budget.k_max))
    if key in _DIVIDES_NO_CACHE:
        return _exhausted(budget)
    pool = witness_pool(th, inst.values, base, budget.pool_depth)
    for c in witness_sets(pool, budget.witness_len):
        ok, k, pi = _strong(th, inst, base | set(c), budget.k_max)
        if ok:
            cert = DivideCert(th.name, f, _sorted_elems(base), tuple(c), inst, pi, k)
            if not cert.verify():
                raise AssertionError(f"dividing certificate failed to re-verify for {th.render(f)}")
            return Decision(YES, cert, budget.bounds())
    _DIVIDES_NO_CACHE.add(key)
    return _exhausted(budget)


# ------------------------------------------------------------- thorn-forking


def candidate_formulas(th: Theory, phi: Formula, x: Sequence[Var], base: Iterable[Const]) -> list[Formula]:
    """Atomic and negated atomic formulas in ``x`` with parameters from the
    instance, followed by the subformulas of ``phi`` in ``x``."""
    elems = _sorted_elems(set(constants(phi)) | set(base))
    e_params = [c for c in elems if c.sort == ELEM]
    c_params = [c for c in elems if c.sort == CLASS]
    if "cl" in th.sig.functions:
        for c in e_params:
            k = th.norm_term(Cl(c))
            if k not in c_params:
                c_params.append(k)
    ex = [v for v in x if v.sort == ELEM]
    cx = [v for v in x if v.sort == CLASS]
    has_lt = "<" in th.sig.relations
    has_cl = "cl" in th.sig.functions
    atoms: list[Formula] = []
    for v in ex:
        for t in e_params + [w for w in ex if w != v]:
            atoms.append(Eq(v, t))
            if has_lt:
                atoms.append(Lt(v, t))
                atoms.append(Lt(t, v))
        if has_cl:
            for t in c_params + cx + [Cl(w) for w in ex if w != v]:
                atoms.append(Eq(Cl(v), t))
    for u in cx:
        for t in c_params + [w for w in cx if w != u]:
            atoms.append(Eq(u, t))
    out: list[Formula] = []
    seen = set()

    def add(f: Formula):
        if f not in seen and not isinstance(f, (Top, Bottom)):
            seen.add(f)
            out.append(f)

    for a in atoms:
        add(a)
    for a in atoms:
        add(Not(a))
    xs = set(x)
    for g in walk(phi):
        if free_vars(g) <= xs and (free_vars(g) or constants(g)):
            add(g)
    return out


def thorn_forks(
    theory: str | Theory,
    phi: Formula,
    base: Iterable[Const] = (),
    budget: SearchBudget = DEFAULT_BUDGET,
    x: Sequence[Var] | None = None,
) -> Decision:
    """Whether ``phi`` implies a finite disjunction of formulas that
    thorn-divide over ``base``."""
    th = get_theory(theory)
    base = frozenset(base)
    if x is None:
        x = tuple(sorted(free_vars(phi), key=lambda v: v.name))
    x = tuple(x)
    if free_vars(phi) - set(x):
        raise TheoryError("phi has free variables outside x")
    if not th.satisfiable(phi):
        raise InconsistentFormulaError(f"{th.render(phi)} is inconsistent")
    dom = set(constants(phi)) | base
    m = _canonical_map(th, dom)
    key = (th.name, map_constants(phi, m), x, frozenset(m[c] for c in base), budget)
    got = _FORKS_CACHE.get(key)
    if got is None:
        got = _thorn_forks(th, map_constants(phi, m), frozenset(m[c] for c in base), budget, x)
        _FORKS_CACHE[key] = got
    if got.cert is None:
        return got
    inv = {v: k for k, v in m.items()}
    inv = transport(th, inv, got.cert.elements())
    cert = got.cert.mapped(inv)
    if not cert.verify():
        raise AssertionError(f"forking certificate failed to re-verify for {th.render(phi)}")
    return Decision(got.verdict, cert, got.bounds)


def _thorn_forks(th: Theory, phi: Formula, base: frozenset, budget: SearchBudget, x: tuple) -> Decision:
    dividing: list[DivideCert] = []
    for psi in candidate_formulas(th, phi, x, base):
        if not th.satisfiable(conj([phi, psi])):
            continue
        d = thorn_divides(th, psi, (), base, budget)
        if d.yes:
            dividing.append(d.cert)
    if not dividing or not th.implies(phi, disj([d.formula for d in dividing])):
        return _exhausted(budget)
    for n in range(1, budget.disjuncts + 1):
        for combo in itertools.combinations(dividing, n):
            if th.implies(phi, disj([d.formula for d in combo])):
                cert = ForkCert(th.name, phi, x, _sorted_elems(base), combo)
                if not cert.verify():
                    raise AssertionError("forking certificate failed to re-verify")
                return Decision(YES, cert, budget.bounds())
    return Decision(UNKNOWN, None, budget.bounds())


def thorn_indep(
    theory: str | Theory,
    a: Sequence[Const],
    b: Sequence[Const],
    base: Iterable[Const] = (),
    budget: SearchBudget = DEFAULT_BUDGET,
) -> Decision:
    """``yes`` when tp(a / base + b) does not thorn-fork over base; a
    dependence verdict (``no``) carries the forking certificate."""
    th = get_theory(theory)
    base = frozenset(base)
    t = th.type_of(tuple(a), base | set(b))
    d = thorn_forks(th, t.formula, base, budget, t.variables)
    if d.yes:
        return Decision(NO, d.cert, d.bounds)
    if d.no:
        return Decision(YES, None, d.bounds)
    return d


def independent(theory, a, b, base=(), budget: SearchBudget = DEFAULT_BUDGET) -> bool:
    """Boolean form of :func:`thorn_indep`; Unknown is an error here."""
    d = thorn_indep(theory, a, b, base, budget)
    if d.unknown:
        raise TheoryError("independence undecided within the search budget")
    return d.yes


# ------------------------------------------------------------ Morley sequences


def _flat(seq: Sequence[tuple]) -> tuple:
    return tuple(c for t in seq for c in t)


def is_indiscernible(th: Theory, seq: Sequence[tuple], base: Iterable[Const], depth: int = 3) -> bool:
    """Quantifier-free indiscernibility over ``base`` for increasing
    subsequences of length at most ``depth``."""
    base = frozenset(base)
    for n in range(1, min(depth, len(seq)) + 1):
        ref = None
        for idx in itertools.combinations(range(len(seq)), n):
            t = th.type_of(_flat([seq[i] for i in idx]), base)
            if ref is None:
                ref = t
            elif not th.satisfiable(conj([ref.formula, t.formula])):
                return False
    return True


def indiscernible_through(
    th: Theory, b: Sequence[Const], over: Iterable[Const], length: int = 6
) -> list[tuple] | None:
    """A sequence of ``length`` distinct tuples starting with ``b`` that is
    indiscernible over ``over``, or None when there is none.

    Indiscernibility only depends on the type of each new term over the
    previous ones, so trying one realization per type is exhaustive.
    """
    b = tuple(b)
    over = frozenset(over)
    t = th.type_of(b, over)

    def go(seq: list[tuple]) -> list[tuple] | None:
        if len(seq) == length:
            return seq
        for c in definable.representatives(th, t.variables, over | set(_flat(seq))):
            if c in seq or not th.implies(th.type_of(c, over, t.variables).formula, t.formula):
                continue
            nxt = seq + [c]
            if is_indiscernible(th, nxt, over, depth=len(nxt)):
                found = go(nxt)
                if found:
                    return found
        return None

    return go([b])


def is_morley(th: Theory, seq: Sequence[tuple], base: Iterable[Const], budget: SearchBudget = DEFAULT_BUDGET) -> bool:
    base = frozenset(base)
    if len(set(seq)) != len(seq):
        # a constant sequence is Morley exactly when its type is algebraic
        return len(set(seq)) == 1 and th.is_algebraic_type(th.type_of(seq[0], base))
    if not is_indiscernible(th, seq, base):
        return False
    for i, a in enumerate(seq):
        rest = _flat(seq[:i] + seq[i + 1:])
        if not independent(th, a, rest, base, budget):
            return False
    return True


def morley_sequence(
    theory: str | Theory,
    t: TypeDesc,
    length: int,
    first: Sequence[Const] | None = None,
    over: Iterable[Const] | None = None,
    budget: SearchBudget = DEFAULT_BUDGET,
) -> list[tuple]:
    """Realizations of ``t`` forming a thorn-Morley sequence over ``over``
    (default: the base of ``t``)."""
    th = get_theory(theory)
    if th.is_algebraic_type(t):
        raise MorleyError(f"type {t.render()} is algebraic")
    over = t.base if over is None else frozenset(over)
    seq: list[tuple] = []
    avoid = set(t.base)
    if first is not None:
        first = tuple(first)
        if not th.holds(substitute(t.formula, dict(zip(t.variables, first)))):
            raise MorleyError("the first element does not realize the type")
        seq.append(first)
        avoid |= set(first)
    while len(seq) < length:
        r = th.realize_type(t, avoid)
        seq.append(r)
        avoid |= set(r)
    if not is_morley(th, seq, over, budget):
        raise MorleyError(f"constructed sequence for {t.render()} is not thorn-Morley")
    return seq


@dataclass(frozen=True)
class MorleyWitness:
    """b realizes every delta(x, a_i) for a thorn-Morley sequence (a_i)."""

    b: tuple[Const, ...]
    sequence: tuple[tuple[Const, ...], ...]


def _instances(th: Theory, f: Formula, a: tuple, seq) -> list[Formula]:
    return [map_constants(f, dict(zip(a, ai))) for ai in seq]


def morley_consistent(
    theory: str | Theory,
    phi: Formula,
    base: Iterable[Const] = (),
    length: int = 5,
    budget: SearchBudget = DEFAULT_BUDGET,
    require_independent_b: bool = True,
) -> MorleyWitness | None:
    """Look for a thorn-Morley sequence (a_i) over ``base`` starting with
    the parameter tuple a of ``phi`` such that the conjunction of
    phi(x, a_i) is consistent.

    Candidates: for each type over base + a of a solution b of phi, the
    sequence in tp(a / base + b) built by the fresh rule. With
    ``require_independent_b`` only solutions independent from a are used,
    which is the construction that succeeds when phi does not fork."""
    th = get_theory(theory)
    base = frozenset(base)
    x = tuple(sorted(free_vars(phi), key=lambda v: v.name))
    a = tuple(c for c in constants(phi) if c not in base)
    if not a or th.is_algebraic_type(th.type_of(a, base)):
        # parameters inside acl(base): the only Morley sequence is constant
        for t in th.enumerate_types(x, base | set(a)):
            if th.satisfiable(conj([t.formula, phi])):
                return MorleyWitness(th.realize_type(t), (a,) * length)
        return None
    for t in th.enumerate_types(x, base | set(a)):
        if not th.satisfiable(conj([t.formula, phi])):
            continue
        b = th.realize_type(t)
        if require_independent_b and not independent(th, b, a, base, budget):
            continue
        ta = th.type_of(a, base | set(b))
        if not a or th.is_algebraic_type(ta):
            continue
        try:
            seq = morley_sequence(th, ta, length, first=a, over=base, budget=budget)
        except MorleyError:
            continue
        if th.satisfiable(conj(_instances(th, phi, a, seq))):
            return MorleyWitness(tuple(b), tuple(seq))
    return None
