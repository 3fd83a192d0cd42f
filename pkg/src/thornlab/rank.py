"""Local thorn-ranks as explicit witness trees, the U-thorn and U-thorn-star
ranks of complete types, and Lascar's inequalities."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .definable import Family, k_inconsistent
from .forking import (
    DEFAULT_BUDGET,
    ForkCert,
    SearchBudget,
    _canonical_map,
    _sorted_elems,
    thorn_forks,
    thorn_indep,
    transport,
)
from .formula import Const, Formula, Var, conj, constants, free_vars, map_constants, substitute
from .theories import Theory, TheoryError, TypeDesc, get_theory

MINUS_INFINITY = "minus_infinity"
FINITE = "finite"
AT_LEAST = "at_least"


class RankCapError(TheoryError):
    """The rank search reached its cap."""


@dataclass(frozen=True)
class RankValue:
    kind: str
    n: int = 0

    @classmethod
    def of(cls, n: int, cap: int) -> "RankValue":
        if n < 0:
            return cls(MINUS_INFINITY, -1)
        if n > cap:
            return cls(AT_LEAST, n)
        return cls(FINITE, n)

    def to_int(self) -> int:
        """-1 encodes minus infinity."""
        return -1 if self.kind == MINUS_INFINITY else self.n

    def __str__(self):
        if self.kind == MINUS_INFINITY:
            return "-inf"
        if self.kind == AT_LEAST:
            return f">={self.n}"
        return str(self.n)


@dataclass(frozen=True)
class RankParams:
    """Delta: formulas delta(x; y); Pi: formulas pi(y; z); the object
    variables x are fixed by the formula being ranked."""

    delta: tuple[Formula, ...]
    pi: tuple[Formula, ...]
    k: int = 2

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if not self.delta or not self.pi:
            raise ValueError("Delta and Pi must be non-empty")

    def pairs(self, x: Sequence[Var]) -> list[tuple[Formula, tuple, Formula, tuple]]:
        """(delta, y, pi, z) for every compatible choice."""
        xs = set(x)
        out = []
        for d in self.delta:
            y = tuple(sorted(free_vars(d) - xs, key=lambda v: v.name))
            if not y:
                continue
            for p in self.pi:
                fp = free_vars(p)
                if any(w.name in {v.name for v in y} and w not in y for w in fp):
                    continue
                z = tuple(sorted(fp - set(y), key=lambda v: v.name))
                if set(z) & xs:
                    continue
                out.append((d, y, p, z))
        return out


@dataclass(frozen=True)
class RankLevel:
    delta: Formula
    pi: Formula
    y: tuple[Var, ...]
    z: tuple[Var, ...]
    c: tuple[Const, ...]
    q: Formula
    a: tuple[Const, ...]
    k: int

    def instance(self) -> Formula:
        return substitute(self.delta, dict(zip(self.y, self.a)))

    def pi_c(self) -> Formula:
        return substitute(self.pi, dict(zip(self.z, self.c)))

    def mapped(self, m: dict) -> "RankLevel":
        return RankLevel(
            self.delta,
            self.pi,
            self.y,
            self.z,
            tuple(m.get(c, c) for c in self.c),
            map_constants(self.q, m),
            tuple(m.get(c, c) for c in self.a),
            self.k,
        )

    def elements(self) -> set:
        return set(self.c) | set(self.a) | set(constants(self.q))


@dataclass(frozen=True)
class RankTree:
    """One branch of the witness tree: each level splits the current
    formula along a k-inconsistent family and keeps one member."""

    theory: str
    root: Formula
    x: tuple[Var, ...]
    params: tuple[Const, ...]
    levels: tuple[RankLevel, ...]

    def branch(self) -> Formula:
        return conj([self.root] + [lv.instance() for lv in self.levels])

    def verify(self, rp: RankParams | None = None) -> bool:
        th = get_theory(self.theory)
        if not th.satisfiable(self.root):
            return not self.levels
        P = set(self.params)
        for lv in self.levels:
            if rp is not None and (lv.delta not in rp.delta or lv.pi not in rp.pi or lv.k != rp.k):
                return False
            fam = Family(th.name, lv.delta, self.x, lv.y, lv.pi_c())
            if not k_inconsistent(fam, lv.k):
                return False
            t = th.type_of(lv.a, P | set(lv.c), lv.y)
            if not th.satisfiable(conj([t.formula, lv.q])) or not th.implies(lv.q, t.formula):
                return False
            if not th.implies(lv.q, lv.pi_c()) or th.is_algebraic_type(t):
                return False
            P |= set(lv.a)
        return th.satisfiable(self.branch())

    def to_dict(self) -> dict:
        th = get_theory(self.theory)
        el = lambda cs: [th.render_element(c) for c in cs]
        return {
            "kind": "rank_tree",
            "theory": self.theory,
            "root": th.render(self.root),
            "x": [{"name": v.name, "sort": v.sort} for v in self.x],
            "params": el(self.params),
            "height": len(self.levels),
            "levels": [
                {
                    "delta": th.render(lv.delta),
                    "pi": th.render(lv.pi),
                    "y": [{"name": v.name, "sort": v.sort} for v in lv.y],
                    "z": [{"name": v.name, "sort": v.sort} for v in lv.z],
                    "c": el(lv.c),
                    "q": th.render(lv.q),
                    "a": el(lv.a),
                    "k": lv.k,
                    "instance": th.render(lv.instance()),
                }
                for lv in self.levels
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RankTree":
        th = get_theory(d["theory"])
        vs = lambda data: tuple(Var(e["name"], e["sort"]) for e in data)
        x = vs(d["x"])
        levels = []
        for e in d["levels"]:
            y, z = vs(e["y"]), vs(e["z"])
            sorts = {v.name: v.sort for v in x + y + z}
            levels.append(
                RankLevel(
                    th.parse(e["delta"], sorts),
                    th.parse(e["pi"], sorts),
                    y,
                    z,
                    tuple(th.element(s) for s in e["c"]),
                    th.parse(e["q"], sorts),
                    tuple(th.element(s) for s in e["a"]),
                    int(e["k"]),
                )
            )
        return cls(
            th.name,
            th.parse(d["root"], {v.name: v.sort for v in x}),
            x,
            tuple(th.element(s) for s in d["params"]),
            tuple(levels),
        )


_LOCAL_CACHE: dict = {}
_UTH_CACHE: dict = {}
_USTAR_CACHE: dict = {}


def clear_caches() -> None:
    _LOCAL_CACHE.clear()
    _UTH_CACHE.clear()
    _USTAR_CACHE.clear()


def _family_inconsistent(th: Theory, d, y, p, z, c, x, k) -> bool:
    pc = substitute(p, dict(zip(z, c)))
    return k_inconsistent(Family(th.name, d, tuple(x), y, pc), k)


def _local(th: Theory, phi: Formula, P: frozenset, x: tuple, rp: RankParams, bound: int) -> tuple[int, tuple]:
    """min(rank, bound) and a branch realizing it."""
    if not th.satisfiable(phi):
        return -1, ()
    if bound == 0:
        return 0, ()
    m = _canonical_map(th, P)
    key = (th.name, map_constants(phi, m), frozenset(m.values()), x, rp, bound)
    got = _LOCAL_CACHE.get(key)
    if got is None:
        got = _local_search(th, map_constants(phi, m), frozenset(m.values()), x, rp, bound)
        _LOCAL_CACHE[key] = got
    value, path = got
    if not path:
        return value, path
    inv = {v: k for k, v in m.items()}
    extra = set()
    for lv in path:
        extra |= lv.elements()
    inv = transport(th, inv, extra)
    return value, tuple(lv.mapped(inv) for lv in path)


def _local_search(th: Theory, phi: Formula, P: frozenset, x: tuple, rp: RankParams, bound: int) -> tuple[int, tuple]:
    best, best_path = 0, ()
    for d, y, p, z in rp.pairs(x):
        for ct in th.enumerate_types(z, P):
            c = th.realize_type(ct) if z else ()
            if not _family_inconsistent(th, d, y, p, z, c, x, rp.k):
                continue
            pc = substitute(p, dict(zip(z, c)))
            for q in th.enumerate_types(y, P | set(c)):
                if not th.satisfiable(conj([q.formula, pc])) or th.is_algebraic_type(q):
                    continue
                a = th.realize_type(q)
                child = conj([phi, substitute(d, dict(zip(y, a)))])
                sub, sub_path = _local(th, child, P | set(a), x, rp, bound - 1)
                if sub + 1 > best:
                    level = RankLevel(d, p, y, z, tuple(c), q.formula, tuple(a), rp.k)
                    best, best_path = sub + 1, (level,) + sub_path
                    if best >= bound:
                        return best, best_path
    return best, best_path


def local_rank(
    theory: str | Theory,
    p: Formula | TypeDesc,
    params: RankParams,
    cap: int = 6,
    x: Sequence[Var] | None = None,
) -> tuple[RankValue, RankTree]:
    """The local thorn-rank of a formula (or of a complete type, through its
    isolating formula), exact up to ``cap``."""
    th = get_theory(theory)
    if isinstance(p, TypeDesc):
        phi, P, x = p.formula, frozenset(p.base) | set(constants(p.formula)), p.variables
    else:
        phi, P = p, frozenset(constants(p))
        if x is None:
            x = tuple(sorted(free_vars(p), key=lambda v: v.name))
    x = tuple(x)
    value, path = _local(th, phi, P, x, params, cap + 1)
    tree = RankTree(th.name, phi, x, _sorted_elems(P), path)
    return RankValue.of(value, cap), tree


# ------------------------------------------------------------------ U-thorn


@dataclass(frozen=True)
class ChainLink:
    """Adding ``d`` to the base gives a thorn-forking extension."""

    d: tuple[Const, ...]
    cert: object

    def elements(self) -> set:
        out = set(self.d)
        if isinstance(self.cert, ForkCert):
            out |= self.cert.elements()
        elif isinstance(self.cert, tuple):
            for d2, c in self.cert:
                out |= set(d2)
                if c is not None:
                    out |= c.elements()
        return out

    def mapped(self, m: dict) -> "ChainLink":
        if isinstance(self.cert, ForkCert):
            cert = self.cert.mapped(m)
        else:
            cert = tuple((tuple(m.get(c, c) for c in d2), None if c is None else c.mapped(m)) for d2, c in self.cert)
        return ChainLink(tuple(m.get(c, c) for c in self.d), cert)


@dataclass(frozen=True)
class UthValue:
    value: int
    theory: str
    realization: tuple[Const, ...]
    base: tuple[Const, ...]
    chain: tuple[ChainLink, ...] = ()
    capped: bool = False
    kind: str = "uth"

    def __int__(self):
        return self.value

    def verify(self) -> bool:
        """Each link of a U-thorn chain re-checks as a forking extension of
        the previous type; U-thorn-star links re-check their k = 2
        condition."""
        th = get_theory(self.theory)
        if len(self.chain) != self.value and not self.capped:
            return False
        A = set(self.base)
        r = self.realization
        for link in self.chain:
            if self.kind == "uth":
                cert = link.cert
                if not isinstance(cert, ForkCert) or not cert.verify():
                    return False
                t = th.type_of(r, A | set(link.d))
                if set(cert.base) != A or not th.implies(t.formula, substitute(cert.phi, dict(zip(cert.x, t.variables)))):
                    return False
            else:
                for d2, cert in link.cert:
                    if cert is not None and not cert.verify():
                        return False
            A |= set(link.d)
        return True

    def to_dict(self) -> dict:
        th = get_theory(self.theory)
        el = lambda cs: [th.render_element(c) for c in cs]
        links = []
        for link in self.chain:
            if isinstance(link.cert, ForkCert):
                links.append({"extend_by": el(link.d), "fork": link.cert.to_dict()})
            else:
                links.append(
                    {
                        "extend_by": el(link.d),
                        "conjugates": [
                            {"a2": el(d2), "fork": None if c is None else c.to_dict(), "inconsistent": c is None}
                            for d2, c in link.cert
                        ],
                    }
                )
        return {
            "kind": self.kind,
            "theory": self.theory,
            "value": self.value,
            "capped": self.capped,
            "realization": el(self.realization),
            "base": el(self.base),
            "chain": links,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "UthValue":
        th = get_theory(d["theory"])
        el = lambda data: tuple(th.element(s) for s in data)
        links = []
        for e in d["chain"]:
            if "fork" in e:
                links.append(ChainLink(el(e["extend_by"]), ForkCert.from_dict(e["fork"])))
            else:
                ev = tuple(
                    (el(c["a2"]), None if c["fork"] is None else ForkCert.from_dict(c["fork"])) for c in e["conjugates"]
                )
                links.append(ChainLink(el(e["extend_by"]), ev))
        return cls(
            int(d["value"]),
            th.name,
            el(d["realization"]),
            el(d["base"]),
            tuple(links),
            bool(d["capped"]),
            d.get("kind", "uth"),
        )


def default_cap(theory: str | Theory, variables: Sequence[Var]) -> int:
    th = get_theory(theory)
    return sum(th.rank_per_sort.get(v.sort, 1) for v in variables)


def _extensions(th: Theory, r: tuple, A: frozenset) -> list[Const]:
    known = _sorted_elems(A | set(r))
    out = []
    for sort in th.sig.sorts:
        for d in th.one_types(sort, known):
            if d not in A and d not in out:
                out.append(d)
    return out


def _memo(cache: dict, search, th: Theory, r: tuple, A: frozenset, bound: int, budget) -> tuple[int, tuple]:
    if bound == 0:
        return 0, ()
    m = _canonical_map(th, A | set(r))
    key = (th.name, tuple(m[c] for c in r), frozenset(m[c] for c in A), bound, budget)
    got = cache.get(key)
    if got is None:
        got = search(th, tuple(m[c] for c in r), frozenset(m[c] for c in A), bound, budget)
        cache[key] = got
    value, chain = got
    if not chain:
        return value, chain
    inv = {v: k for k, v in m.items()}
    extra = set()
    for link in chain:
        extra |= link.elements()
    inv = transport(th, inv, extra)
    return value, tuple(link.mapped(inv) for link in chain)


def _uth(th, r, A, bound, budget):
    return _memo(_UTH_CACHE, _uth_search, th, r, A, bound, budget)


def _uth_search(th: Theory, r: tuple, A: frozenset, bound: int, budget) -> tuple[int, tuple]:
    best, best_chain = 0, ()
    for d in _extensions(th, r, A):
        dec = thorn_indep(th, r, (d,), A, budget)
        if dec.unknown:
            raise TheoryError("forking undecided within the search budget")
        if dec.yes:
            continue
        sub, chain = _uth(th, r, A | {d}, bound - 1, budget)
        if sub + 1 > best:
            best, best_chain = sub + 1, (ChainLink((d,), dec.cert),) + chain
            if best >= bound:
                break
    return best, best_chain


def _ustar(th, r, A, bound, budget):
    return _memo(_USTAR_CACHE, _ustar_search, th, r, A, bound, budget)


def _ustar_search(th: Theory, r: tuple, A: frozenset, bound: int, budget) -> tuple[int, tuple]:
    """Extensions p(x, a) with a over B = A; the k = 2 condition: for every
    a2 != a realizing tp(a/B), p(x, a) + p(x, a2) is inconsistent or
    thorn-forks over A + a."""
    best, best_chain = 0, ()
    for d in _extensions(th, r, A):
        td = th.type_of((d,), A)
        if th.is_algebraic_type(td):
            continue
        q = th.type_of(r, A | {d})
        y = td.variables[0]
        evidence = []
        ok = True
        for t2 in th.enumerate_types((y,), A | {d}):
            if not th.satisfiable(conj([t2.formula, td.formula])):
                continue
            d2 = th.realize_type(t2)
            if d2 == (d,):
                continue
            union = conj([q.formula, map_constants(q.formula, {d: d2[0]})])
            if not th.satisfiable(union):
                evidence.append((d2, None))
                continue
            dec = thorn_forks(th, union, A | {d}, budget, q.variables)
            if dec.unknown:
                raise TheoryError("forking undecided within the search budget")
            if not dec.yes:
                ok = False
                break
            evidence.append((d2, dec.cert))
        if not ok:
            continue
        sub, chain = _ustar(th, r, A | {d}, bound - 1, budget)
        if sub + 1 > best:
            best, best_chain = sub + 1, (ChainLink((d,), tuple(evidence)),) + chain
            if best >= bound:
                break
    return best, best_chain


def _ranked(kind, search, theory, t: TypeDesc, cap, budget) -> UthValue:
    th = get_theory(theory)
    if not th.satisfiable(t.formula):
        raise TheoryError("type is inconsistent")
    if cap is None:
        cap = default_cap(th, t.variables)
    r = th.realize_type(t)
    value, chain = search(th, r, frozenset(t.base), cap + 1, budget)
    return UthValue(min(value, cap + 1), th.name, r, _sorted_elems(t.base), chain, value > cap, kind)


def uth_rank(theory, t: TypeDesc, cap: int | None = None, budget: SearchBudget = DEFAULT_BUDGET) -> UthValue:
    """U-thorn rank of a complete type: the longest chain of thorn-forking
    extensions, each adding one element of the witness pool."""
    return _ranked("uth", _uth, theory, t, cap, budget)


def uth_star_rank(theory, t: TypeDesc, cap: int | None = None, budget: SearchBudget = DEFAULT_BUDGET) -> UthValue:
    return _ranked("uth_star", _ustar, theory, t, cap, budget)


def uth_of_formula(
    theory, phi: Formula, x: Sequence[Var] | None = None, base: Iterable[Const] = (), budget: SearchBudget = DEFAULT_BUDGET
) -> int:
    """Largest U-thorn rank of a complete type over the parameters that
    contains ``phi``."""
    th = get_theory(theory)
    if x is None:
        x = tuple(sorted(free_vars(phi), key=lambda v: v.name))
    base = frozenset(base) | set(constants(phi))
    top = default_cap(th, x)
    candidates = [t for t in th.enumerate_types(tuple(x), base) if th.satisfiable(conj([t.formula, phi]))]
    # Lascar's inequality bounds each rank by the coordinates that stay
    # non-algebraic one after another; visit the largest bounds first
    bounded = sorted(((_coordinate_bound(th, t), i) for i, t in enumerate(candidates)), key=lambda p: -p[0])
    best = -1
    for bound, i in bounded:
        if bound <= best:
            break
        v = uth_rank(th, candidates[i], budget=budget)
        if v.capped:
            raise RankCapError("U-thorn rank exceeded its cap")
        best = max(best, v.value)
        if best >= top:
            break
    if best < 0:
        raise TheoryError("formula is inconsistent")
    return best


def _coordinate_bound(th: Theory, t: TypeDesc) -> int:
    r = th.realize_type(t)
    A = set(t.base)
    total = 0
    for c in r:
        if not th.is_algebraic_type(th.type_of((c,), A)):
            total += th.rank_per_sort.get(c.sort, 1)
        A.add(c)
    return total


@dataclass(frozen=True)
class LascarResult:
    u_a_over_b: int
    u_b: int
    u_ab: int

    @property
    def lhs(self) -> int:
        return self.u_a_over_b + self.u_b

    @property
    def mid(self) -> int:
        return self.u_ab

    @property
    def rhs(self) -> int:
        # natural sum; on finite ranks it is ordinary addition
        return self.u_a_over_b + self.u_b

    @property
    def holds(self) -> bool:
        return self.lhs <= self.mid <= self.rhs


def lascar_check(theory, a: Sequence[Const], b: Sequence[Const], base: Iterable[Const] = (), budget=DEFAULT_BUDGET) -> LascarResult:
    th = get_theory(theory)
    base = frozenset(base)
    a, b = tuple(a), tuple(b)
    u1 = uth_rank(th, th.type_of(a, base | set(b)), budget=budget)
    u2 = uth_rank(th, th.type_of(b, base), budget=budget)
    u3 = uth_rank(th, th.type_of(a + b, base), budget=budget)
    for u in (u1, u2, u3):
        if u.capped:
            raise RankCapError("U-thorn rank exceeded its cap")
    return LascarResult(u1.value, u2.value, u3.value)
