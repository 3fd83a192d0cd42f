"""An equivalence relation with infinitely many infinite classes, with the
classes as an explicit second sort.

Canonical model: elements N x N, classes N, ``cl((i, j)) = i``. Element
literals are written ``i.j``, class literals ``@i``.
"""
from __future__ import annotations

from typing import Iterable, Sequence

from ..formula import (
    CLASS,
    ELEM,
    EREL_SIG,
    TRUE,
    Cl,
    Const,
    Eq,
    Formula,
    Not,
    SameClass,
    Term,
    Var,
    conj,
)
from .base import Theory, UnionFind, _term_key


def _class_of(c: Const) -> int:
    return c.value if c.sort == CLASS else c.value[0]


class ErelTheory(Theory):
    name = "erel"
    sig = EREL_SIG
    rank_per_sort = {ELEM: 2, CLASS: 1}

    def norm_term(self, t: Term) -> Term:
        if isinstance(t, Cl) and isinstance(t.arg, Const):
            return Const(t.arg.value[0], CLASS)
        return t

    def _closure(self, lits: Sequence[Formula]):
        """Union-find over terms with the congruence cl(s) = cl(t) when
        s = t, and cl(i.j) = @i. Returns (uf, class-sort disequalities,
        element disequalities)."""
        uf = UnionFind()
        elem_eqs, class_eqs, diseq = [], [], []
        for l in lits:
            a = l.arg if isinstance(l, Not) else l
            if isinstance(l, Not):
                diseq.append(a)
            elif a.left.sort == ELEM:
                elem_eqs.append(a)
            else:
                class_eqs.append(a)
            for t in (a.left, a.right):
                uf.find(t)
                if isinstance(t, Cl):
                    uf.find(t.arg)
        for a in elem_eqs:
            uf.union(a.left, a.right)
        for a in class_eqs:
            uf.union(a.left, a.right)
        # congruence: element equalities never depend on class equalities,
        # so a single pass suffices
        rep_cl: dict = {}
        for t in list(uf.parent):
            if isinstance(t, Cl):
                r = uf.find(t.arg)
                if r in rep_cl:
                    uf.union(t, rep_cl[r])
                else:
                    rep_cl[r] = t
        for t in list(uf.parent):
            if isinstance(t, Const) and t.sort == ELEM:
                r = uf.find(t)
                k = Const(t.value[0], CLASS)
                if r in rep_cl:
                    uf.union(rep_cl[r], k)
        return uf, diseq

    def consistent(self, lits: Sequence[Formula]) -> bool:
        uf, diseq = self._closure(lits)
        const_of: dict = {}
        for x in list(uf.parent):
            if isinstance(x, Const):
                r = uf.find(x)
                if const_of.setdefault(r, x) != x:
                    return False
        return all(uf.find(a.left) != uf.find(a.right) for a in diseq)

    def determined(self, lits, variables):
        uf, _ = self._closure(lits)
        const_of = {}
        for x in list(uf.parent):
            if isinstance(x, Const):
                const_of[uf.find(x)] = x
        return {v: const_of[uf.find(v)] for v in variables if uf.find(v) in const_of}

    def eliminate(self, v: Var, lits: frozenset) -> list[frozenset]:
        for l in lits:
            if isinstance(l, Eq) and v in (l.left, l.right):
                other = l.right if l.left == v else l.left
                out = self.subst_lits(lits - {l}, {v: other})
                return [] if out is None else [out]
        if v.sort == ELEM:
            cv = Cl(v)
            for l in lits:
                if isinstance(l, Eq) and cv in (l.left, l.right):
                    other = l.right if l.left == cv else l.left
                    moved = [_replace(m, cv, other) for m in lits if m != l]
                    # the class of v is pinned; an infinite class meets the
                    # remaining element disequalities
                    kept = [m for m in moved if not _mentions(m, v)]
                    out = self.subst_lits(kept, {})
                    return [] if out is None else [out]
        # v is only constrained by disequalities: a fresh element in a fresh
        # class (or a fresh class) satisfies them all
        return [frozenset(l for l in lits if not _mentions(l, v))]

    def eval_atom(self, atom: Formula) -> bool:
        if isinstance(atom, SameClass):
            return atom.left.value[0] == atom.right.value[0]
        return self._val(atom.left) == self._val(atom.right)

    def _val(self, t: Term):
        if isinstance(t, Cl):
            return ("class", self._val(t.arg)[1][0])
        return (t.sort, t.value)

    def one_types(self, sort: str, known: Iterable[Const], avoid: Iterable[Const] = ()) -> list[Const]:
        known = sorted(set(known), key=_term_key)
        avoid = set(avoid)
        known_classes = sorted({_class_of(c) for c in known})
        used = set(known_classes) | {_class_of(c) for c in avoid}
        fresh = 0
        while fresh in used:
            fresh += 1
        if sort == CLASS:
            return [Const(fresh, CLASS)] + [Const(k, CLASS) for k in known_classes]
        taken = {c.value for c in known if c.sort == ELEM} | {c.value for c in avoid if c.sort == ELEM}
        out = [Const((fresh, 0))]
        for k in known_classes:
            j = 0
            while (k, j) in taken:
                j += 1
            out.append(Const((k, j)))
        out.extend(c for c in known if c.sort == ELEM)
        return out

    def diagram(self, values, variables, base) -> Formula:
        lits: list[Formula] = []
        base_sorted = sorted(base, key=_term_key)
        class_term: dict[int, Term] = {}
        for c in base_sorted:
            if c.sort == CLASS:
                class_term[c.value] = c
        for c in base_sorted:
            if c.sort == ELEM:
                class_term.setdefault(c.value[0], Cl(c))
        members: dict[int, list[Term]] = {}
        for c in base_sorted:
            if c.sort == ELEM:
                members.setdefault(c.value[0], []).append(c)
        seen: dict[Const, Var] = {}
        for v, c in zip(variables, values):
            if c in base:
                lits.append(Eq(v, c))
                continue
            if c in seen:
                lits.append(Eq(seen[c], v))
                continue
            seen[c] = v
            k = _class_of(c)
            if v.sort == CLASS:
                if k in class_term:
                    lits.append(Eq(v, class_term[k]))
                else:
                    lits.extend(Not(Eq(v, t)) for t in class_term.values())
                    class_term[k] = v
                continue
            if k in class_term:
                lits.append(Eq(Cl(v), class_term[k]))
                lits.extend(Not(Eq(v, e)) for e in members.get(k, []))
            else:
                lits.extend(Not(Eq(Cl(v), t)) for t in class_term.values())
                class_term[k] = Cl(v)
            members.setdefault(k, []).append(v)
        if not lits:
            return Eq(variables[0], variables[0]) if variables else TRUE
        return conj(lits)

    def relabel(self, elements: Sequence[Const]) -> dict[Const, Const]:
        cls: dict[int, int] = {}
        mem: dict[tuple, int] = {}
        count: dict[int, int] = {}
        out: dict[Const, Const] = {}
        for c in elements:
            k = _class_of(c)
            if k not in cls:
                cls[k] = len(cls)
            nk = cls[k]
            if c.sort == CLASS:
                out[c] = Const(nk, CLASS)
            else:
                if c.value not in mem:
                    mem[c.value] = count.get(nk, 0)
                    count[nk] = mem[c.value] + 1
                out[c] = Const((nk, mem[c.value]))
        return out

    def acl(self, elements: Iterable[Const]) -> frozenset:
        elements = frozenset(elements)
        return elements | {Const(c.value[0], CLASS) for c in elements if c.sort == ELEM}


def _replace_term(t: Term, old: Term, new: Term) -> Term:
    if t == old:
        return new
    if isinstance(t, Cl):
        inner = _replace_term(t.arg, old, new)
        return t if inner is t.arg else Cl(inner)
    return t


def _replace(l: Formula, old: Term, new: Term) -> Formula:
    if isinstance(l, Not):
        return Not(_replace(l.arg, old, new))
    return type(l)(_replace_term(l.left, old, new), _replace_term(l.right, old, new))


def _mentions(l: Formula, v: Var) -> bool:
    a = l.arg if isinstance(l, Not) else l

    def has(t):
        return t == v or (isinstance(t, Cl) and has(t.arg))

    return has(a.left) or has(a.right)
