"""Pure equality on an infinite set; canonical model (N; =)."""
from __future__ import annotations

from typing import Iterable, Sequence

from ..formula import EQ_SIG, ELEM, TRUE, Const, Eq, Formula, Not, Var, conj
from .base import Theory, UnionFind, _term_key


class EqTheory(Theory):
    name = "eq"
    sig = EQ_SIG
    rank_per_sort = {ELEM: 1}

    def consistent(self, lits: Sequence[Formula]) -> bool:
        uf = UnionFind()
        diseq = []
        for l in lits:
            if isinstance(l, Eq):
                uf.union(l.left, l.right)
            else:
                diseq.append(l.arg)
        const_of: dict = {}
        for x in list(uf.parent):
            if isinstance(x, Const):
                r = uf.find(x)
                if const_of.setdefault(r, x) != x:
                    return False
        return all(uf.find(a.left) != uf.find(a.right) for a in diseq)

    def eliminate(self, v: Var, lits: frozenset) -> list[frozenset]:
        for l in lits:
            if isinstance(l, Eq) and v in (l.left, l.right):
                other = l.right if l.left == v else l.left
                out = self.subst_lits(lits - {l}, {v: other})
                return [] if out is None else [out]
        # only disequalities mention v: an infinite domain satisfies them
        return [frozenset(l for l in lits if v not in _vars_of(l))]

    def eval_atom(self, atom: Formula) -> bool:
        return atom.left == atom.right

    def one_types(self, sort: str, known: Iterable[Const], avoid: Iterable[Const] = ()) -> list[Const]:
        known = list(known)
        used = {c.value for c in known} | {c.value for c in avoid}
        n = 0
        while n in used:
            n += 1
        return [Const(n)] + sorted(known, key=_term_key)

    def diagram(self, values, variables, base) -> Formula:
        lits: list[Formula] = []
        seen: dict[Const, Var] = {}
        base_sorted = sorted(base, key=_term_key)
        for v, c in zip(variables, values):
            if c in base:
                lits.append(Eq(v, c))
            elif c in seen:
                lits.append(Eq(seen[c], v))
            else:
                lits.extend(Not(Eq(v, b)) for b in base_sorted)
                lits.extend(Not(Eq(w, v)) for w in seen.values())
                seen[c] = v
        if not lits:
            return Eq(variables[0], variables[0]) if variables else TRUE
        return conj(lits)

    def determined(self, lits, variables):
        uf = UnionFind()
        for l in lits:
            if isinstance(l, Eq):
                uf.union(l.left, l.right)
        const_of = {}
        for x in list(uf.parent):
            if isinstance(x, Const):
                const_of[uf.find(x)] = x
        return {v: const_of[uf.find(v)] for v in variables if uf.find(v) in const_of}

    def relabel(self, elements: Sequence[Const]) -> dict[Const, Const]:
        out: dict[Const, Const] = {}
        for c in elements:
            if c not in out:
                out[c] = Const(len(out))
        return out


def _vars_of(l: Formula):
    a = l.arg if isinstance(l, Not) else l
    return {t for t in (a.left, a.right) if isinstance(t, Var)}
