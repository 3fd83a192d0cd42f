"""Dense linear order without endpoints; canonical model (Q; <)."""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from ..formula import DLO_SIG, ELEM, TRUE, Const, Eq, Formula, Lt, Not, Or, Var, conj
from .base import Theory, UnionFind


class DloTheory(Theory):
    name = "dlo"
    sig = DLO_SIG
    rank_per_sort = {ELEM: 1}

    def negate_atom(self, a: Formula) -> Formula:
        if isinstance(a, Lt):
            # !(s < t)  <=>  t < s | s = t
            return Or((self.norm_atom(Lt(a.right, a.left)), self.norm_atom(Eq(a.left, a.right))))
        return Not(a)

    def consistent(self, lits: Sequence[Formula]) -> bool:
        uf = UnionFind()
        lts = []
        diseq = []
        for l in lits:
            if isinstance(l, Eq):
                uf.union(l.left, l.right)
            elif isinstance(l, Lt):
                lts.append(l)
                uf.find(l.left)
                uf.find(l.right)
            else:
                diseq.append(l.arg)
        const_of: dict = {}
        for x in list(uf.parent):
            if isinstance(x, Const):
                r = uf.find(x)
                if const_of.setdefault(r, x) != x:
                    return False
        for a in diseq:
            if uf.find(a.left) == uf.find(a.right):
                return False
        if not lts:
            return True
        succ: dict = {}
        for l in lts:
            a, b = uf.find(l.left), uf.find(l.right)
            if a == b:
                return False
            succ.setdefault(a, set()).add(b)
        chain = sorted(const_of.items(), key=lambda kv: kv[1].value)
        for (r1, _), (r2, _) in zip(chain, chain[1:]):
            succ.setdefault(r1, set()).add(r2)
        return not _has_cycle(succ)

    def eliminate(self, v: Var, lits: frozenset) -> list[frozenset]:
        for l in lits:
            if isinstance(l, Eq) and v in (l.left, l.right):
                other = l.right if l.left == v else l.left
                out = self.subst_lits(lits - {l}, {v: other})
                return [] if out is None else [out]
        lower, upper, rest = [], [], []
        for l in lits:
            if isinstance(l, Lt) and l.right == v:
                lower.append(l.left)
            elif isinstance(l, Lt) and l.left == v:
                upper.append(l.right)
            elif isinstance(l, Not) and v in (l.arg.left, l.arg.right):
                continue  # finitely many holes in a nonempty open interval
            else:
                rest.append(l)
        new = []
        for lo in lower:
            for hi in upper:
                new.append(Lt(lo, hi))
        out = self.subst_lits(rest + new, {})
        return [] if out is None else [out]

    def eval_atom(self, atom: Formula) -> bool:
        if isinstance(atom, Eq):
            return atom.left.value == atom.right.value
        return atom.left.value < atom.right.value

    def one_types(self, sort: str, known: Iterable[Const], avoid: Iterable[Const] = ()) -> list[Const]:
        known = sorted(set(known), key=lambda c: c.value)
        cuts = sorted({c.value for c in known} | {c.value for c in avoid})
        reps = _gap_points(cuts)
        # one representative per gap of ``known``: the leftmost free gap
        # inside it (gaps are listed left to right)
        kv = [c.value for c in known]
        chosen = {}
        for r in reps:
            slot = _slot(kv, r)
            if slot not in chosen:
                chosen[slot] = r
        return [Const(chosen[s]) for s in sorted(chosen)] + known

    def diagram(self, values, variables, base) -> Formula:
        lits: list[Formula] = []
        points: dict[Fraction, Const] = {c.value: c for c in base}
        first_var: dict[Fraction, Var] = {}
        for v, c in zip(variables, values):
            if c.value in points:
                lits.append(Eq(v, c))
            elif c.value in first_var:
                lits.append(Eq(first_var[c.value], v))
            else:
                first_var[c.value] = v
        chain = sorted(set(points) | set(first_var))
        named = {p: first_var.get(p, points.get(p)) for p in chain}
        for lo, hi in zip(chain, chain[1:]):
            if lo in first_var or hi in first_var:
                lits.append(Lt(named[lo], named[hi]))
        # keep the order in which variables were introduced readable:
        # equalities first, then the chain
        eqs = [l for l in lits if isinstance(l, Eq)]
        lts = [l for l in lits if isinstance(l, Lt)]
        out = eqs + lts
        if not out:
            return Eq(variables[0], variables[0]) if variables else TRUE
        return conj(out)

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
        vals = sorted({c.value for c in elements})
        idx = {v: Const(Fraction(i)) for i, v in enumerate(vals)}
        return {c: idx[c.value] for c in elements}


def _gap_points(cuts: list) -> list[Fraction]:
    """One point in each open gap of the sorted cut list, left to right:
    midpoints inside, endpoint -/+ 1 at the unbounded ends, 0 if empty."""
    if not cuts:
        return [Fraction(0)]
    out = [Fraction(cuts[0]) - 1]
    for a, b in zip(cuts, cuts[1:]):
        out.append((Fraction(a) + Fraction(b)) / 2)
    out.append(Fraction(cuts[-1]) + 1)
    return out


def _slot(points: list, r) -> int:
    """Index of the gap of ``points`` that contains ``r`` (r not a point)."""
    i = 0
    while i < len(points) and points[i] < r:
        i += 1
    return i


def _has_cycle(succ: dict) -> bool:
    WHITE, GREY, BLACK = 0, 1, 2
    color: dict = {}
    for start in list(succ):
        if color.get(start, WHITE) != WHITE:
            continue
        stack = [(start, iter(succ.get(start, ())))]
        color[start] = GREY
        while stack:
            node, it = stack[-1]
            for nxt in it:
                c = color.get(nxt, WHITE)
                if c == GREY:
                    return True
                if c == WHITE:
                    color[nxt] = GREY
                    stack.append((nxt, iter(succ.get(nxt, ()))))
                    break
            else:
                color[node] = BLACK
                stack.pop()
    return False
