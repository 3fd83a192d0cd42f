"""Named verification suites: seeded instance generation and per-property
pass/fail bookkeeping."""
from __future__ import annotations

import itertools
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

from . import corpus
from .formula import CLASS, ELEM, Cl, Const, Eq, Formula, Lt, Not, Var, conj, constants, disj, map_constants, substitute
from .forking import (
    independent,
    is_morley,
    morley_consistent,
    morley_sequence,
    MorleyError,
    strongly_divides,
    thorn_divides,
    thorn_forks,
    thorn_indep,
)
from .generators import FormulaGen, free_variables, random_assignment
from .oracles import oracle_dim, oracle_indep, oracle_uth
from .rank import RankParams, lascar_check, local_rank, uth_of_formula, uth_rank, uth_star_rank
from .theories import get_theory

THEORIES = ("eq", "dlo", "erel")
PASS, FAIL, UNKNOWN = "pass", "fail", "unknown"


@dataclass
class SuiteResult:
    name: str
    seed: int
    count: int
    properties: dict = field(default_factory=dict)
    first_failure: dict | None = None

    def add(self, prop: str, status: str, detail: dict):
        c = self.properties.setdefault(prop, {PASS: 0, FAIL: 0, UNKNOWN: 0})
        c[status] += 1
        if status != PASS and self.first_failure is None:
            self.first_failure = {"property": prop, "status": status, **detail}

    @property
    def passed(self) -> int:
        return sum(c[PASS] for c in self.properties.values())

    @property
    def failed(self) -> int:
        return sum(c[FAIL] + c[UNKNOWN] for c in self.properties.values())

    @property
    def ok(self) -> bool:
        return self.failed == 0 and self.passed > 0

    def to_dict(self) -> dict:
        return {
            "suite": self.name,
            "seed": self.seed,
            "count": self.count,
            "passed": self.passed,
            "failed": self.failed,
            "ok": self.ok,
            "properties": {k: dict(v) for k, v in sorted(self.properties.items())},
            "first_failure": self.first_failure,
        }


def _el(th, cs) -> list[str]:
    return [th.render_element(c) for c in cs]


def _triple(th, a, b, base) -> dict:
    return {"theory": th.name, "a": _el(th, a), "b": _el(th, b), "base": _el(th, base)}


def _status(ok: bool) -> str:
    return PASS if ok else FAIL


def _rng(name: str, seed: int, i: int) -> random.Random:
    return random.Random(f"{name}:{seed}:{i}")


def _pick_elements(th, rng, n) -> tuple:
    return tuple(corpus._element(th.name, rng) for _ in range(n))


def _pick_base(th, rng, n) -> tuple:
    return tuple(sorted(set(_pick_elements(th, rng, n)), key=corpus._key))


# ------------------------------------------------------------------ qe-fuzz


def _qe_fuzz(args):
    name, seed, i = args
    th = get_theory(name)
    rng = _rng("qe", seed, i)
    gen = FormulaGen(th, rng)
    scope = free_variables(th)
    f = gen.formula(scope)
    q = th.qe(f)
    for _ in range(5):
        env = random_assignment(th, rng, scope)
        ok = th.holds(substitute(f, env)) == th.holds(substitute(q, env))
        if not ok:
            return [("qe_sound", FAIL, {"theory": name, "formula": th.render(f), "qe": th.render(q)})]
    return [("qe_sound", PASS, {})]


def _qe_instances(seed, count):
    return [(name, seed, i) for name in THEORIES for i in range(count)]


# ----------------------------------------------------------------- symmetry


def _symmetry_instances(seed, count):
    return [(name, a, b, base) for name in THEORIES for a, b, base in corpus.triples(name, seed, count)]


def _symmetry(args):
    name, a, b, base = args
    th = get_theory(name)
    d1 = thorn_indep(th, a, b, base)
    d2 = thorn_indep(th, b, a, base)
    o = oracle_indep(th, a, b, base)
    detail = _triple(th, a, b, base) | {"ab": d1.verdict, "ba": d2.verdict, "oracle": o}
    if d1.unknown or d2.unknown:
        return [("symmetry", UNKNOWN, detail)]
    return [
        ("symmetry", _status(d1.yes == d2.yes), detail),
        ("matches_oracle", _status(d1.yes == o and d2.yes == o), detail),
    ]


# -------------------------------------------------------------- axioms 1-9


def _axiom_instances(seed, count):
    return [(name, seed, i) for name in THEORIES for i in range(count)]


def _divisible_atom(th, rng, x: Var, a: Const) -> Formula:
    """A random literal in x with parameter a, biased toward dividing ones."""
    if a.sort == CLASS:
        opts = [Eq(Cl(x), a), Not(Eq(Cl(x), a))]
    else:
        opts = [Eq(x, a), Eq(x, a), Not(Eq(x, a))]
        if th.name == "dlo":
            opts += [Lt(x, a), Lt(a, x)]
        if th.name == "erel":
            opts += [Eq(Cl(x), Cl(a)), Eq(Cl(x), Cl(a)), Not(Eq(Cl(x), Cl(a)))]
    return rng.choice(opts)


_REDRAWS = 30


def _axioms(args):
    name, seed, i = args
    th = get_theory(name)
    rng = _rng("axioms", seed, i)
    out = []
    a = _pick_elements(th, rng, rng.randint(1, 2))
    b = _pick_elements(th, rng, rng.randint(1, 2))
    c = _pick_elements(th, rng, 1)
    A = _pick_base(th, rng, rng.randint(0, 2))
    det = _triple(th, a, b, A) | {"c": _el(th, c)}
    Af = frozenset(A)

    # 1 existence
    t = th.type_of(a, A)
    out.append(("1_existence", _status(thorn_forks(th, t.formula, A, x=t.variables).no), det))

    # 2 extension: tp(a/A) as a partial type over A + b has a completion
    # over A + b that does not fork over A
    found = False
    for t2 in th.enumerate_types(t.variables, Af | set(b)):
        if th.satisfiable(conj([t2.formula, t.formula])) and thorn_forks(th, t2.formula, A, x=t2.variables).no:
            found = True
            break
    out.append(("2_extension", _status(found), det))

    # 3 reflexivity
    refl = independent(th, b, b, A)
    out.append(("3_reflexivity", _status(refl == (set(b) <= th.acl(A))), det))

    # 4 monotonicity: a independent from bc implies a independent from b,
    # and a subtuple of a inherits independence; redraw until the
    # hypothesis holds so that no instance passes vacuously
    for _ in range(_REDRAWS):
        a4, b4, c4 = _pick_elements(th, rng, len(a)), _pick_elements(th, rng, len(b)), _pick_elements(th, rng, 1)
        if independent(th, a4, b4 + c4, A):
            ok = independent(th, a4, b4, A) and independent(th, a4[:1], b4 + c4, A)
            out.append(("4_monotonicity", _status(ok), _triple(th, a4, b4 + c4, A)))
            break

    # 5 finite character: a tuple is independent iff all its subtuples are
    whole = independent(th, a, b, A)
    parts = all(
        independent(th, sub, b, A)
        for n in range(1, len(a) + 1)
        for sub in itertools.combinations(a, n)
    )
    out.append(("5_finite_character", _status(whole == parts), det))

    # 6 symmetry
    out.append(("6_symmetry", _status(whole == independent(th, b, a, A)), det))

    # 7 transitivity for A < B < C
    B = tuple(sorted(Af | set(b), key=corpus._key))
    C = tuple(sorted(set(B) | set(c), key=corpus._key))
    lhs = independent(th, a, C, A)
    rhs = independent(th, a, B, A) and independent(th, a, C, B)
    out.append(("7_transitivity", _status(lhs == rhs), det))

    # 8 a independent from b and delta(x, a) forks over A: it still forks
    # over A + b (redrawn until the hypotheses hold)
    for _ in range(_REDRAWS):
        a8, b8 = _pick_elements(th, rng, 1), _pick_elements(th, rng, rng.randint(1, 2))
        x = Var("x")
        delta = _divisible_atom(th, rng, x, a8[0])
        if not th.satisfiable(delta) or not independent(th, a8, b8, A) or not thorn_forks(th, delta, A).yes:
            continue
        ok = thorn_forks(th, delta, Af | set(b8)).yes
        out.append(("8_forking_transfer", _status(ok), _triple(th, a8, b8, A) | {"delta": th.render(delta)}))
        break

    # 9 acl: with A < B, independence from B transfers to acl(B) (and back)
    lhs = independent(th, a, B, A)
    acl_b = tuple(sorted(th.acl(B), key=corpus._key))
    ok9 = lhs == independent(th, a, acl_b, A)
    out.append(("9_acl", _status(ok9), det))
    if set(acl_b) != set(B):
        out.append(("9_acl_nontrivial", _status(ok9), det))
    return out


# ---------------------------------------------------------- transitivity


def _transitivity(args):
    """Transitivity over a chain of bases and partial left transitivity:
    a | c over A and b | c over Aa give ab | c over A."""
    name, seed, i = args
    th = get_theory(name)
    rng = _rng("transitivity", seed, i)
    a = _pick_elements(th, rng, 1)
    b = _pick_elements(th, rng, 1)
    c = _pick_elements(th, rng, rng.randint(1, 2))
    A = _pick_base(th, rng, rng.randint(0, 2))
    det = _triple(th, a, b, A) | {"c": _el(th, c)}
    out = []
    for _ in range(_REDRAWS):
        a1, b1 = _pick_elements(th, rng, 1), _pick_elements(th, rng, 1)
        c1 = _pick_elements(th, rng, rng.randint(1, 2))
        Aa = tuple(set(A) | set(a1))
        if independent(th, a1, c1, A) and independent(th, b1, c1, Aa):
            d1 = _triple(th, a1, b1, A) | {"c": _el(th, c1)}
            out.append(("left_transitivity", _status(independent(th, a1 + b1, c1, A)), d1))
            break
    B = tuple(set(A) | set(b))
    C = tuple(set(B) | set(c))
    lhs = independent(th, a, C, A)
    rhs = independent(th, a, B, A) and independent(th, a, C, B)
    out.append(("chain_transitivity", _status(lhs == rhs), det))
    return out


# ------------------------------------------------------------- extension


def _extension(args):
    """Existence, extension to a new parameter, monotonicity of forking in
    the base, and the dividing implication chain."""
    name, seed, i = args
    th = get_theory(name)
    rng = _rng("extension", seed, i)
    a = _pick_elements(th, rng, rng.randint(1, 2))
    A = _pick_base(th, rng, rng.randint(0, 2))
    d = _pick_elements(th, rng, 1)
    det = _triple(th, a, d, A)
    out = []
    t = th.type_of(a, A)
    nonfork = thorn_forks(th, t.formula, A, x=t.variables).no
    out.append(("existence", _status(nonfork), det))
    found = any(
        th.satisfiable(conj([t2.formula, t.formula])) and thorn_forks(th, t2.formula, A, x=t2.variables).no
        for t2 in th.enumerate_types(t.variables, frozenset(A) | set(d))
    )
    out.append(("extension", _status(found), det))
    # a formula forking over a larger base forks over a smaller one
    x = Var("x")
    delta = _divisible_atom(th, rng, x, a[0]) if a[0].sort == ELEM else Eq(Cl(x), a[0])
    if th.satisfiable(delta):
        big = frozenset(A) | set(d)
        if thorn_forks(th, delta, big).yes:
            out.append(("base_monotonicity", _status(thorn_forks(th, delta, A).yes), det | {"delta": th.render(delta)}))
        sd, _ = strongly_divides(th, delta, (), A)
        if sd:
            ok = thorn_divides(th, delta, (), A).yes and thorn_forks(th, delta, A).yes
            out.append(("implication_chain", _status(ok), det | {"delta": th.render(delta)}))
    return out


# ------------------------------------------------------------- rank laws


def _delta_pool(th, x: Var) -> list[Formula]:
    y = Var("y")
    out = [Eq(x, y)]
    if th.name == "dlo":
        out += [Lt(x, y), Lt(y, x)]
    if th.name == "erel":
        out += [Eq(Cl(x), Var("u", CLASS)), Eq(Cl(x), Cl(y))]
    return out


def _pi_pool(th) -> list[Formula]:
    y, z = Var("y"), Var("z")
    out = [Eq(y, y), Eq(y, z), Not(Eq(y, z))]
    if th.name == "dlo":
        out += [Lt(y, z), Lt(z, y)]
    if th.name == "erel":
        u = Var("u", CLASS)
        out += [Eq(u, u), Eq(Cl(y), Cl(z))]
    return out


def _literal(th, rng, x: Var) -> Formula:
    p = corpus._element(th.name, rng)
    if p.sort == CLASS:
        lit = Eq(Cl(x), p)
    else:
        kinds = ["eq"] + (["lt", "gt"] if th.name == "dlo" else []) + (["cl"] if th.name == "erel" else [])
        k = rng.choice(kinds)
        lit = {"eq": Eq(x, p), "lt": Lt(x, p), "gt": Lt(p, x)}.get(k) or Eq(Cl(x), Cl(p) if k == "cl" else p)
    return Not(lit) if rng.random() < 0.35 else lit


def _small_formula(th, rng, x: Var) -> Formula:
    lits = [_literal(th, rng, x) for _ in range(rng.randint(1, 2))]
    return conj(lits) if rng.random() < 0.5 else disj(lits)


def _rank_laws_instances(seed, count):
    return [(name, seed, i) for name in THEORIES for i in range(count)]


def _rank_laws(args):
    name, seed, i = args
    th = get_theory(name)
    rng = _rng("rank-laws", seed, i)
    x = Var("x")
    deltas = _delta_pool(th, x)
    pis = _pi_pool(th)
    d0 = rng.sample(deltas, rng.randint(1, len(deltas)))
    d1 = d0 + [d for d in deltas if d not in d0 and rng.random() < 0.5]
    p0 = rng.sample(pis, rng.randint(1, 2))
    p1 = p0 + [p for p in pis if p not in p0 and rng.random() < 0.5]
    k = rng.choice((2, 3))
    small = RankParams(tuple(d0), tuple(p0), k)
    large = RankParams(tuple(d1), tuple(p1), k)
    theta, psi, chi = (_small_formula(th, rng, x) for _ in range(3))

    def rk(f, rp):
        return local_rank(th, f, rp, x=(x,))[0].to_int()

    det = {
        "theory": name,
        "theta": th.render(theta),
        "psi": th.render(psi),
        "chi": th.render(chi),
        "delta": [th.render(d) for d in d1],
        "pi": [th.render(p) for p in p1],
        "k": k,
    }
    out = []
    strong = conj([theta, psi])
    out.append(("monotonicity", _status(rk(strong, small) <= rk(theta, large)), det))
    r_p, r_q, r_r = rk(theta, small), rk(strong, small), rk(conj([theta, psi, chi]), small)
    out.append(("transitivity", _status((r_r == r_p) == (r_r == r_q and r_q == r_p)), det))
    out.append(("additivity", _status(rk(disj([theta, psi]), small) == max(rk(theta, small), rk(psi, small))), det))
    tree_ok = all(local_rank(th, f, small, x=(x,))[1].verify(small) for f in (theta, strong))
    out.append(("trees_verify", _status(tree_ok), det))
    return out


# ---------------------------------------------------- rank characterization


def rank_grid(th, variables) -> list[RankParams]:
    """Singleton (delta, pi, k) triples over the atomic formulas of the
    signature, for each coordinate of the tuple."""
    y, z = Var("y"), Var("z")
    u, w = Var("u", CLASS), Var("w", CLASS)
    out = []
    for v in variables:
        if v.sort == ELEM:
            deltas = [(Eq(v, y), "e")]
            if th.name == "dlo":
                deltas += [(Lt(v, y), "e"), (Lt(y, v), "e")]
            if th.name == "erel":
                deltas += [(Eq(Cl(v), u), "c")]
        else:
            deltas = [(Eq(v, u), "c")]
        for d, sort in deltas:
            if sort == "e":
                pis = [Eq(y, y), Not(Eq(y, z))]
                if th.name == "dlo":
                    pis += [Lt(z, y)]
                if th.name == "erel":
                    pis += [Eq(Cl(y), Cl(z))]
            else:
                pis = [Eq(u, u), Not(Eq(u, w))]
            for p in pis:
                for k in (2, 3):
                    out.append(RankParams((d,), (p,), k))
    return out


def _rank_char(args):
    name, a, b, base = args
    th = get_theory(name)
    det = _triple(th, a, b, base)
    d = thorn_indep(th, a, b, base)
    if d.unknown:
        return [("rank_characterization", UNKNOWN, det)]
    small = th.type_of(a, base)
    big = th.type_of(a, set(base) | set(b))
    preserved = True
    for rp in rank_grid(th, small.variables):
        r1 = local_rank(th, small, rp)[0]
        r2 = local_rank(th, big, rp)[0]
        if r1 != r2:
            preserved = False
            break
    return [("rank_characterization", _status(d.yes == preserved), det | {"indep": d.yes, "preserved": preserved})]


# ------------------------------------------------------------------ morley


def morley_formulas(th, seed: int, count: int) -> list[tuple[Formula, tuple]]:
    """(phi(x, a), base) pairs with one object variable."""
    rng = random.Random(f"morley:{th.name}:{seed}")
    x = Var("x")
    out = []
    seen = set()
    while len(out) < count:
        f = _small_formula(th, rng, x)
        base = _pick_base(th, rng, rng.randint(0, 1))
        if (f, base) in seen or not th.satisfiable(f):
            continue
        if not [c for c in constants(f) if c not in base]:
            continue
        seen.add((f, base))
        out.append((f, base))
    return out


def _morley_instances(seed, count):
    return [(name, seed, i) for name in THEORIES for i in range(count)]


def _morley(args):
    name, seed, i = args
    th = get_theory(name)
    f, base = morley_formulas(th, seed, i + 1)[i]
    det = {"theory": name, "phi": th.render(f), "base": _el(th, base)}
    forks = thorn_forks(th, f, base)
    if forks.unknown:
        return [("morley", UNKNOWN, det)]
    if forks.no:
        w = morley_consistent(th, f, base)
        ok = w is not None and is_morley(th, list(w.sequence), base) and len(w.sequence) == 5
        if ok:
            a = tuple(c for c in constants(f) if c not in base)
            insts = [_inst(f, a, s) for s in w.sequence]
            ok = th.holds(substitute(conj(insts), dict(zip((Var("x"),), w.b))))
        return [("nonforking_has_sequence", _status(ok), det)]
    w = morley_consistent(th, f, base, require_independent_b=False)
    ok = w is None
    a = tuple(c for c in constants(f) if c not in base)
    if ok:
        try:
            seq = morley_sequence(th, th.type_of(a, base), 5, first=a)
            ok = not th.satisfiable(conj([_inst(f, a, s) for s in seq]))
        except MorleyError:
            pass
    return [("forking_has_no_sequence", _status(ok), det)]


def _inst(f, a, s):
    return map_constants(f, dict(zip(a, s)))


# ------------------------------------------------------------------ lascar


def _lascar_instances(seed, count):
    return [(name, a[:1], b[:1] if len(a) == 2 else b, base) for name in THEORIES for a, b, base in corpus.triples(name, seed, count)]


def _lascar(args):
    name, a, b, base = args
    th = get_theory(name)
    L = lascar_check(th, a, b, base)
    det = _triple(th, a, b, base) | {"lhs": L.lhs, "mid": L.mid, "rhs": L.rhs}
    out = [("lascar", _status(L.holds), det)]
    if name == "dlo":
        out.append(("dlo_equality", _status(L.lhs == L.mid == L.rhs), det))
    return out


# ---------------------------------------------------------------- uth-star


def _type_instances(seed, count):
    out = []
    for name in THEORIES:
        for t in corpus.type_corpus(name, seed, count):
            th = get_theory(name)
            r = th.realize_type(t)
            out.append((name, r, tuple(sorted(t.base, key=corpus._key))))
    return out


def _uth_star(args):
    name, r, base = args
    th = get_theory(name)
    t = th.type_of(r, base)
    u = uth_rank(th, t)
    s = uth_star_rank(th, t)
    det = {"theory": name, "type": t.render(), "base": _el(th, base), "uth": u.value, "uth_star": s.value}
    return [("uth_equals_uth_star", _status(u.value == s.value and not u.capped and not s.capped), det)]


# --------------------------------------------------------- oracle agreement


def _oracle_instances(seed, count):
    out = [("indep", name, a, b, base) for name in ("eq", "erel") for a, b, base in corpus.triples(name, seed, count)]
    out += [("uth", name, r, base) for name, r, base in _type_instances(seed, count)]
    out += [("dim", i) for i in range(len(corpus.DLO_SETS))]
    out += [("dlo_pair",)]
    return out


def _oracle(args):
    kind = args[0]
    if kind == "indep":
        _, name, a, b, base = args
        th = get_theory(name)
        d = thorn_indep(th, a, b, base)
        det = _triple(th, a, b, base) | {"search": d.verdict}
        if d.unknown:
            return [("indep_" + name, UNKNOWN, det)]
        return [("indep_" + name, _status(d.yes == oracle_indep(th, a, b, base)), det)]
    if kind == "uth":
        _, name, r, base = args
        th = get_theory(name)
        t = th.type_of(r, base)
        u = uth_rank(th, t)
        o = oracle_uth(t)
        det = {"theory": name, "type": t.render(), "base": _el(th, base), "uth": u.value, "oracle": o}
        return [("uth_" + name, _status(u.value == o and not u.capped), det)]
    if kind == "dim":
        th = get_theory("dlo")
        f = corpus.dlo_sets()[args[1]]
        u = uth_of_formula(th, f)
        o = oracle_dim(f)
        return [("dlo_set_dimension", _status(u == o), {"formula": th.render(f), "uth": u, "dim": o})]
    th = get_theory("dlo")
    u = uth_rank(th, th.type_of(th.elements("0,1"), ()))
    return [("dlo_pair_rank_2", _status(u.value == 2), {"uth": u.value})]


# --------------------------------------------------------------- registry


@dataclass(frozen=True)
class Suite:
    instances: Callable
    check: Callable


SUITES: dict[str, Suite] = {
    "qe-fuzz": Suite(_qe_instances, _qe_fuzz),
    "symmetry": Suite(_symmetry_instances, _symmetry),
    "axioms": Suite(_axiom_instances, _axioms),
    "transitivity": Suite(_axiom_instances, _transitivity),
    "extension": Suite(_axiom_instances, _extension),
    "rank-laws": Suite(_rank_laws_instances, _rank_laws),
    "rank-characterization": Suite(_symmetry_instances, _rank_char),
    "morley": Suite(_morley_instances, _morley),
    "lascar": Suite(_lascar_instances, _lascar),
    "uth-star": Suite(_type_instances, _uth_star),
    "oracle-agreement": Suite(_oracle_instances, _oracle),
}


def _run_one(item):
    name, args = item
    return SUITES[name].check(args)


def verify_suite(name: str, seed: int = 0, count: int = 1, jobs: int = 1) -> SuiteResult:
    """Run a suite; ``count`` is the number of generated instances per
    theory."""
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(sorted(SUITES))}")
    if count < 1:
        raise ValueError("count must be at least 1")
    suite = SUITES[name]
    items = [(name, args) for args in suite.instances(seed, count)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            results = list(ex.map(_run_one, items, chunksize=max(1, len(items) // (4 * jobs))))
    else:
        results = [_run_one(it) for it in items]
    res = SuiteResult(name, seed, count)
    for checks in results:
        for prop, status, detail in checks:
            res.add(prop, status, detail)
    return res
