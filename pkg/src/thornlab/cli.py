"""Command-line front end. Every subcommand prints one JSON report."""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .forking import (
    DEFAULT_BUDGET,
    MorleyError,
    SearchBudget,
    morley_consistent,
    morley_sequence,
    strongly_divides,
    thorn_divides,
    thorn_forks,
    thorn_indep,
)
from .formula import ELEM, Var, free_vars
from .oracles import oracle_dim, oracle_indep, oracle_uth
from .rank import RankParams, lascar_check, local_rank, uth_of_formula, uth_rank, uth_star_rank
from .report import Report, recheck_report
from .suites import SUITES, verify_suite
from .theories import TheoryError, get_theory

EXIT_OK, EXIT_ERROR, EXIT_UNKNOWN = 0, 1, 2

# config file keys and their built-in defaults
DEFAULTS = {
    "witness_len": DEFAULT_BUDGET.witness_len,
    "disjuncts": DEFAULT_BUDGET.disjuncts,
    "pool_depth": DEFAULT_BUDGET.pool_depth,
    "k_max": DEFAULT_BUDGET.k_max,
    "strict": False,
    "cap": None,
    "jobs": 1,
    "seed": 0,
    "count": 1,
}


class UsageError(Exception):
    pass


def load_config(path: str | None) -> dict:
    """Read a key=value file; blank lines and '#' comments are skipped."""
    if not path:
        return {}
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        if key == "strict":
            out[key] = value.lower() in ("1", "true", "yes", "on")
        else:
            out[key] = int(value)
    return out


def _settings(args) -> dict:
    s = dict(DEFAULTS)
    s.update(load_config(args.config))
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None and v is not False:
            s[key] = v
    return s


def _budget(s: dict) -> SearchBudget:
    return SearchBudget(s["witness_len"], s["disjuncts"], s["pool_depth"], s["k_max"], s["strict"])


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--theory", choices=("eq", "dlo", "erel"), default="eq")
    common.add_argument("--base", default="", help="comma separated element literals")
    common.add_argument("--budget-witness-len", dest="witness_len", type=int)
    common.add_argument("--budget-disjuncts", dest="disjuncts", type=int)
    common.add_argument("--pool-depth", dest="pool_depth", type=int)
    common.add_argument("--k-max", dest="k_max", type=int)
    common.add_argument("--cap", type=int)
    common.add_argument("--strict", action="store_true", help="report Unknown instead of No when a search is exhausted")
    common.add_argument("--jobs", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--count", type=int)
    common.add_argument("--config", help="key=value file with default settings; flags win")

    p = argparse.ArgumentParser(prog="thornlab", description="Thorn-forking and thorn-rank calculator.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_, *flags):
        sp = sub.add_parser(name, parents=[common], help=help_)
        for f in flags:
            sp.add_argument(f"--{f.replace('_', '-')}", dest=f)
        return sp

    add("qe", "quantifier-free equivalent of a formula", "f")
    add("holds", "truth of a sentence in the canonical model", "f")
    add("count", "number of solutions of a formula", "f", "vars")
    add("types", "complete types over the base", "vars")
    add("sdivides", "strong dividing over the base", "delta", "a")
    add("divides", "thorn-dividing over the base", "delta", "a")
    add("forks", "thorn-forking over the base", "p")
    add("indep", "thorn-independence of a and b over the base", "a", "b")
    m = add("morley", "thorn-Morley sequences", "type_of", "p")
    m.add_argument("--length", type=int, default=5)
    r = sub.add_parser("rank", parents=[common], help="local thorn-rank")
    r.add_argument("--p", required=True)
    r.add_argument("--delta", action="append", required=True)
    r.add_argument("--pi", action="append", required=True)
    r.add_argument("--k", type=int, default=2)
    add("uth", "U-thorn rank of tp(a/base) or of a formula", "type_of", "p")
    add("uthstar", "U-thorn-star rank of tp(a/base)", "type_of")
    add("lascar", "Lascar inequalities for a, b over the base", "a", "b")
    v = sub.add_parser("verify", parents=[common], help="run a named verification suite")
    v.add_argument("suite", choices=sorted(SUITES))
    rc = sub.add_parser("recheck", parents=[common], help="re-verify the certificates in a saved report")
    rc.add_argument("--report", required=True)
    return p


def _need(args, *names):
    for n in names:
        if getattr(args, n, None) is None:
            raise UsageError(f"--{n.replace('_', '-')} is required for {args.command}")


def _vars_list(th, text: str | None, f=None):
    if text:
        # name or name:sort
        out = []
        for tok in text.split(","):
            name, _, sort = tok.strip().partition(":")
            out.append(Var(name, sort or ELEM))
        return tuple(out)
    if f is None:
        raise UsageError("--vars is required")
    return tuple(sorted(free_vars(f), key=lambda v: v.name))


def _decision(rep: Report, d) -> Report:
    rep.result = {"verdict": d.verdict}
    rep.certificate = None if d.cert is None else d.cert.to_dict()
    rep.bounds = d.bounds
    rep.unknown = d.unknown
    return rep


def _els(th, cs):
    return [th.render_element(c) for c in cs]


def run(args) -> Report:
    s = _settings(args)
    th = get_theory(args.theory)
    base = th.elements(args.base)
    budget = _budget(s)
    rep = Report(args.command, th.name, {"base": _els(th, base)})
    cmd = args.command

    if cmd in ("qe", "holds", "count"):
        _need(args, "f")
        f = th.parse(args.f)
        rep.inputs["f"] = th.render(f)
        if cmd == "qe":
            rep.result = {"qe": th.render(th.qe(f))}
        elif cmd == "holds":
            rep.result = {"holds": th.holds(f)}
        else:
            vs = _vars_list(th, args.vars, f)
            n = th.solution_count(f, vs)
            rep.inputs["vars"] = [v.name for v in vs]
            rep.result = {
                "infinite": n.infinite,
                "count": n.n,
                "witnesses": None if n.infinite else [_els(th, w) for w in n.witnesses],
            }
    elif cmd == "types":
        vs = _vars_list(th, args.vars)
        ts = th.enumerate_types(vs, base)
        rep.inputs["vars"] = [v.name for v in vs]
        rep.result = {"count": len(ts), "types": [t.render() for t in ts]}
    elif cmd in ("sdivides", "divides"):
        _need(args, "delta")
        delta = th.parse(args.delta)
        a = th.elements(args.a) if args.a else ()
        rep.inputs |= {"delta": th.render(delta), "a": _els(th, a)}
        if cmd == "sdivides":
            ok, k = strongly_divides(th, delta, a, base, k_max=s["k_max"])
            rep.result = {"strongly_divides": ok, "k": k}
            rep.bounds = {"k_max": s["k_max"]}
        else:
            _decision(rep, thorn_divides(th, delta, a, base, budget))
    elif cmd == "forks":
        _need(args, "p")
        f = th.parse(args.p)
        rep.inputs["p"] = th.render(f)
        _decision(rep, thorn_forks(th, f, base, budget))
    elif cmd == "indep":
        _need(args, "a", "b")
        a, b = th.elements(args.a), th.elements(args.b)
        rep.inputs |= {"a": _els(th, a), "b": _els(th, b)}
        d = thorn_indep(th, a, b, base, budget)
        _decision(rep, d)
        rep.result["independent"] = None if d.unknown else d.yes
        rep.oracle = oracle_indep(th, a, b, base)
    elif cmd == "morley":
        length = args.length
        rep.inputs["length"] = length
        if args.p:
            f = th.parse(args.p)
            rep.inputs["p"] = th.render(f)
            w = morley_consistent(th, f, base, length, budget)
            rep.result = {"found": w is not None}
            if w is not None:
                rep.certificate = {
                    "kind": "morley",
                    "theory": th.name,
                    "phi": th.render(f),
                    "base": _els(th, base),
                    "b": _els(th, w.b),
                    "sequence": [_els(th, s_) for s_ in w.sequence],
                }
            rep.bounds = budget.bounds()
        else:
            _need(args, "type_of")
            a = th.elements(args.type_of)
            t = th.type_of(a, base)
            rep.inputs["type_of"] = _els(th, a)
            seq = morley_sequence(th, t, length, budget=budget)
            rep.result = {"sequence": [_els(th, s_) for s_ in seq]}
            rep.certificate = {
                "kind": "morley",
                "theory": th.name,
                "type": t.render(),
                "vars": [{"name": v.name, "sort": v.sort} for v in t.variables],
                "base": _els(th, base),
                "sequence": [_els(th, s_) for s_ in seq],
            }
            rep.bounds = budget.bounds()
    elif cmd == "rank":
        p = th.parse(args.p)
        x = tuple(sorted(free_vars(p), key=lambda v: v.name))
        xs = {v.name: v.sort for v in x}
        deltas = tuple(th.parse(d, xs) for d in args.delta)
        ysorts = {v.name: v.sort for d in deltas for v in free_vars(d)}
        pis = tuple(th.parse(q, ysorts) for q in args.pi)
        rp = RankParams(deltas, pis, args.k)
        cap = s["cap"] if s["cap"] is not None else 6
        value, tree = local_rank(th, p, rp, cap, x)
        rep.inputs |= {
            "p": th.render(p),
            "delta": [th.render(d) for d in deltas],
            "pi": [th.render(q) for q in pis],
            "k": args.k,
        }
        rep.result = {"rank": value.to_int(), "rank_kind": value.kind, "display": str(value)}
        rep.certificate = tree.to_dict()
        rep.bounds = {"cap": cap}
    elif cmd in ("uth", "uthstar"):
        if cmd == "uth" and args.p:
            f = th.parse(args.p)
            rep.inputs["p"] = th.render(f)
            rep.result = {"rank": uth_of_formula(th, f, base=base, budget=budget)}
            if th.name == "dlo" and not base:
                rep.oracle = oracle_dim(f)
        else:
            _need(args, "type_of")
            a = th.elements(args.type_of)
            t = th.type_of(a, base)
            rep.inputs |= {"type_of": _els(th, a), "type": t.render()}
            fn = uth_rank if cmd == "uth" else uth_star_rank
            u = fn(th, t, s["cap"], budget)
            rep.result = {"rank": u.value, "capped": u.capped}
            rep.certificate = u.to_dict()
            rep.oracle = oracle_uth(t)
            rep.unknown = u.capped
        rep.bounds = budget.bounds() | {"cap": s["cap"]}
    elif cmd == "lascar":
        _need(args, "a", "b")
        a, b = th.elements(args.a), th.elements(args.b)
        rep.inputs |= {"a": _els(th, a), "b": _els(th, b)}
        L = lascar_check(th, a, b, base, budget)
        rep.result = {
            "u_a_over_b": L.u_a_over_b,
            "u_b": L.u_b,
            "u_ab": L.u_ab,
            "lower": L.lhs,
            "upper": L.rhs,
            "holds": L.holds,
        }
        rep.bounds = budget.bounds()
    elif cmd == "verify":
        r = verify_suite(args.suite, s["seed"], s["count"], s["jobs"])
        rep.inputs |= {"suite": args.suite, "seed": s["seed"], "count": s["count"]}
        rep.result = r.to_dict()
        rep.failed = not r.ok
    elif cmd == "recheck":
        data = json.loads(Path(args.report).read_text())
        checked, failures = recheck_report(data)
        rep.theory = data.get("theory", th.name)
        rep.inputs = {"report": str(args.report)}
        rep.result = {"certificates": checked, "failures": failures, "ok": not failures}
        rep.failed = bool(failures)
    return rep


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_OK
    t0 = time.perf_counter()
    try:
        rep = run(args)
    except (UsageError, TheoryError, MorleyError, ValueError, KeyError, OSError) as e:
        print(f"thornlab: error: {e}", file=sys.stderr)
        return EXIT_ERROR
    rep.wall_time_ms = round((time.perf_counter() - t0) * 1000, 3)
    print(rep.dumps())
    if rep.failed:
        return EXIT_ERROR
    return EXIT_UNKNOWN if rep.unknown else EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
