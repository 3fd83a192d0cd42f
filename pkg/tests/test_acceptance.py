"""Acceptance run: eleven criteria, one PASS/FAIL line each.

    pytest tests/test_acceptance.py -s      # or
    python3 tests/test_acceptance.py
"""
import functools
import json
import subprocess
import sys
import time

import pytest

from thornlab.report import recheck_report, strip_timing
from thornlab.suites import verify_suite

# instances per theory for each run
QE_COUNT = 10_000
SYMMETRY_COUNT = 200
AXIOM_COUNT = 34
RANK_COUNT = 34
LASCAR_COUNT = 34
MORLEY_COUNT = 40
TYPE_COUNT = 50


@functools.cache
def suite(name, seed, count):
    return verify_suite(name, seed, count)


def prop(r, name):
    return r.properties.get(name, {"pass": 0, "fail": 0, "unknown": 0})


def clean(r, *names, at_least=1):
    """Every named property passed at least ``at_least`` times and never
    failed or came back unknown."""
    msgs = []
    ok = r.ok
    for n in names:
        c = prop(r, n)
        ok = ok and c["pass"] >= at_least and c["fail"] == 0 and c["unknown"] == 0
        msgs.append(f"{n} {c['pass']}/{c['pass'] + c['fail'] + c['unknown']}")
    if r.first_failure:
        msgs.append("first failure " + json.dumps(r.first_failure))
    return ok, ", ".join(msgs)


def criterion_1():
    r = suite("qe-fuzz", 7, QE_COUNT)
    return clean(r, "qe_sound", at_least=3 * QE_COUNT)


def criterion_2():
    r = suite("symmetry", 42, SYMMETRY_COUNT)
    return clean(r, "symmetry", "matches_oracle", at_least=3 * SYMMETRY_COUNT)


def criterion_3():
    axioms = [f"{i}_{n}" for i, n in enumerate(
        ["existence", "extension", "reflexivity", "monotonicity", "finite_character",
         "symmetry", "transitivity", "forking_transfer", "acl"], 1)]
    ok1, m1 = clean(suite("axioms", 3, AXIOM_COUNT), *axioms, at_least=100)
    ok2, m2 = clean(suite("axioms", 3, AXIOM_COUNT), "9_acl_nontrivial")
    ok3, m3 = clean(suite("transitivity", 3, AXIOM_COUNT), "left_transitivity", "chain_transitivity", at_least=100)
    ok4, m4 = clean(suite("extension", 3, AXIOM_COUNT), "existence", "extension")
    return ok1 and ok2 and ok3 and ok4, "; ".join([m1, m2, m3, m4])


def criterion_4():
    r = suite("rank-laws", 1, RANK_COUNT)
    return clean(r, "monotonicity", "transitivity", "additivity", "trees_verify", at_least=100)


def criterion_5():
    r = suite("rank-characterization", 42, SYMMETRY_COUNT)
    return clean(r, "rank_characterization", at_least=3 * SYMMETRY_COUNT)


def criterion_6():
    r = suite("oracle-agreement", 5, TYPE_COUNT)
    ok1, m1 = clean(r, "dlo_set_dimension", at_least=50)
    ok2, m2 = clean(r, "dlo_pair_rank_2")
    return ok1 and ok2, f"{m1}, {m2}"


def criterion_7():
    r = suite("oracle-agreement", 5, TYPE_COUNT)
    ok1, m1 = clean(r, "indep_eq", "indep_erel", at_least=TYPE_COUNT)
    ok2, m2 = clean(r, "uth_eq", "uth_erel", "uth_dlo", at_least=50)
    ok3, m3 = clean(suite("symmetry", 42, SYMMETRY_COUNT), "matches_oracle")
    return ok1 and ok2 and ok3, f"{m1}, {m2}, symmetry corpus {m3}"


def criterion_8():
    r = suite("uth-star", 5, TYPE_COUNT)
    return clean(r, "uth_equals_uth_star", at_least=3 * TYPE_COUNT)


def criterion_9():
    r = suite("lascar", 9, LASCAR_COUNT)
    return clean(r, "lascar", "dlo_equality", at_least=LASCAR_COUNT)


def criterion_10():
    r = suite("morley", 13, MORLEY_COUNT)
    nf, f = prop(r, "nonforking_has_sequence"), prop(r, "forking_has_no_sequence")
    ok, msg = clean(r, "nonforking_has_sequence", "forking_has_no_sequence")
    return ok and nf["pass"] >= 50 and f["pass"] >= 20, msg


DETERMINISM_COMMANDS = [
    ["verify", "symmetry", "--seed", "42", "--count", "10"],
    ["verify", "morley", "--seed", "13", "--count", "3"],
    ["indep", "--theory", "erel", "--a", "2.5", "--b", "2.7"],
    ["forks", "--theory", "dlo", "--p", "x = 0 | x = 1"],
    ["divides", "--theory", "erel", "--delta", "cl(x) = cl(y)", "--a", "3.0"],
    ["rank", "--theory", "dlo", "--p", "x1=x1 & x2=x2", "--delta", "x1=y", "--delta", "x2=y", "--pi", "y=y"],
    ["uth", "--theory", "erel", "--type-of", "2.5,2.7"],
    ["uthstar", "--theory", "erel", "--type-of", "2.5"],
    ["morley", "--theory", "dlo", "--type-of", "1/2", "--base", "0,1"],
]


def _cli(argv):
    out = subprocess.run([sys.executable, "-m", "thornlab.cli", *argv], capture_output=True, text=True)
    return out.returncode, out.stdout


def criterion_11():
    bad = []
    certs = 0
    for argv in DETERMINISM_COMMANDS:
        (c1, o1), (c2, o2) = _cli(argv), _cli(argv)
        d1, d2 = json.loads(o1), json.loads(o2)
        same = json.dumps(strip_timing(d1), indent=2) == json.dumps(strip_timing(d2), indent=2)
        if c1 != 0 or c2 != 0 or not same:
            bad.append(" ".join(argv[:2]))
            continue
        n, failures = recheck_report(d1)
        certs += n
        if failures:
            bad.append(f"recheck {' '.join(argv[:2])}: {failures}")
    return not bad, f"{len(DETERMINISM_COMMANDS)} commands run twice, {certs} certificates rechecked" + (
        f", failures: {bad}" if bad else ""
    )


CRITERIA = [
    (1, "QE soundness fuzz", criterion_1),
    (2, "symmetry of thorn-independence", criterion_2),
    (3, "independence axioms", criterion_3),
    (4, "rank laws", criterion_4),
    (5, "rank characterization of independence", criterion_5),
    (6, "U-thorn rank equals dimension in DLO", criterion_6),
    (7, "forking equals thorn-forking in EQ and EREL", criterion_7),
    (8, "U-thorn equals U-thorn-star", criterion_8),
    (9, "Lascar inequalities", criterion_9),
    (10, "thorn-Morley sequences", criterion_10),
    (11, "determinism and recheck", criterion_11),
]


def report_line(number, title, fn):
    t0 = time.perf_counter()
    ok, msg = fn()
    secs = time.perf_counter() - t0
    print(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title} ({secs:.1f}s): {msg}", flush=True)
    return ok


@pytest.mark.parametrize("number,title,fn", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(number, title, fn):
    assert report_line(number, title, fn)


if __name__ == "__main__":
    results = [report_line(*c) for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
