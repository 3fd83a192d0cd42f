import json

import pytest

from thornlab.forking import (
    NO,
    UNKNOWN,
    YES,
    DivideCert,
    ForkCert,
    InconsistentFormulaError,
    MorleyError,
    SearchBudget,
    cert_from_dict,
    clear_caches,
    indiscernible_through,
    is_indiscernible,
    is_morley,
    morley_consistent,
    morley_sequence,
    strongly_divides,
    thorn_divides,
    thorn_forks,
    thorn_indep,
)
from thornlab import corpus
from thornlab.formula import Var
from thornlab.theories import get_theory

EQ, DLO, EREL = get_theory("eq"), get_theory("dlo"), get_theory("erel")


def E(th, s):
    return th.elements(s)


def test_strongly_divides_examples():
    assert strongly_divides(DLO, DLO.parse("x = y"), E(DLO, "0"), ()) == (True, 2)
    assert strongly_divides(EQ, EQ.parse("x != y"), E(EQ, "#0"), ()) == (False, None)
    assert strongly_divides(DLO, DLO.parse("x = y"), E(DLO, "0"), E(DLO, "0")) == (False, None)


def test_thorn_divides_examples():
    d = thorn_divides(DLO, DLO.parse("x = y"), E(DLO, "0"), ())
    assert d.verdict == YES and d.cert.witness == () and d.cert.k == 2
    assert thorn_divides(EQ, EQ.parse("x != y"), E(EQ, "#0"), ()).verdict == NO
    d = thorn_divides(EREL, EREL.parse("cl(x) = cl(y)"), E(EREL, "3.0"), ())
    assert d.verdict == YES and d.cert.k == 2 and d.cert.witness == ()
    # the conjugates range over the class sort
    assert [p.sort for p in d.cert.instance.params] == ["class"]


def test_thorn_forks_examples():
    d = thorn_forks(DLO, DLO.parse("x = 0 | x = 1"), ())
    assert d.yes
    assert sorted(DLO.render(c.formula) for c in d.cert.disjuncts) == ["x = 0", "x = 1"]
    assert all(c.k == 2 for c in d.cert.disjuncts)
    assert thorn_forks(DLO, DLO.parse("0 < x"), ()).no
    assert thorn_forks(EQ, EQ.parse("x = x"), ()).no


def test_inconsistent_formula_rejected():
    with pytest.raises(InconsistentFormulaError):
        thorn_forks(EQ, EQ.parse("x = #0 & x = #1"), ())


def test_thorn_indep_examples():
    assert thorn_indep(DLO, E(DLO, "0"), E(DLO, "1"), ()).verdict == YES
    d = thorn_indep(DLO, E(DLO, "0"), E(DLO, "0"), ())
    assert d.verdict == NO and [DLO.render(c.formula) for c in d.cert.disjuncts] == ["x = 0"]
    d = thorn_indep(EREL, E(EREL, "2.5"), E(EREL, "2.7"), ())
    assert d.verdict == NO
    assert EREL.implies(d.cert.disjuncts[0].formula, EREL.parse("cl(x) = cl(2.7)"))


def test_strict_budget_reports_unknown():
    strict = SearchBudget(strict=True)
    assert thorn_forks(DLO, DLO.parse("0 < x"), (), strict).verdict == UNKNOWN
    # two disjuncts are needed; a budget of one cannot certify
    d = thorn_forks(DLO, DLO.parse("x = 0 | x = 1"), (), SearchBudget(disjuncts=1))
    assert d.verdict == UNKNOWN


def test_budget_validation():
    with pytest.raises(ValueError):
        SearchBudget(witness_len=0)
    with pytest.raises(ValueError):
        SearchBudget(k_max=1)


def test_certificates_round_trip():
    d = thorn_forks(EREL, EREL.parse("cl(x) = cl(2.7) & x != 2.7"), ())
    assert d.yes
    data = json.loads(json.dumps(d.cert.to_dict()))
    back = cert_from_dict(data)
    assert isinstance(back, ForkCert) and back.verify()
    div = back.disjuncts[0]
    again = cert_from_dict(json.loads(json.dumps(div.to_dict())))
    assert isinstance(again, DivideCert) and again.verify()


def test_tampered_certificate_fails():
    d = thorn_forks(DLO, DLO.parse("x = 0 | x = 1"), ())
    data = d.cert.to_dict()
    data["phi"] = "x = 0 | x = 1 | x = 2"
    assert not cert_from_dict(data).verify()


def test_results_stable_across_cache_clear():
    f = EREL.parse("cl(x) = cl(1.0) & x != 1.0")
    first = thorn_forks(EREL, f, E(EREL, "0.0")).cert.to_dict()
    clear_caches()
    assert thorn_forks(EREL, f, E(EREL, "0.0")).cert.to_dict() == first


def test_morley_sequence_examples():
    seq = morley_sequence(EQ, EQ.type_of(E(EQ, "#0"), ()), 4)
    assert [s[0] for s in seq] == list(E(EQ, "#0,#1,#2,#3"))
    seq = morley_sequence(DLO, DLO.type_of(E(DLO, "1/2"), E(DLO, "0,1")), 3)
    # the fresh rule takes the midpoint of the leftmost free gap each time
    assert [s[0] for s in seq] == list(E(DLO, "1/2,1/4,1/8"))
    assert is_morley(DLO, seq, E(DLO, "0,1"))
    seq = morley_sequence(EREL, EREL.type_of(E(EREL, "0.0"), ()), 3)
    assert [s[0] for s in seq] == list(E(EREL, "0.0,1.0,2.0"))


def test_morley_sequence_algebraic_rejected():
    with pytest.raises(MorleyError):
        morley_sequence(EQ, EQ.type_of(E(EQ, "#0"), E(EQ, "#0")), 3)


def test_same_class_sequence_is_not_morley():
    seq = [E(EREL, "0.0"), E(EREL, "0.1"), E(EREL, "0.2")]
    assert is_indiscernible(EREL, seq, ())
    assert not is_morley(EREL, seq, ())


def test_morley_consistent_both_directions():
    w = morley_consistent(DLO, DLO.parse("0 < x"), ())
    assert w is not None and len(w.sequence) == 5
    assert morley_consistent(DLO, DLO.parse("x = 1"), ()) is None
    assert morley_consistent(EREL, EREL.parse("cl(x) = cl(0.0)"), E(EREL, "2.0"), require_independent_b=False) is None


def test_indiscernible_through_examples():
    seq = indiscernible_through(DLO, E(DLO, "1/2"), E(DLO, "0,1"))
    assert len(seq) == 6 and seq[0] == E(DLO, "1/2")
    assert is_indiscernible(DLO, seq, E(DLO, "0,1"), depth=6)
    assert indiscernible_through(DLO, E(DLO, "1/2"), E(DLO, "0,1/2,1")) is None
    seq = indiscernible_through(EQ, E(EQ, "#0"), E(EQ, "#1"))
    assert E(EQ, "#1") not in seq


@pytest.mark.parametrize("name", ["eq", "dlo", "erel"])
def test_dividing_matches_indiscernible_sequences(name):
    """tp(a/Ab) does not thorn-divide over A iff, over every B containing A
    with b non-algebraic, some Ba-indiscernible sequence passes through b.
    Dividing is witnessed by the certificate's parameters, which in EREL
    may be the class of b rather than b itself."""
    th = get_theory(name)
    seen = {"div": 0, "nondiv": 0}
    for a, b, A in corpus.triples(name, 17, 25):
        xs = tuple(Var(f"x{i + 1}", c.sort) for i, c in enumerate(a))
        ys = tuple(Var(f"y{i + 1}", c.sort) for i, c in enumerate(b))
        delta = th.type_of(a + b, A, xs + ys).formula
        if th.is_algebraic_type(th.type_of(b, A)):
            continue
        d = thorn_divides(th, delta, b, A)
        if d.yes:
            seen["div"] += 1
            B = set(A) | set(d.cert.witness) | set(a)
            assert indiscernible_through(th, d.cert.instance.values, B, max(6, d.cert.k)) is None
        else:
            seen["nondiv"] += 1
            assert indiscernible_through(th, b, set(A) | set(a)) is not None
            extra = th.element("5") if name == "dlo" else th.element("#9" if name == "eq" else "9.0")
            B = set(A) | {extra}
            if not th.is_algebraic_type(th.type_of(b, B)):
                assert indiscernible_through(th, b, B | set(a)) is not None
    assert seen["div"] and seen["nondiv"]


def test_morley_with_parameters_over_the_base():
    # @1 is the class of 1.0, so the only Morley sequence is constant
    base = E(EREL, "1.0")
    phi = EREL.parse("cl(x) = @1")
    assert thorn_forks(EREL, phi, base).no
    w = morley_consistent(EREL, phi, base)
    assert w is not None and set(w.sequence) == {E(EREL, "@1")}
    assert is_morley(EREL, list(w.sequence), base)
    assert not is_morley(EREL, [E(EREL, "0.0")] * 3, ())
