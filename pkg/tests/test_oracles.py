import pytest

from thornlab import corpus
from thornlab.formula import free_vars
from thornlab.oracles import oracle_dim, oracle_indep, oracle_indep_report, oracle_rank, oracle_uth
from thornlab.theories import TheoryError, get_theory

EQ, DLO, EREL = get_theory("eq"), get_theory("dlo"), get_theory("erel")


def test_oracle_indep_examples():
    assert not oracle_indep(EQ, EQ.elements("#0,#1"), EQ.elements("#1,#2"), ())
    assert oracle_indep(DLO, DLO.elements("0"), DLO.elements("1"), ())
    assert not oracle_indep(EREL, EREL.elements("2.5"), EREL.elements("2.7"), ())


def test_oracle_dim_examples():
    assert oracle_dim(DLO.parse("x1 < x2")) == 2
    assert oracle_dim(DLO.parse("x1 = x2")) == 1
    assert oracle_dim(DLO.parse("x1 = 0 & x2 = 1")) == 0


def test_oracle_dim_inconsistent():
    with pytest.raises(TheoryError):
        oracle_dim(DLO.parse("x < 0 & 0 < x"))


def test_oracle_uth_examples():
    assert oracle_uth(DLO.type_of(DLO.elements("0,1"), ())) == 2
    assert oracle_uth(EQ.type_of(EQ.elements("#0,#0"), ())) == 1
    assert oracle_uth(EREL.type_of(EREL.elements("2.5"), EREL.elements("2.7"))) == 1


def test_erel_rank_table():
    assert oracle_rank(EREL, EREL.elements("2.5"), ()) == 2
    assert oracle_rank(EREL, EREL.elements("2.5"), EREL.elements("@2")) == 1
    assert oracle_rank(EREL, EREL.elements("2.5"), EREL.elements("2.5")) == 0
    assert oracle_rank(EREL, EREL.elements("@4"), ()) == 1
    assert oracle_rank(EREL, EREL.elements("@4"), EREL.elements("4.0")) == 0
    assert oracle_rank(EREL, EREL.elements("@4,4.1"), ()) == 2


@pytest.mark.parametrize("name", ["eq", "dlo", "erel"])
def test_oracle_indep_symmetric(name):
    th = get_theory(name)
    for a, b, base in corpus.triples(name, 11, 150):
        assert oracle_indep(th, a, b, base) == oracle_indep(th, b, a, base)


@pytest.mark.parametrize("name", ["eq", "dlo", "erel"])
def test_oracle_rank_additive(name):
    th = get_theory(name)
    for a, b, base in corpus.triples(name, 12, 150):
        ab = oracle_rank(th, a + b, base)
        assert ab == oracle_rank(th, b, set(base) | set(a)) + oracle_rank(th, a, base)


def test_oracle_dim_monotone():
    sets = corpus.dlo_sets()
    for f in sets:
        for g in sets:
            if f is not g and DLO.implies(f, g):
                vs = sorted(free_vars(f) | free_vars(g), key=lambda v: v.name)
                assert oracle_dim(f, vs) <= oracle_dim(g, vs)


def test_oracle_report_rule():
    rep = oracle_indep_report(EREL, EREL.elements("2.5"), EREL.elements("2.7"), ())
    assert rep.verdict is False and "rank" in rep.rule
