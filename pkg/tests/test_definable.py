import random

import pytest

from thornlab.definable import (
    Family,
    canonical_instance,
    family_of_conjugates,
    fiber_bound,
    is_algebraic,
    k_inconsistent,
    k_inconsistent_tableau,
    min_k,
)
from thornlab.formula import CLASS, Var, substitute
from thornlab.generators import FormulaGen
from thornlab.theories import TheoryError, get_theory

EQ, DLO, EREL = get_theory("eq"), get_theory("dlo"), get_theory("erel")
X, Y, U = Var("x"), Var("y"), Var("u", CLASS)


def fam(th, delta, pi, y=(Y,), sorts=None):
    sorts = sorts or {}
    return Family(th.name, th.parse(delta, sorts), (X,), y, th.parse(pi, sorts))


def test_k_inconsistent_examples():
    assert k_inconsistent(fam(DLO, "x = y", "y = y"), 2)
    rays = fam(DLO, "y < x", "y = y")
    assert not any(k_inconsistent(rays, k) for k in range(1, 7))
    classes = fam(EREL, "cl(x) = u", "u = u", (U,), {"u": CLASS})
    assert k_inconsistent(classes, 2)


def test_vacuous_when_pi_small():
    f = fam(DLO, "x < y | y < x", "y = 0 | y = 1")
    assert fiber_bound(f) == 2
    assert not k_inconsistent(f, 2)
    assert k_inconsistent(f, 3)


def test_k_must_be_positive():
    with pytest.raises(ValueError):
        k_inconsistent(fam(EQ, "x = y", "y = y"), 0)


def test_min_k():
    assert min_k(fam(EQ, "x = y", "y = y")) == 2
    assert min_k(fam(EQ, "x != y", "y = y")) is None
    assert min_k(fam(DLO, "x = y | x = 0", "y = y")) is None
    # a fresh x lies in all three members, so only 4 is (vacuously) inconsistent
    assert min_k(fam(EQ, "x != y", "y = #0 | y = #1 | y = #2")) == 4


@pytest.mark.parametrize("name", ["eq", "dlo", "erel"])
def test_fiber_bound_matches_tableau(name):
    th = get_theory(name)
    gen = FormulaGen(th, random.Random(name), max_qdepth=1, max_atoms=3)
    for _ in range(80):
        f = Family(name, gen.formula([X, Y]), (X,), (Y,), gen.formula([Y]))
        for k in (1, 2, 3):
            assert k_inconsistent(f, k) == k_inconsistent_tableau(f, k), th.render(f.delta)


@pytest.mark.parametrize("name", ["eq", "dlo", "erel"])
def test_monotone_in_k(name):
    th = get_theory(name)
    gen = FormulaGen(th, random.Random(7), max_qdepth=1, max_atoms=3)
    for _ in range(60):
        f = Family(name, gen.formula([X, Y]), (X,), (Y,), gen.formula([Y]))
        vals = [k_inconsistent(f, k) for k in range(1, 7)]
        assert all(b for a, b in zip(vals, vals[1:]) if a)


def test_family_rejects_stray_variables():
    with pytest.raises(TheoryError):
        Family("eq", EQ.parse("x = z"), (X,), (Y,), EQ.parse("y = y"))


def test_is_algebraic_examples():
    assert is_algebraic(EQ, EQ.elements("#0"), EQ.elements("#0"))
    assert not is_algebraic(EQ, EQ.elements("#5"), EQ.elements("#0"))
    assert not is_algebraic(DLO, DLO.elements("0,1"), DLO.elements("0"))


def test_family_of_conjugates_examples():
    f = family_of_conjugates(EQ, EQ.parse("x = y"), EQ.elements("#5"), ())
    assert EQ.render(f.pi) == "y = y"
    f = family_of_conjugates(DLO, DLO.parse("x = y"), DLO.elements("1/2"), DLO.elements("0,1"))
    assert DLO.render(f.pi) == "0 < y & y < 1"
    f = family_of_conjugates(EREL, EREL.parse("cl(x) = cl(y)"), EREL.elements("3.0"), EREL.elements("2.5"))
    assert EREL.implies(f.pi, EREL.parse("cl(y) != cl(2.5)"))
    assert EREL.implies(EREL.parse("cl(y) != cl(2.5)"), f.pi)


@pytest.mark.parametrize(
    "name,delta,a,base",
    [("eq", "x = y", "#3", "#0"), ("dlo", "x < y", "1", "0,2"), ("erel", "cl(x) = cl(y)", "1.1", "0.0")],
)
def test_pi_satisfied_by_a(name, delta, a, base):
    th = get_theory(name)
    f = family_of_conjugates(th, th.parse(delta), th.elements(a), th.elements(base))
    assert th.holds(substitute(f.pi, dict(zip(f.y, th.elements(a)))))


def test_canonical_instance_uses_classes():
    inst = canonical_instance(EREL, EREL.parse("cl(x) = cl(3.0)"), ())
    assert [p.sort for p in inst.params] == [CLASS]
    assert inst.values == EREL.elements("@3")
    assert EREL.implies(inst.instantiate(), EREL.parse("cl(x) = cl(3.0)"))
