from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thornlab.formula import (
    CLASS,
    DLO_SIG,
    EQ_SIG,
    EREL_SIG,
    FALSE,
    TRUE,
    And,
    Cl,
    Const,
    Eq,
    Exists,
    Forall,
    Implies,
    Lt,
    Not,
    Or,
    ParseError,
    SortError,
    Var,
    alpha_equal,
    free_vars,
    parse,
    render,
    substitute,
)

X, Y, Z = Var("x"), Var("y"), Var("z")
VARS = [X, Y, Z]


def dlo_terms():
    consts = st.sampled_from([Const(Fraction(v)) for v in ("0", "1", "-1", "1/2", "7/3")])
    return st.one_of(st.sampled_from(VARS), consts)


def eq_terms():
    return st.one_of(st.sampled_from(VARS), st.integers(0, 9).map(Const))


def formulas(terms, order: bool):
    atoms = [st.builds(Eq, terms, terms), st.just(TRUE), st.just(FALSE)]
    if order:
        atoms.append(st.builds(Lt, terms, terms))
    base = st.one_of(*atoms)

    def extend(inner):
        tup = st.lists(inner, min_size=2, max_size=3).map(tuple)
        qvars = st.lists(st.sampled_from(VARS), min_size=1, max_size=2, unique=True).map(tuple)
        return st.one_of(
            inner.map(Not),
            tup.map(And),
            tup.map(Or),
            st.builds(Implies, inner, inner),
            st.builds(Exists, qvars, inner),
            st.builds(Forall, qvars, inner),
        )

    return st.recursive(base, extend, max_leaves=8)


@settings(max_examples=300, deadline=None)
@given(formulas(dlo_terms(), True))
def test_roundtrip_dlo(f):
    assert parse(render(f, DLO_SIG), DLO_SIG) == f


@settings(max_examples=300, deadline=None)
@given(formulas(eq_terms(), False))
def test_roundtrip_eq(f):
    assert parse(render(f, EQ_SIG), EQ_SIG) == f


def test_roundtrip_erel_classes():
    u = Var("u", CLASS)
    f = And((Eq(Cl(X), u), Not(Eq(Cl(Const((2, 5))), Const(3, CLASS))), Exists((u,), Eq(Cl(Y), u))))
    text = render(f, EREL_SIG)
    assert parse(text, EREL_SIG, {"u": CLASS}) == f


@settings(max_examples=200, deadline=None)
@given(formulas(eq_terms(), False), st.integers(0, 9), st.integers(0, 9))
def test_substitution_composes(f, m, n):
    # sigma = {x -> y}, tau = {y -> #m}; composed: {x -> #m, y -> #m}
    s1 = substitute(substitute(f, {X: Y}), {Y: Const(m)})
    s2 = substitute(f, {X: Const(m), Y: Const(m)})
    assert alpha_equal(s1, s2)
    # disjoint ground bindings compose independently
    a = substitute(substitute(f, {X: Const(m)}), {Z: Const(n)})
    b = substitute(f, {X: Const(m), Z: Const(n)})
    assert alpha_equal(a, b)


@settings(max_examples=200, deadline=None)
@given(formulas(dlo_terms(), True), st.sampled_from(VARS))
def test_ground_substitution_removes_var(f, v):
    g = substitute(f, {v: Const(Fraction(1, 3))})
    assert free_vars(g) == free_vars(f) - {v}


def test_parse_examples():
    f = parse("exists y. x < y & y < z", DLO_SIG)
    assert isinstance(f, Exists) and f.vars == (Y,)
    assert f.body == And((Lt(X, Y), Lt(Y, Z)))
    assert parse("x = #3", EQ_SIG) == Eq(X, Const(3))


def test_signature_rejects_order_in_eq():
    with pytest.raises((ParseError, SortError)):
        parse("x < y", EQ_SIG)


def test_parse_error_has_position():
    with pytest.raises(ParseError) as e:
        parse("x = = y", EQ_SIG)
    assert e.value.pos >= 0


def test_sort_error_on_class_vs_element():
    with pytest.raises(SortError):
        parse("cl(x) = 2.5", EREL_SIG)


def test_substitute_examples():
    assert substitute(parse("x = y", EQ_SIG), {Y: Const(3)}) == parse("x = #3", EQ_SIG)
    f = parse("exists y. x < y", DLO_SIG)
    assert substitute(f, {Y: Const(Fraction(0))}) == f
    g = substitute(f, {X: Y})
    assert isinstance(g, Exists)
    (bound,) = g.vars
    assert bound != Y
    assert g.body == Lt(Y, bound)


def test_substitute_sort_mismatch():
    with pytest.raises(SortError):
        substitute(parse("x = y", EREL_SIG), {X: Const(1, CLASS)})


def test_free_vars_examples():
    assert free_vars(parse("x = #3", EQ_SIG)) == {X}
    assert free_vars(parse("exists y. x < y", DLO_SIG)) == {X}
    assert free_vars(TRUE) == frozenset()


def test_render_precedence():
    f = parse("!x = y & y = z | x = z -> y = y", EQ_SIG)
    assert render(f, EQ_SIG) == "x != y & y = z | x = z -> y = y"
    assert parse(render(f, EQ_SIG), EQ_SIG) == f
