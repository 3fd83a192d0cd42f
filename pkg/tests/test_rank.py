import json

import pytest

from thornlab.formula import Var
from thornlab.rank import (
    AT_LEAST,
    FINITE,
    MINUS_INFINITY,
    RankParams,
    RankTree,
    RankValue,
    UthValue,
    default_cap,
    lascar_check,
    local_rank,
    uth_of_formula,
    uth_rank,
    uth_star_rank,
)
from thornlab.theories import get_theory

EQ, DLO, EREL = get_theory("eq"), get_theory("dlo"), get_theory("erel")


def tp(th, a, base=""):
    return th.type_of(th.elements(a), th.elements(base) if base else ())


def test_local_rank_examples():
    rp = RankParams((EQ.parse("x = y"),), (EQ.parse("y = y"),), 2)
    v, tree = local_rank(EQ, EQ.parse("x = x"), rp)
    assert v == RankValue(FINITE, 1) and tree.verify(rp) and len(tree.levels) == 1
    v, _ = local_rank(EQ, EQ.parse("x = #0"), rp)
    assert v == RankValue(FINITE, 0)
    rp2 = RankParams((DLO.parse("x1 = y"), DLO.parse("x2 = y")), (DLO.parse("y = y"),), 2)
    v, tree = local_rank(DLO, DLO.parse("x1 = x1 & x2 = x2"), rp2)
    assert v == RankValue(FINITE, 2) and tree.verify(rp2)


def test_inconsistent_formula_is_minus_infinity():
    rp = RankParams((EQ.parse("x = y"),), (EQ.parse("y = y"),), 2)
    v, _ = local_rank(EQ, EQ.parse("x = #0 & x = #1"), rp)
    assert v.kind == MINUS_INFINITY and v.to_int() == -1 and str(v) == "-inf"


def test_cap_reported_as_at_least():
    rp2 = RankParams((DLO.parse("x1 = y"), DLO.parse("x2 = y")), (DLO.parse("y = y"),), 2)
    v, _ = local_rank(DLO, DLO.parse("x1 = x1 & x2 = x2"), rp2, cap=1)
    assert v.kind == AT_LEAST and v.n == 2


def test_rank_params_validation():
    with pytest.raises(ValueError):
        RankParams((EQ.parse("x = y"),), (EQ.parse("y = y"),), 1)
    with pytest.raises(ValueError):
        RankParams((), (EQ.parse("y = y"),))


def test_rank_tree_round_trip_and_tamper():
    rp2 = RankParams((DLO.parse("x1 = y"), DLO.parse("x2 = y")), (DLO.parse("y = y"),), 2)
    _, tree = local_rank(DLO, DLO.parse("x1 = x1 & x2 = x2"), rp2)
    data = json.loads(json.dumps(tree.to_dict()))
    back = RankTree.from_dict(data)
    assert back.verify() and back.to_dict() == data
    # the same point cannot split twice
    data["levels"][1]["a"] = data["levels"][0]["a"]
    data["levels"][1]["instance"] = "x2 = " + data["levels"][0]["a"][0]
    assert not RankTree.from_dict(data).verify()


def test_uth_examples():
    assert uth_rank(DLO, tp(DLO, "0,1")).value == 2
    assert uth_rank(EQ, tp(EQ, "#0")).value == 1
    u = uth_rank(EREL, tp(EREL, "2.5"))
    assert u.value == 2 and u.verify() and len(u.chain) == 2
    assert uth_rank(EQ, tp(EQ, "#0", "#0")).value == 0


def test_uth_star_examples():
    assert uth_star_rank(EQ, tp(EQ, "#0")).value == 1
    assert uth_star_rank(DLO, tp(DLO, "0")).value == 1
    s = uth_star_rank(EREL, tp(EREL, "2.5"))
    assert s.value == 2 and s.verify()


def test_uth_value_round_trip():
    u = uth_rank(EREL, tp(EREL, "2.5"))
    back = UthValue.from_dict(json.loads(json.dumps(u.to_dict())))
    assert back == u and back.verify()
    s = uth_star_rank(EREL, tp(EREL, "2.5"))
    assert UthValue.from_dict(s.to_dict()).verify()


def test_uth_cap():
    u = uth_rank(DLO, tp(DLO, "0,1"), cap=1)
    assert u.capped and u.value == 2


def test_default_cap_counts_sort_ranks():
    assert default_cap(EREL, (Var("x"),)) == 2
    assert default_cap(DLO, (Var("x"), Var("y"))) == 2
    assert default_cap(EREL, (Var("u", "class"),)) == 1


def test_uth_of_formula():
    assert uth_of_formula(DLO, DLO.parse("0 < x & x < y")) == 2
    assert uth_of_formula(DLO, DLO.parse("x = 0 | x = 1")) == 0
    assert uth_of_formula(DLO, DLO.parse("x < 0 | x = y")) == 2
    assert uth_of_formula(DLO, DLO.parse("x = y & y < 3")) == 1


def test_lascar_examples():
    r = lascar_check(DLO, DLO.elements("0"), DLO.elements("1"))
    assert (r.lhs, r.mid, r.rhs, r.holds) == (2, 2, 2, True)
    r = lascar_check(EQ, EQ.elements("#0"), EQ.elements("#0"))
    assert (r.u_a_over_b, r.u_b, r.mid, r.rhs, r.holds) == (0, 1, 1, 1, True)
    r = lascar_check(EREL, EREL.elements("2.5"), EREL.elements("2.7"))
    assert (r.u_a_over_b, r.u_b, r.mid, r.rhs, r.holds) == (1, 2, 3, 3, True)
