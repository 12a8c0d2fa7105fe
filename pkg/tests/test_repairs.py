from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qexplain.causality import find_causes
from qexplain.errors import ExplosionGuard, QueryNotTrue
from qexplain.model import Schema, validate_database
from qexplain.parser import parse_constraints, parse_query
from qexplain.query import query_to_dcs
from qexplain.repairs import (
    c_repairs,
    causes_via_repairs,
    conflict_hypergraph,
    consistent_answers,
    minimal_hitting_sets,
    most_responsible_causes,
    repairs,
    s_repairs,
)

from instances import brute_repairs, load_fixture, random_instance

fs = frozenset


def five_unary():
    schema = Schema.from_arities({p: 1 for p in "ABCDE"})
    db = validate_database(schema, [(p, ("a",)) for p in "ABCDE"])
    dcs = parse_constraints(":- B(X), E(X).\n:- B(X), C(X), D(X).\n:- A(X), C(X).")
    return db, dcs


def test_ex5_repairs():
    db, _, cs = load_fixture("ex5")
    assert s_repairs(db, cs).removed_sets == {fs({"t1"}), fs({"t3", "t4"})}
    assert c_repairs(db, cs).removed_sets == {fs({"t1"})}
    kept = {fs(str(f) for f in r.database) for r in s_repairs(db, cs).repairs}
    assert kept == {fs({"P(e)", "Q(a,b)", "R(a,c)"}), fs({"P(a)", "P(e)"})}


def test_ex5_cqa():
    db, q, cs = load_fixture("ex5")
    assert consistent_answers(db, cs, q) == {("e",)}
    assert consistent_answers(db, cs, q, "C") == {("e",)}
    assert consistent_answers(db, cs, parse_query("q(X, Y) :- Q(X, Y).")) == set()
    assert consistent_answers(db, cs, parse_query("q(X, Y) :- Q(X, Y)."), "C") == {("a", "b")}


def test_hypergraph_example():
    db, dcs = five_unary()
    hg = conflict_hypergraph(db, dcs)
    names = {fs(db.fact(t).predicate for t in e) for e in hg.edges}
    assert names == {fs("BE"), fs("BCD"), fs("AC")}
    kept = {fs(f.predicate for f in r.database) for r in s_repairs(db, dcs).repairs}
    kept_c = {fs(f.predicate for f in r.database) for r in c_repairs(db, dcs).repairs}
    # {A,D,E} is consistent and maximal too, so it belongs in both lists
    assert kept == {fs("BC"), fs("CDE"), fs("ABD"), fs("ADE")}
    assert kept_c == {fs("CDE"), fs("ABD"), fs("ADE")}
    s_oracle, c_oracle = brute_repairs(db, dcs.dcs)
    assert s_repairs(db, dcs).removed_sets == s_oracle
    assert c_repairs(db, dcs).removed_sets == c_oracle


def test_consistent_database_has_one_repair():
    db, _, cs = load_fixture("ex5")
    clean = db.without(["t1"])
    rs = s_repairs(clean, cs)
    assert rs.removed_sets == {fs()}
    assert consistent_answers(clean, cs, parse_query("q(X) :- P(X).")) == {("e",)}


def test_kappa_repairs_ex1():
    db, q, _ = load_fixture("ex1")
    dcs = query_to_dcs(q)
    assert s_repairs(db, dcs).removed_sets == {fs({"t6"}), fs({"t1", "t3"}), fs({"t3", "t4"})}
    assert c_repairs(db, dcs).removed_sets == {fs({"t6"})}


def test_causes_via_repairs_ex1():
    db, q, _ = load_fixture("ex1")
    got = {r.tid: r.responsibility for r in causes_via_repairs(db, q)}
    assert got == {"t1": Fraction(1, 2), "t3": Fraction(1, 2), "t4": Fraction(1, 2), "t6": Fraction(1)}
    assert most_responsible_causes(db, q) == {"t6": Fraction(1)}


def test_most_responsible_ex2():
    db, q, _ = load_fixture("ex2")
    mr = most_responsible_causes(db, q)
    assert set(mr) == {f"t{i}" for i in range(1, 7)}
    assert set(mr.values()) == {Fraction(1, 3)}


def test_hitting_sets_edge_cases():
    assert minimal_hitting_sets([]) == [fs()]
    assert minimal_hitting_sets([fs()]) == []
    assert minimal_hitting_sets([fs("ab"), fs("a")]) == [fs("a")]
    edges = [fs({f"x{i}", f"y{i}"}) for i in range(8)]
    assert len(minimal_hitting_sets(edges)) == 256
    with pytest.raises(ExplosionGuard):
        minimal_hitting_sets(edges, cap=100)


def test_repairs_kind_and_errors():
    db, _, cs = load_fixture("ex5")
    assert repairs(db, cs, "c").kind == "C"
    with pytest.raises(ValueError):
        repairs(db, cs, "x")
    db1, q, _ = load_fixture("ex1")
    with pytest.raises(QueryNotTrue):
        causes_via_repairs(db1.without(["t6"]), q)


def test_to_json():
    db, _, cs = load_fixture("ex5")
    assert c_repairs(db, cs).to_json() == {"kind": "C", "count": 1, "repairs": [{"removed": ["t1"]}]}


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000))
def test_repairs_against_enumeration(seed):
    db, q = random_instance(seed, max_tuples=9, union=seed % 2 == 0)
    dcs = query_to_dcs(q)
    s_oracle, c_oracle = brute_repairs(db, dcs)
    s = s_repairs(db, dcs).removed_sets
    c = c_repairs(db, dcs).removed_sets
    assert s == s_oracle
    assert c == c_oracle
    assert c <= s


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000))
def test_repair_causes_match_definition(seed):
    db, q = random_instance(seed, max_tuples=9, union=seed % 2 == 1)
    direct = [r.to_json() for r in find_causes(db, q)]
    via = [r.to_json() for r in causes_via_repairs(db, q)]
    assert via == direct
    best = max(r.responsibility for r in find_causes(db, q))
    assert most_responsible_causes(db, q) == {r.tid: best for r in find_causes(db, q) if r.responsibility == best}
