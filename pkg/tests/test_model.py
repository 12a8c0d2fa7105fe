import pytest
from hypothesis import given, settings, strategies as st

from qexplain.errors import ArityMismatch, DuplicateTid, UnknownPredicate, ValidationError
from qexplain.model import (
    Atom,
    ConstraintSet,
    DenialConstraint,
    InclusionDependency,
    Predicate,
    Schema,
    Var,
    satisfies_dc,
    satisfies_ind,
    validate_database,
    violations,
)
from qexplain.parser import parse_constraints

from instances import load_fixture

X, Y, U = Var("X"), Var("Y"), Var("U")
RS = Schema([Predicate("R", 2), Predicate("S", 1)])


def ex5():
    db, _, cs = load_fixture("ex5")
    return db, cs


def test_validate_ex1_rows():
    rows = [("R", ("a", "b")), ("R", ("c", "d")), ("R", ("b", "b")), ("S", ("a",)), ("S", ("c",)), ("S", ("b",))]
    db = validate_database(RS, rows)
    assert len(db) == 6
    assert db.sorted_tids() == ["t1", "t2", "t3", "t4", "t5", "t6"]
    assert str(db.fact("t3")) == "R(b,b)"


def test_validate_empty():
    assert len(validate_database(Schema([Predicate("R", 2)]), [])) == 0


def test_validate_arity_mismatch():
    with pytest.raises(ArityMismatch):
        validate_database(Schema([Predicate("R", 2)]), [("R", ("a",))])


def test_validate_unknown_predicate_and_duplicate_tid():
    with pytest.raises(UnknownPredicate):
        validate_database(RS, [("T", ("a",))])
    with pytest.raises(DuplicateTid):
        validate_database(RS, [("S", ("a",), "x"), ("S", ("b",), "x")])


def test_provided_tids_kept_and_fresh_ones_skip_them():
    db = validate_database(RS, [("S", ("a",)), ("S", ("b",), "t1"), ("S", ("c",))])
    assert {str(f): f.tid for f in db} == {"S(b)": "t1", "S(a)": "t2", "S(c)": "t3"}


def test_duplicate_rows_collapse():
    db = validate_database(RS, [("S", ("a",)), ("S", ("a",)), ("S", ("b",))])
    assert len(db) == 2
    assert db.sorted_tids() == ["t1", "t2"]


def test_schema_invariants():
    with pytest.raises(ValidationError):
        Schema([Predicate("R", 1), Predicate("R", 2)])
    with pytest.raises(ValidationError):
        Schema([Predicate("R", 0)])
    with pytest.raises(ValidationError):
        Schema([Predicate("R", 2, ("A", "A"))])


def test_satisfies_dc_ex5():
    db, cs = ex5()
    dc0 = DenialConstraint((Atom("P", (X,)), Atom("Q", (X, Y))))
    assert not satisfies_dc(db, dc0)
    d1 = db.restrict(["t2", "t3", "t4"])  # P(e), Q(a,b), R(a,c)
    assert all(satisfies_dc(d1, dc) for dc in cs.dcs)
    assert satisfies_dc(db.restrict([]), dc0)


def test_satisfies_dc_unknown_predicate():
    db, _ = ex5()
    with pytest.raises(UnknownPredicate):
        satisfies_dc(db, DenialConstraint((Atom("Nope", (X,)),)))


def test_satisfies_ind_ex6():
    db, _, cs = load_fixture("ex6")
    (psi,) = cs.inds
    assert satisfies_ind(db, psi)
    assert not satisfies_ind(db.without(["t4", "t8"]), psi)
    assert satisfies_ind(db.without(["t1", "t2", "t3"]), psi)


def test_violations_ex5():
    db, cs = ex5()
    got = [(v.kind, v.index, v.tids) for v in violations(db, cs)]
    assert got == [("dc", 0, frozenset({"t1", "t3"})), ("dc", 1, frozenset({"t1", "t4"}))]


def test_violations_consistent_and_ind():
    db, _, cs = load_fixture("ex6")
    assert violations(db, cs) == []
    got = violations(db.without(["t4", "t8"]), cs)
    assert [(v.kind, v.index, v.tids) for v in got] == [("ind", 0, frozenset({"t1"}))]


def test_ind_existential_and_export_map():
    (ind,) = parse_constraints("Dep(X, Y) -> Course(_, Y, X).").inds
    assert {i: v.name for i, v in ind.exported.items()} == {1: "Y", 2: "X"}


facts = st.lists(
    st.one_of(
        st.tuples(st.just("P"), st.tuples(st.sampled_from("abc"))),
        st.tuples(st.just("Q"), st.tuples(st.sampled_from("abc"), st.sampled_from("abc"))),
        st.tuples(st.just("R"), st.tuples(st.sampled_from("abc"), st.sampled_from("abc"))),
    ),
    max_size=8,
)
PQR = Schema([Predicate("P", 1), Predicate("Q", 2), Predicate("R", 2)])
DCS = parse_constraints(":- P(X), Q(X, Y).\n:- Q(X, Y), R(Y, X).\n:- R(X, X).").dcs


@settings(max_examples=80, deadline=None)
@given(facts, st.data())
def test_dc_violation_properties(rows, data):
    db = validate_database(PQR, rows)
    for dc in DCS:
        assert satisfies_dc(db, dc) == (violations(db, ConstraintSet((dc,))) == [])
    keep = data.draw(st.sets(st.sampled_from(db.sorted_tids()))) if len(db) else set()
    sub = db.restrict(keep)
    full = {(v.index, v.tids) for v in violations(db, ConstraintSet(DCS))}
    for v in violations(sub, ConstraintSet(DCS)):
        assert (v.index, v.tids) in full
    assert [f.tid for f in validate_database(PQR, rows)] == [f.tid for f in db]
