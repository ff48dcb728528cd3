import random
from functools import reduce

import pytest
from hypothesis import given, strategies as st

from sharpcq.errors import MissingRelation, UnknownVariable
from sharpcq.fixtures import q0, q1, random_database
from sharpcq.oracle import brute_force_count, full_solutions
from sharpcq.relational import (Atom, Const, Database, Query, Relation, Var, atom, atom_relation,
                                evaluate_atoms, natural_join, project, select, semijoin)

from strategies import query_and_db, relations


def rel(schema, rows):
    return Relation.make(schema, rows)


def test_project_drops_duplicates():
    r = rel(("A", "B"), {(1, 1), (1, 2)})
    assert project(r, {"A"}) == rel(("A",), {(1,)})


def test_project_onto_schema_is_identity():
    r = rel(("A", "B"), {(1, 1), (1, 2)})
    assert project(r, {"A", "B"}) == r


def test_project_unknown_variable():
    with pytest.raises(UnknownVariable):
        project(rel(("A",), {(1,)}), {"Z"})


def test_join_small():
    r = natural_join(rel(("A",), {(1,)}), rel(("A", "B"), {(1, 2), (2, 2)}))
    assert r == rel(("A", "B"), {(1, 2)})


def test_join_with_empty():
    assert not natural_join(Relation.empty(("A",)), rel(("A", "B"), {(1, 2)})).rows


def test_join_disjoint_is_product():
    r = natural_join(rel(("A",), {(1,), (2,)}), rel(("B",), {(5,), (6,)}))
    assert len(r.rows) == 4 and r.schema == ("A", "B")


def test_semijoin_cases():
    r1 = rel(("A",), {(1,), (2,)})
    assert semijoin(r1, rel(("B",), {(7,)})) == r1
    assert not semijoin(r1, Relation.empty(("B",))).rows


def test_select():
    r = rel(("A", "B"), {(1, 1), (1, 2), (2, 2)})
    assert select(r, {"B": 2}) == rel(("A", "B"), {(1, 2), (2, 2)})


def test_repeated_variable_filter():
    db = Database({"r": {(1, 1), (1, 2)}})
    assert evaluate_atoms([atom("r", "X", "X")], db) == rel(("X",), {(1,)})


def test_constant_selection():
    db = Database({"r": {(1, "c"), (2, "d")}})
    a = Atom("r", (Var("X"), Const("c")))
    assert atom_relation(a, db) == rel(("X",), {(1,)})


def test_missing_relation():
    with pytest.raises(MissingRelation):
        evaluate_atoms([atom("nope", "X")], Database({"r": {(1,)}}))


def test_q0_projection_matches_oracle(rng):
    q = q0()
    for _ in range(5):
        db = random_database(q, rng, domain=4, tuples=10)
        full = evaluate_atoms(q.atoms, db)
        assert len(full.rows) == len(full_solutions(q, db).rows)
        assert len(project(full, q.free).rows) == brute_force_count(q, db)


def test_q1_join_matches_full_enumeration(rng):
    q = q1()
    for _ in range(5):
        db = random_database(q, rng, domain=4, tuples=7)
        joined = reduce(natural_join, [atom_relation(a, db) for a in q.atoms])
        assert len(joined.rows) == len(full_solutions(q, db).rows)


@given(relations(), st.sets(st.sampled_from("ABCD")))
def test_project_shrinks_and_is_idempotent(r, W):
    W = W & set(r.schema)
    p = project(r, W)
    assert len(p.rows) <= len(r.rows)
    assert project(p, W) == p


@given(relations(), relations(), relations())
def test_join_commutative_associative(a, b, c):
    assert natural_join(a, b) == natural_join(b, a)
    assert natural_join(natural_join(a, b), c) == natural_join(a, natural_join(b, c))


@given(relations(), relations())
def test_semijoin_is_projected_join(a, b):
    s = semijoin(a, b)
    assert s == project(natural_join(a, b), a.schema)
    assert s.rows <= a.rows
    assert semijoin(s, b) == s


@given(relations(schema="AB"), relations(schema="BC"), relations(schema="BC"))
def test_semijoin_monotone(a, b, extra):
    bigger = Relation.make(b.schema, b.rows | extra.rows)
    assert semijoin(a, b).rows <= semijoin(a, bigger).rows


@given(query_and_db(max_atoms=6))
def test_evaluate_atoms_equals_join_fold(qd):
    q, db = qd
    fold = reduce(natural_join, [atom_relation(a, db) for a in q.atoms])
    assert evaluate_atoms(q.atoms, db) == fold


def test_query_invariants():
    from sharpcq.errors import ArityMismatch, FreeVarNotInBody, SharpCQError
    with pytest.raises(FreeVarNotInBody):
        Query("Q", (atom("r", "X"),), frozenset({"Y"}))
    with pytest.raises(ArityMismatch):
        Query("Q", (atom("r", "X"), atom("r", "X", "Y")), frozenset())
    with pytest.raises(SharpCQError):
        Query("Q", (), frozenset())
