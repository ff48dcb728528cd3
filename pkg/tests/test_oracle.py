import random

import pytest
from hypothesis import given

from sharpcq.errors import StateCapExceeded
from sharpcq.fixtures import cycle_database, q0, q1, random_database
from sharpcq.homomorphism import color, core
from sharpcq.oracle import brute_force_count, enumerate_answers, full_solutions
from sharpcq.relational import Database, Query, atom, project, uncolored

from strategies import query_and_db


def test_unsatisfiable_is_zero():
    q = Query("Q", (atom("r", "X", "Y"), atom("s", "Y")), frozenset({"X"}))
    assert brute_force_count(q, Database({"r": {(1, 2)}, "s": {(3,)}})) == 0


def test_distinct_projection():
    q = Query("Q", (atom("r", "X", "Y"),), frozenset({"X"}))
    assert brute_force_count(q, Database({"r": {(1, 1), (1, 2), (2, 1)}})) == 2


def test_q1_on_directed_cycle():
    # each A has exactly one C two steps ahead, and the cycle closes through D
    assert brute_force_count(q1(), cycle_database()) == 4
    assert enumerate_answers(q1(), cycle_database()).sorted_rows() == [(1, 3), (2, 4), (3, 1), (4, 2)]


def test_boolean_answer_is_the_empty_substitution():
    q = q1().with_free(frozenset())
    ans = enumerate_answers(q, cycle_database())
    assert ans.schema == () and ans.rows == {()}


def test_state_cap():
    q = Query("Q", (atom("r", "X", "Y"), atom("r", "Y", "Z"), atom("r", "Z", "W")), frozenset({"X", "W"}))
    db = Database({"r": {(i, j) for i in range(6) for j in range(6)}})
    with pytest.raises(StateCapExceeded):
        brute_force_count(q, db, state_cap=10)


@given(query_and_db(max_atoms=5))
def test_answers_and_projections(qd):
    q, db = qd
    ans = enumerate_answers(q, db)
    assert len(ans.rows) == brute_force_count(q, db)
    assert ans == project(full_solutions(q, db), q.free)
    for W in (frozenset(), frozenset(sorted(q.free)[:1])):
        assert project(ans, W) == project(full_solutions(q, db), W)


@given(query_and_db(max_atoms=5))
def test_invariant_under_reordering(qd):
    q, db = qd
    rev = q.with_atoms(tuple(reversed(q.atoms)))
    shuffled = Database({k: list(reversed(sorted(v))) for k, v in db.relations.items()}, db.arities)
    assert brute_force_count(rev, shuffled) == brute_force_count(q, db)


def test_core_preserves_answers(rng):
    for i in range(50):
        q = q0() if i % 2 else q1()
        db = random_database(q, rng, domain=3, tuples=6)
        c = uncolored(core(color(q)))
        assert brute_force_count(c, db) == brute_force_count(q, db)
