import json
import random

import pytest
from hypothesis import given, settings

from sharpcq.config import RunConfig
from sharpcq.counting import (build_acyclic_instance, count, count_via_hd, hd_projection, hd_views,
                              initial_sharp_relation, reduce_quantified, structural_count)
from sharpcq.decomposition import (HypertreeDecomposition, complete_hd, ghd, sharp_decomposition,
                                   sharp_hypertree_width)
from sharpcq.errors import IncompleteDecomposition, NoDecompositionWithinBudget, UncoveredEdge
from sharpcq.fixtures import cycle_database, q0, q0_hd, q0_views, q1, random_database
from sharpcq.homomorphism import color, core, enumerate_cores
from sharpcq.oracle import brute_force_count, enumerate_answers, full_solutions
from sharpcq.relational import (Database, Query, Relation, atom, evaluate_atoms, natural_join, project,
                                uncolored)
from sharpcq.views import (LegalViewDatabase, build_view_set, enforce_pairwise_consistency,
                           standard_view_extension)

from strategies import query_and_db

Q1_ON_CYCLE = 4  # golden value, recorded from the brute-force oracle


def test_initial_blocks_partition_the_bag():
    r = Relation.make(("A", "B", "C"), {(1, 1, 1), (1, 2, 1), (2, 1, 1), (2, 1, 2)})
    sr = initial_sharp_relation(r, {"A"})
    assert sum(len(b) for b in sr.blocks) == len(r.rows)
    assert set(sr.blocks.values()) == {1}
    for block in sr.blocks:
        assert len({row[0] for row in block}) == 1


def test_single_vertex_count():
    q = Query("Q", (atom("r", "X", "Y"),), frozenset({"X"}))
    db = Database({"r": {(1, 1), (1, 2), (2, 1)}})
    hd = HypertreeDecomposition((None,), (frozenset("XY"),), (q.atoms,))
    assert count_via_hd(q, db, hd) == 2


def test_count_via_hd_all_free_counts_full_solutions(rng):
    q = q0().with_free(q0().vars)
    hd, q2, db2 = complete_hd(q0_hd(), q, random_database(q, rng, domain=3, tuples=8))
    assert count_via_hd(q2, db2, hd) == len(full_solutions(q2, db2).rows)


def test_count_via_hd_q0_random(rng):
    q = q0()
    for _ in range(5):
        db = random_database(q, rng, domain=4, tuples=40 // 4)
        hd, q2, db2 = complete_hd(q0_hd(), q, db)
        stats = {}
        assert count_via_hd(q2, db2, hd, stats=stats) == brute_force_count(q, db)
        assert stats["block_violations"] == 0


def test_count_via_hd_independent_of_child_order(rng):
    q = q0()
    db = random_database(q, rng, domain=3, tuples=9)
    hd, q2, db2 = complete_hd(q0_hd(), q, db)
    n = len(hd.parent)
    perm = [0] + list(range(n - 1, 0, -1))  # reverse all non-root vertices
    pos = {old: new for new, old in enumerate(perm)}
    swapped = HypertreeDecomposition(
        tuple(None if hd.parent[o] is None else pos[hd.parent[o]] for o in perm),
        tuple(hd.chi[o] for o in perm), tuple(hd.lam[o] for o in perm))
    assert count_via_hd(q2, db2, swapped) == count_via_hd(q2, db2, hd)


def test_count_via_hd_requires_completeness(rng):
    q = q0()
    with pytest.raises(IncompleteDecomposition):
        count_via_hd(q, random_database(q, rng), q0_hd())


def test_standard_view_extension(rng):
    q = q1()
    db = random_database(q, rng, domain=3, tuples=5)
    lv1 = standard_view_extension(q, db, build_view_set(q, 1))
    assert all(r == evaluate_atoms(v.provenance, db) for v, r in zip(lv1.viewset.views, lv1.relations))
    vs = build_view_set(q, 2)
    lv2 = standard_view_extension(q, db, vs)
    s1, s2 = q.atoms[:2]
    i = next(i for i, v in enumerate(vs.views) if set(v.provenance) == {s1, s2})
    assert lv2.relations[i] == evaluate_atoms([s1, s2], db)
    empty = db.with_relations({"s1": set()})
    lv3 = standard_view_extension(q, empty, vs)
    assert all(not r.rows for v, r in zip(vs.views, lv3.relations) if s1 in v.provenance)


def test_pairwise_consistency_basics():
    q = Query("Q", (atom("r", "X", "Y"), atom("s", "X", "Z")), frozenset())
    vs = build_view_set(q, 1)
    db = Database({"r": {(1, 2)}, "s": {(1, 3)}})
    lv = standard_view_extension(q, db, vs)
    out = enforce_pairwise_consistency(lv)
    assert out.relations == lv.relations and out.pairwise_consistent
    db = Database({"r": {(1, 2)}, "s": {(2, 3)}})
    out = enforce_pairwise_consistency(standard_view_extension(q, db, vs))
    assert out.is_empty() and all(not r.rows for r in out.relations)


@given(query_and_db(max_atoms=5))
def test_pairwise_consistency_fixpoint_and_confluence(qd):
    from sharpcq.relational import semijoin
    q, db = qd
    vs = build_view_set(q, min(2, len(q.atoms)))
    lv = standard_view_extension(q, db, vs)
    out = enforce_pairwise_consistency(lv)
    for r, before in zip(out.relations, lv.relations):
        assert r.rows <= before.rows
    for a in out.relations:
        for b in out.relations:
            assert semijoin(a, b) == a
    for seed in range(3):
        shuffled = enforce_pairwise_consistency(lv, rng=random.Random(seed))
        assert shuffled.relations == out.relations


@given(query_and_db(max_atoms=5))
def test_consistency_is_sound(qd):
    q, db = qd
    sols = full_solutions(q, db)
    vs = build_view_set(q, min(2, len(q.atoms)))
    out = enforce_pairwise_consistency(standard_view_extension(q, db, vs))
    for v, r in zip(vs.views, out.relations):
        assert project(sols, v.vars).rows <= r.rows


@given(query_and_db(max_atoms=5))
def test_views_of_a_tree_projection_are_exact_after_consistency(qd):
    q, db = qd
    hd = ghd(q, 2)
    if hd is None:
        return
    vs = hd_views(hd, q.atoms)
    out = enforce_pairwise_consistency(standard_view_extension(q, db, vs))
    sols = full_solutions(q, db)
    for v, r in zip(vs.views, out.relations):
        assert r.rows == project(sols, v.vars).rows


def test_acyclic_instance_single_edge():
    q = Query("Q", (atom("r", "X", "Y"), atom("s", "Y", "X")), frozenset({"X"}))
    hd = HypertreeDecomposition((None,), (frozenset("XY"),), (q.atoms,))
    vs = hd_views(hd, q.atoms)
    db = Database({"r": {(1, 2), (2, 3)}, "s": {(2, 1), (5, 5)}})
    lv = enforce_pairwise_consistency(standard_view_extension(q, db, vs))
    qa, da = build_acyclic_instance(hd_projection(hd), vs, lv, q.free)
    assert len(qa.atoms) == 1
    assert len(da[qa.atoms[0].relation]) == len(lv.relations[0].rows) == 1


def test_acyclic_instance_uncovered_edge():
    q = Query("Q", (atom("r", "X", "Y"),), frozenset())
    hd = HypertreeDecomposition((None,), (frozenset("XYZ"),), (q.atoms,))
    vs = build_view_set(q, 1)
    lv = standard_view_extension(q, Database({"r": {(1, 2)}}), vs)
    with pytest.raises(UncoveredEdge):
        build_acyclic_instance(hd_projection(hd), vs, lv)


def _q0_pipeline(db):
    cores = enumerate_cores(color(q0()))
    vs = q0_views()
    sd = sharp_decomposition(q0(), vs, cores=cores)
    core_q = uncolored(sd.core).with_free(q0().free)
    lv = enforce_pairwise_consistency(standard_view_extension(core_q, db, vs))
    return sd, core_q, vs, lv


def test_q0_acyclic_instance_and_reduction(rng):
    for _ in range(10):
        db = random_database(q0(), rng, domain=3, tuples=6)
        sd, core_q, vs, lv = _q0_pipeline(db)
        qa, da = build_acyclic_instance(sd.projection, vs, lv, core_q.free)
        assert {a.var_set for a in qa.atoms} == set(sd.projection.hypergraph.edges)
        assert {frozenset("ABI"), frozenset("BCD"), frozenset("DFH")} <= {a.var_set for a in qa.atoms}
        if lv.is_empty():
            continue
        want = project(full_solutions(core_q, db), qa.vars)
        assert full_solutions(qa, da) == want
        qf, df = reduce_quantified(core_q, sd.projection, (qa, da), db)
        assert qf.vars == qf.free == core_q.free
        fr = sorted("".join(sorted(a.var_set)) for a in qf.atoms)
        assert fr == ["AB", "B", "BC"]
        assert brute_force_count(qf, df) == brute_force_count(q0(), db)


def test_reduce_without_quantified_variables(rng):
    q = q1().with_free(q1().vars)
    db = random_database(q, rng, domain=3, tuples=6)
    hd = sharp_hypertree_width(q, 2).hd
    vs = hd_views(hd, q.atoms)
    lv = enforce_pairwise_consistency(standard_view_extension(q, db, vs))
    qa_db = build_acyclic_instance(hd_projection(hd), vs, lv, q.free)
    qf, df = reduce_quantified(q, hd_projection(hd), qa_db, db)
    assert qf.atoms == q.atoms


def test_q1_on_directed_cycle_golden():
    db = cycle_database()
    assert brute_force_count(q1(), db) == Q1_ON_CYCLE
    assert count(q1(), db).count == Q1_ON_CYCLE
    assert count(q1(), db, RunConfig(mode="structural")).mode_used == "structural"


def test_boolean_queries():
    q = q1().with_free(frozenset())
    assert count(q, cycle_database()).count == 1
    assert count(q, cycle_database(edges=((1, 2), (2, 3)))).count == 0


def test_structural_mode_fails_without_decomposition():
    with pytest.raises(NoDecompositionWithinBudget):
        count(q1(), cycle_database(), RunConfig(kmax=1, mode="structural"))


def test_report_json_is_deterministic():
    a = json.dumps(count(q0(), random_database(q0(), random.Random(3))).to_json(), sort_keys=True)
    b = json.dumps(count(q0(), random_database(q0(), random.Random(3))).to_json(), sort_keys=True)
    assert a == b
    keys = set(json.loads(a))
    assert keys == {"count", "width", "core_atoms", "bound", "elapsed_ms", "mode_used"}
    assert isinstance(json.loads(a)["count"], str)


@given(query_and_db(max_atoms=6, n_vars=6, symbols=("r", "s", "t")))
def test_count_matches_oracle(qd):
    q, db = qd
    rep = count(q, db, RunConfig(kmax=2))
    assert rep.count == brute_force_count(q, db)
    assert rep.count == len(enumerate_answers(q, db).rows)


@given(query_and_db(max_atoms=5))
def test_structural_trace_is_sound(qd):
    q, db = qd
    res = sharp_hypertree_width(q, 3)
    trace = {}
    n = structural_count(q, db, res.hd, res.core, trace=trace)
    assert n == brute_force_count(q, db)
    core_q = uncolored(res.core)
    sols = full_solutions(core_q, db)
    for v, before, after in zip(trace["views"].views, trace["before"].relations, trace["after"].relations):
        gone = before.rows - after.rows
        assert not (gone & project(sols, v.vars).rows)
