import random
from itertools import combinations

import pytest
from hypothesis import given

from sharpcq.corpus import random_instance
from sharpcq.counting import count, structural_count
from sharpcq.decomposition import HypertreeDecomposition, sharp_hypertree_width
from sharpcq.errors import InvalidHybridDecomposition, InvalidSelection, SearchBudgetExceeded
from sharpcq.fixtures import (hybrid_database, hybrid_query, keyed_database, keyed_merged_hd, keyed_query,
                              keyed_width1_hd, q0)
from sharpcq.hybrid import (bound, bound_sorted, count_hybrid, probe_sharp_b, promote_free, search_sharp_b,
                            vertex_degree)
from sharpcq.hypergraph import frontier_hypergraph, hypergraph_of, w_components
from sharpcq.oracle import brute_force_count
from sharpcq.relational import Database, Query, atom

from strategies import query_and_db


def test_degree_of_all_free_vertex_is_one():
    q = Query("Q", (atom("r", "X", "Y"),), frozenset({"X", "Y"}))
    hd = HypertreeDecomposition((None,), (frozenset("XY"),), (q.atoms,))
    db = Database({"r": {(1, 1), (1, 2), (2, 2)}})
    assert vertex_degree(hd, 0, db, q.free) == 1
    assert vertex_degree(hd, 0, db, {"X"}) == 2
    assert vertex_degree(hd, 0, db, set()) == 3
    assert vertex_degree(hd, 0, Database({"r": set()}, {"r": 2}), q.free) == 0


@pytest.mark.parametrize("h", [2, 3])
def test_keyed_instance_degrees(h):
    q, db = keyed_query(h), keyed_database(h)
    m = 2 ** h
    wide = keyed_width1_hd(q)
    assert vertex_degree(wide, 1, db, q.free) == m  # the s vertex carries no free variable
    assert bound(wide, db, q.free).overall == m
    merged = keyed_merged_hd(q)
    assert bound(merged, db, q.free).per_vertex[0] == 1
    assert bound(merged, db, q.free).overall == 1


def test_keyed_relations_have_bound_one():
    q = Query("Q", (atom("r", "X", "Y"), atom("s", "Y", "Z")), frozenset({"X", "Y"}))
    hd = HypertreeDecomposition((None, 0), (frozenset("XY"), frozenset("YZ")), ((q.atoms[0],), (q.atoms[1],)))
    db = Database({"r": {(1, 2), (2, 2)}, "s": {(2, 7), (3, 8)}})
    assert bound(hd, db, q.free).overall == 1


@given(query_and_db(max_atoms=5))
def test_bound_two_code_paths_agree(qd):
    q, db = qd
    res = sharp_hypertree_width(q, 3)
    hd = res.hd
    for F in (q.free, frozenset(), q.vars):
        assert bound(hd, db, F) == bound_sorted(hd, db, F)


def test_promote_free():
    q = q0()
    assert promote_free(q, q.free) == q
    with pytest.raises(InvalidSelection):
        promote_free(q, {"A"})
    with pytest.raises(InvalidSelection):
        promote_free(q, q.free | {"Z"})
    qd = promote_free(q, set("ABCD"))
    assert qd.atoms == q.atoms
    fh = frontier_hypergraph(qd, qd.free)
    assert all(any(e <= f for f in hypergraph_of(q).edges) for e in fh.edges)
    qa = promote_free(q, q.vars)
    assert w_components(hypergraph_of(qa), qa.free) == []


@pytest.mark.parametrize("h", [2, 3])
def test_hybrid_family_search(h):
    q, db = hybrid_query(h), hybrid_database(h)
    found = search_sharp_b(q, db, 2, 16)
    assert found.b == 1 and found.k == 2
    assert found.pseudo_free == q.free | {f"Y{i}" for i in range(h + 1)}
    assert bound(found.hd.restrict(found.pseudo_free), db, q.free).overall <= found.b
    assert count_hybrid(q, db, found.hd, found.pseudo_free, colored_core=found.core) == brute_force_count(q, db)


def test_size_ascending_order_prefers_smaller_selections():
    q, db = hybrid_query(2), hybrid_database(2)
    found = search_sharp_b(q, db, 2, 16, order="minimal")
    assert found.b == 1
    assert len(found.pseudo_free) < len(search_sharp_b(q, db, 2, 16).pseudo_free)


def test_unbounded_variable_never_promoted_below_m():
    q, db = hybrid_query(2), hybrid_database(2)
    m = 4
    quant = sorted(q.quantified - {"Z"})
    for r in range(len(quant) + 1):
        for extra in combinations(quant, r):
            S = q.free | {"Z"} | set(extra)
            assert probe_sharp_b(q, db, 2, m - 1, S) is None


def test_free_selection_is_tried_first():
    from sharpcq.fixtures import cycle_database, q1
    q, db = q1(), cycle_database()
    found = search_sharp_b(q, db, 2, 16)
    assert found.pseudo_free == q.free
    assert found.b == bound(found.hd.restrict(q.free), db, q.free).overall


def test_search_budget():
    q, db = hybrid_query(3), hybrid_database(3)
    with pytest.raises(SearchBudgetExceeded):
        search_sharp_b(q, db, 2, 16, max_promoted=2)


def test_count_hybrid_with_free_selection_matches_structural():
    from sharpcq.fixtures import cycle_database, q1
    q, db = q1(), cycle_database()
    res = sharp_hypertree_width(q, 2)
    assert count_hybrid(q, db, res.hd, q.free, colored_core=res.core) == \
        structural_count(q, db, res.hd, res.core) == brute_force_count(q, db)


def test_count_hybrid_rejects_bad_input():
    from sharpcq.fixtures import cycle_database, q1
    q, db = q1(), cycle_database()
    res = sharp_hypertree_width(q, 2)
    with pytest.raises(InvalidHybridDecomposition):
        count_hybrid(q, db, res.hd, {"A"})
    # a single bag over s1 alone misses most of the query
    r = q.atoms[0]
    thin = HypertreeDecomposition((None,), (r.var_set,), ((r,),))
    with pytest.raises(InvalidHybridDecomposition):
        count_hybrid(q, db, thin, q.free)


def _keyed(db: Database) -> Database:
    rels = {}
    for sym, rows in db.relations.items():
        seen = {}
        for row in sorted(rows, key=repr):
            seen.setdefault(row[0], row)
        rels[sym] = set(seen.values())
    return Database(rels, db.arities)


def test_low_degree_corpus():
    rng = random.Random(7)
    solved = 0
    for i in range(50):
        inst = random_instance(rng, f"k{i}")
        db = _keyed(inst.db)
        q = inst.query
        try:
            found = search_sharp_b(q, db, 1, 16)
        except SearchBudgetExceeded:
            continue
        if found is None:
            continue
        solved += 1
        n = count_hybrid(q, db, found.hd, found.pseudo_free, colored_core=found.core)
        assert n == brute_force_count(q, db)
        res = sharp_hypertree_width(q, 1)
        if res is not None:
            assert n == structural_count(q, db, res.hd, res.core)
    assert solved >= 25
