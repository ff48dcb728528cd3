"""Degree-bounded hybrid decompositions.

Some quantified variables can be promoted to pseudo-free ones when the data
gives them few extensions per free profile. The promoted set S̄ is handled
structurally (its frontiers must be covered) while the degree of the
remaining bags, measured w.r.t. the real free variables, stays at most b.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from itertools import combinations
from typing import Iterator, Optional

from .decomposition import (HypertreeDecomposition, build_view_set, connected_cover, projection_to_hd, sharp_target,
                            tree_projection, validate_hd)
from .errors import InvalidHybridDecomposition, InvalidSelection, SearchBudgetExceeded
from .homomorphism import color, core
from .relational import (Database, Query, Relation, _getter, atom_relation, evaluate_atoms, natural_join,
                         project, row_key, uncolored)


@dataclass(frozen=True)
class DegreeProfile:
    per_vertex: tuple
    overall: int
    F: frozenset


def degree_of(rel: Relation, F) -> int:
    """Largest number of rows sharing one assignment of F ∩ schema."""
    if not rel.rows:
        return 0
    get = _getter(rel.index_of(sorted(set(F) & rel.schema_set)))
    groups: dict = {}
    for row in rel.rows:
        k = get(row)
        groups[k] = groups.get(k, 0) + 1
    return max(groups.values())


def vertex_relation(hd: HypertreeDecomposition, v: int, db: Database) -> Relation:
    return evaluate_atoms(hd.lam[v], db, project_to=hd.chi[v])


def vertex_degree(hd: HypertreeDecomposition, v: int, db: Database, F) -> int:
    return degree_of(vertex_relation(hd, v, db), F)


def bound(hd: HypertreeDecomposition, db: Database, F) -> DegreeProfile:
    F = frozenset(F)
    per = tuple(vertex_degree(hd, v, db, F) for v in hd.vertices)
    return DegreeProfile(per, max(per, default=0), F)


def bound_sorted(hd: HypertreeDecomposition, db: Database, F) -> DegreeProfile:
    """Same quantity as bound(), computed by a left fold of joins and a sort-and-scan."""
    F = frozenset(F)
    per = []
    for v in hd.vertices:
        rels = [atom_relation(a, db) for a in hd.lam[v]]
        joined = reduce(natural_join, rels) if rels else Relation.unit()
        r = project(joined, hd.chi[v])
        idx = r.index_of(sorted(F & r.schema_set))
        keys = sorted((tuple(row[i] for i in idx) for row in r.rows), key=row_key)
        best, run = 0, 0
        for i, k in enumerate(keys):
            run = run + 1 if i and keys[i - 1] == k else 1
            best = max(best, run)
        per.append(best)
    per = tuple(per)
    return DegreeProfile(per, max(per, default=0), F)


def promote_free(q: Query, S) -> Query:
    S = frozenset(S)
    if not q.free <= S <= q.vars:
        raise InvalidSelection(f"selection must contain the free variables and stay inside vars(q): {sorted(S)}")
    return q.with_free(S)


def selections(q: Query, order: str = "maximal") -> Iterator[frozenset]:
    """Candidate pseudo-free sets: free(q) first, then the others.

    ``maximal`` lists the rest by decreasing size, ``minimal`` by increasing
    size; ties are lexicographic on the sorted variable names.
    """
    quant = sorted(q.quantified)
    yield q.free
    sizes = range(len(quant), 0, -1) if order == "maximal" else range(1, len(quant) + 1)
    for size in sizes:
        for extra in combinations(quant, size):
            yield q.free | frozenset(extra)


@dataclass(frozen=True)
class HybridDecomposition:
    hd: HypertreeDecomposition
    pseudo_free: frozenset
    b: int
    k: int
    core: Query


class _Prober:
    """Runs the degree-filtered tree projection search for (S̄, b) pairs."""

    def __init__(self, q: Query, db: Database, k: int):
        self.q, self.db, self.k = q, db, k
        self._rel: dict = {}
        self._deg: dict = {}
        self._setup: dict = {}

    def rel(self, prov) -> Relation:
        r = self._rel.get(prov)
        if r is None:
            r = self._rel[prov] = evaluate_atoms(prov, self.db)
        return r

    def deg(self, prov, cols) -> int:
        key = (prov, cols)
        d = self._deg.get(key)
        if d is None:
            d = self._deg[key] = degree_of(project(self.rel(prov), cols), self.q.free)
        return d

    def setup(self, S):
        s = self._setup.get(S)
        if s is None:
            cc = core(color(promote_free(self.q, S)))
            plain = uncolored(cc)
            vs = build_view_set(plain, min(self.k, len(plain.atoms)))
            s = self._setup[S] = (cc, vs, sharp_target(cc, S))
        return s

    def probe(self, S, b: Optional[int]):
        """A decomposition for S̄ = S whose χ_S̄-bags have degree <= b (None: no limit)."""
        cc, vs, target = self.setup(S)
        views = vs.views

        def ok(view, bag):
            return b is None or self.deg(view.provenance, bag & S) <= b

        def admissible(bag):
            return any(bag <= w.vars and ok(w, bag) for w in views)

        tp = tree_projection(target, vs.hypergraph(), None if b is None else admissible,
                             prefer=connected_cover(vs))
        if tp is None:
            return None
        return projection_to_hd(tp, vs, prefer=ok), cc


def probe_sharp_b(q: Query, db: Database, k: int, b: int, S) -> Optional[HybridDecomposition]:
    """Test a single (b, S̄) pair."""
    found = _Prober(q, db, k).probe(frozenset(S), b)
    if found is None:
        return None
    return HybridDecomposition(found[0], frozenset(S), b, k, found[1])


def search_sharp_b(q: Query, db: Database, k: int, bmax: int, max_promoted: int = 12,
                   order: str = "maximal") -> Optional[HybridDecomposition]:
    """Minimum b <= bmax admitting a width-k #_b decomposition.

    Equivalent to looping b upwards and, for each b, scanning S̄ in the given
    order: feasibility is monotone in b, so for each S̄ we find its least b
    by bisection and keep the (b, position) minimum.
    """
    if len(q.quantified) > max_promoted:
        raise SearchBudgetExceeded(f"{len(q.quantified)} quantified variables exceed the cap of {max_promoted}")
    prober = _Prober(q, db, k)
    best = None
    for S in selections(q, order):
        hi = bmax if best is None else best.b - 1
        if hi < 1:
            break
        if prober.probe(S, None) is None:
            continue
        found = prober.probe(S, hi)
        if found is None:
            continue
        lo, top = 1, hi
        while lo < top:
            mid = (lo + top) // 2
            got = prober.probe(S, mid)
            if got is not None:
                top, found = mid, got
            else:
                lo = mid + 1
        best = HybridDecomposition(found[0], S, top, k, found[1])
        assert bound(best.hd.restrict(S), db, q.free).overall <= top
    return best


def count_hybrid(q: Query, db: Database, hd: HypertreeDecomposition, S, colored_core: Optional[Query] = None,
                 stats: Optional[dict] = None) -> int:
    """Count answers of q using a #-decomposition of q[S̄] whose χ_S̄ bags have bounded degree."""
    from .counting import structural_count
    S = frozenset(S)
    try:
        qs = promote_free(q, S)
    except InvalidSelection as e:
        raise InvalidHybridDecomposition(str(e)) from None
    cc = colored_core if colored_core is not None else core(color(qs))
    plain = uncolored(cc)
    core_atoms = set(plain.atoms)
    if any(a not in core_atoms for lam in hd.lam for a in lam):
        raise InvalidHybridDecomposition("lambda labels must use atoms of the core")
    target = sharp_target(cc, S)
    uncovered = next((e for e in target.edges if not any(e <= c for c in hd.chi)), None)
    if uncovered is not None:
        raise InvalidHybridDecomposition(f"edge {sorted(uncovered)} of the #-target is not covered")
    rep = validate_hd(hd, plain)
    if not rep.generalized_ok:
        raise InvalidHybridDecomposition(f"not a generalized hypertree decomposition: {rep.conditions}")
    return structural_count(q, db, hd, cc, pseudo_free=S, stats=stats)
