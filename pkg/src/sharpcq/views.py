"""View sets, legal view databases and pairwise consistency."""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Optional

from .errors import InvalidWidth
from .hypergraph import Hypergraph
from .relational import Database, Query, Relation, Var, _getter, atom_relation, evaluate_atoms


@dataclass(frozen=True)
class View:
    name: str
    vars: frozenset
    provenance: tuple
    is_query_view: bool = False

    def __str__(self):
        return f"{self.name}({','.join(sorted(self.vars))})"


@dataclass(frozen=True)
class ViewSet:
    views: tuple

    @property
    def query_views(self) -> tuple:
        return tuple(v for v in self.views if v.is_query_view)

    def hypergraph(self) -> Hypergraph:
        return Hypergraph(v.vars for v in self.views)

    def __len__(self):
        return len(self.views)

    def covering(self, bag) -> list:
        return [v for v in self.views if bag <= v.vars]


def query_views(atoms) -> list:
    return [View(f"wq{i}", a.var_set, (a,), True) for i, a in enumerate(atoms)]


def build_view_set(q: Query, k: int) -> ViewSet:
    """One view per k-subset of atoms plus one query view per atom."""
    atoms = q.atoms
    if not 1 <= k <= len(atoms):
        raise InvalidWidth(f"width {k} outside 1..{len(atoms)}")
    views = [View(f"w{i}", frozenset().union(*(a.var_set for a in sub)), tuple(sub))
             for i, sub in enumerate(combinations(atoms, k))]
    views.extend(query_views(atoms))
    assert len(views) == comb(len(atoms), k) + len(atoms)
    return ViewSet(tuple(views))


def view_set_with(q: Query, extra) -> ViewSet:
    """Query views of q plus the given (name, vars, provenance) views."""
    views = [View(name, frozenset(vs), tuple(prov)) for name, vs, prov in extra]
    views.extend(query_views(q.atoms))
    return ViewSet(tuple(views))


@dataclass(frozen=True)
class LegalViewDatabase:
    viewset: ViewSet
    relations: tuple
    pairwise_consistent: bool = False

    def relation_of(self, view: View) -> Relation:
        return self.relations[self.viewset.views.index(view)]

    def is_empty(self) -> bool:
        return any(not r.rows for r in self.relations)


def view_relation(view: View, db: Database) -> Relation:
    if view.is_query_view:
        return atom_relation(view.provenance[0], db)
    return evaluate_atoms(view.provenance, db, project_to=view.vars)


def standard_view_extension(q: Query, db: Database, vs: ViewSet) -> LegalViewDatabase:
    return LegalViewDatabase(vs, tuple(view_relation(v, db) for v in vs.views))


def enforce_pairwise_consistency(lvdb: LegalViewDatabase, rng: Optional[random.Random] = None) -> LegalViewDatabase:
    """Semijoin every pair of views until nothing changes.

    Pairs with disjoint schemas only matter when one side is empty, in which
    case the fixpoint is the all-empty database. ``rng`` shuffles the
    processing order (the fixpoint does not depend on it).
    """
    rels = list(lvdb.relations)
    n = len(rels)
    if any(not r.rows for r in rels):
        return LegalViewDatabase(lvdb.viewset, tuple(Relation.empty(r.schema) for r in rels), True)
    links = [[] for _ in range(n)]
    for i in range(n):
        si = rels[i].schema_set
        for j in range(n):
            if i != j:
                shared = tuple(sorted(si & rels[j].schema_set))
                if shared:
                    links[i].append((j, _getter(rels[i].index_of(shared)), _getter(rels[j].index_of(shared))))
    order = list(range(n))
    if rng is not None:
        rng.shuffle(order)
        for lst in links:
            rng.shuffle(lst)
    queue = deque(order)
    queued = set(order)
    while queue:
        i = queue.popleft()
        queued.discard(i)
        rows_i = rels[i].rows
        for j, key_i, key_j in links[i]:
            keys = set(map(key_i, rows_i))
            rows_j = rels[j].rows
            kept = frozenset(r for r in rows_j if key_j(r) in keys)
            if len(kept) != len(rows_j):
                rels[j] = Relation(rels[j].schema, kept)
                if not kept:
                    return LegalViewDatabase(lvdb.viewset, tuple(Relation.empty(r.schema) for r in rels), True)
                if j not in queued:
                    queued.add(j)
                    queue.append(j)
    return LegalViewDatabase(lvdb.viewset, tuple(rels), True)


def query_as_database(atoms) -> Database:
    """The structure of a set of atoms: variables become Var values, constants stay raw."""
    rels: dict = {}
    for a in atoms:
        rels.setdefault(a.relation, set()).add(tuple(t if isinstance(t, Var) else t.value for t in a.args))
    return Database(rels)
