"""Hypergraphs, [W]-components, frontiers and acyclicity via GYO."""
from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional

from .errors import UnknownVariable
from .relational import Query


def edge_key(e) -> tuple:
    return (len(e), tuple(sorted(e)))


@dataclass(frozen=True)
class Hypergraph:
    nodes: frozenset
    edges: frozenset

    def __init__(self, edges: Iterable = (), nodes: Iterable = ()):
        es = frozenset(frozenset(e) for e in edges if e)
        ns = frozenset(nodes).union(*es) if es else frozenset(nodes)
        object.__setattr__(self, "edges", es)
        object.__setattr__(self, "nodes", ns)

    def sorted_edges(self) -> list:
        return sorted(self.edges, key=edge_key)

    def union(self, other: "Hypergraph") -> "Hypergraph":
        return Hypergraph(self.edges | other.edges, self.nodes | other.nodes)

    def edges_touching(self, vs) -> list:
        return [e for e in self.edges if e & vs]

    def to_json(self) -> dict:
        return {
            "nodes": sorted(self.nodes),
            "edges": [sorted(e) for e in self.sorted_edges()],
        }

    def to_dot(self, name="H") -> str:
        """Bipartite DOT rendering: one box per edge, one ellipse per node."""
        lines = [f"graph {name} {{"]
        for v in sorted(self.nodes):
            lines.append(f'  "{v}" [shape=ellipse];')
        for i, e in enumerate(self.sorted_edges()):
            lines.append(f'  e{i} [shape=box,label="{",".join(sorted(e))}"];')
            for v in sorted(e):
                lines.append(f'  e{i} -- "{v}";')
        lines.append("}")
        return "\n".join(lines)

    def __repr__(self):
        return "Hypergraph(" + json.dumps([sorted(e) for e in self.sorted_edges()]) + ")"


def hypergraph_of(atoms) -> Hypergraph:
    if isinstance(atoms, Query):
        atoms = atoms.atoms
    atoms = list(atoms)
    nodes = frozenset().union(*(a.var_set for a in atoms)) if atoms else frozenset()
    return Hypergraph((a.var_set for a in atoms), nodes)


def covers(h1: Hypergraph, h2: Hypergraph) -> bool:
    """True iff every edge of h1 is inside some edge of h2."""
    return all(any(e1 <= e2 for e2 in h2.edges) for e1 in h1.edges)


def w_components(h: Hypergraph, W) -> list:
    W = frozenset(W)
    remaining = set(h.nodes - W)
    adj: dict = {v: set() for v in remaining}
    for e in h.edges:
        rest = e - W
        for v in rest:
            adj[v] |= rest
    comps = []
    while remaining:
        start = min(remaining)
        comp = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if u not in comp:
                    comp.add(u)
                    stack.append(u)
        remaining -= comp
        comps.append(frozenset(comp))
    comps.sort(key=min)
    return comps


def component_frontier(h: Hypergraph, comp, W) -> frozenset:
    W = frozenset(W)
    touched = frozenset().union(*(e for e in h.edges if e & comp)) if comp else frozenset()
    return W & touched


def frontier(Y: str, W, h: Hypergraph) -> frozenset:
    W = frozenset(W)
    if Y not in h.nodes and Y not in W:
        raise UnknownVariable(f"{Y} is not a node of the hypergraph")
    if Y in W:
        return frozenset()
    for comp in w_components(h, W):
        if Y in comp:
            return component_frontier(h, comp, W)
    raise AssertionError("unreachable")


def frontier_hypergraph(q, W) -> Hypergraph:
    """Edges: every nonempty frontier w.r.t. W plus the original edges inside W."""
    W = frozenset(W)
    h = hypergraph_of(q)
    edges = set()
    for comp in w_components(h, W):
        fr = component_frontier(h, comp, W)
        if fr:
            edges.add(fr)
    edges.update(e for e in h.edges if e <= W)
    return Hypergraph(edges, h.nodes | W)


@dataclass(frozen=True)
class JoinTree:
    """A rooted tree whose vertices are hyperedges; vertex 0 need not be the root."""

    vertices: tuple
    parent: tuple

    @property
    def root(self) -> Optional[int]:
        for i, p in enumerate(self.parent):
            if p is None:
                return i
        return None

    def children(self, i) -> list:
        return [j for j, p in enumerate(self.parent) if p == i]

    def hypergraph(self) -> Hypergraph:
        return Hypergraph(self.vertices)

    def is_connected_for(self, X) -> bool:
        holders = {i for i, v in enumerate(self.vertices) if X in v}
        if not holders:
            return True
        # in a rooted tree a vertex set is connected iff exactly one member has its parent outside
        tops = [i for i in holders if self.parent[i] is None or self.parent[i] not in holders]
        return len(tops) == 1

    def check_connectedness(self) -> bool:
        nodes = frozenset().union(*self.vertices) if self.vertices else frozenset()
        return all(self.is_connected_for(X) for X in nodes)


def gyo_reduce(h: Hypergraph) -> Optional[JoinTree]:
    """Ear removal with smallest-first tie-breaking; returns a join tree or None."""
    order = h.sorted_edges()
    if not order:
        return JoinTree((), ())
    alive = list(range(len(order)))
    parent: list = [None] * len(order)
    while len(alive) > 1:
        found = False
        for i in alive:
            others = [j for j in alive if j != i]
            rest = frozenset().union(*(order[j] for j in others))
            shared = order[i] & rest
            for j in others:
                if shared <= order[j]:
                    parent[i] = j
                    alive.remove(i)
                    found = True
                    break
            if found:
                break
        if not found:
            return None
    return JoinTree(tuple(order), tuple(parent))


def is_acyclic(h: Hypergraph) -> bool:
    return gyo_reduce(h) is not None


def _max_independent(candidates: list, adjacent) -> int:
    for size in range(len(candidates), 0, -1):
        for sub in combinations(candidates, size):
            if all(not adjacent(a, b) for a, b in combinations(sub, 2)):
                return size
    return 0


def quantified_star_size(q: Query) -> int:
    h = hypergraph_of(q)

    def adjacent(a, b):
        return any(a in e and b in e for e in h.edges)

    best = 0
    for comp in w_components(h, q.free):
        fr = component_frontier(h, comp, q.free)
        best = max(best, _max_independent(sorted(fr), adjacent))
    return best


def atoms_hypergraph_with_frontiers(atoms, W) -> Hypergraph:
    """edges(H_atoms) together with the frontier hypergraph w.r.t. W."""
    return hypergraph_of(atoms).union(frontier_hypergraph(atoms, W))


__all__ = [
    "Hypergraph", "JoinTree", "covers", "frontier", "frontier_hypergraph",
    "gyo_reduce", "hypergraph_of", "is_acyclic", "quantified_star_size", "w_components",
]
