"""Tree projections, (generalized) hypertree decompositions and #-decompositions.

The search is the component recursion: choose a bag containing the current
connector, split the current component by it, recurse on each piece. Bags are
handled as bitmasks over the nodes of the hypergraph being decomposed.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

from .errors import IncompatibleDecomposition, SearchBudgetExceeded
from .homomorphism import color, core, enumerate_cores
from .hypergraph import Hypergraph, JoinTree, covers, frontier_hypergraph, gyo_reduce, hypergraph_of
from .relational import Atom, Database, Query, Relation, Var, atom_relation, project, semijoin, uncolored
from .views import View, ViewSet, build_view_set, query_views, view_set_with  # noqa: F401  (re-exported)


@dataclass(frozen=True)
class HypertreeDecomposition:
    """Rooted tree given by parent links; vertex 0 is the root.

    chi[v] is a frozenset of variable names, lam[v] a tuple of atoms.
    """

    parent: tuple
    chi: tuple
    lam: tuple

    def __post_init__(self):
        assert len(self.parent) == len(self.chi) == len(self.lam)
        assert not self.parent or self.parent[0] is None

    @property
    def vertices(self) -> range:
        return range(len(self.parent))

    @property
    def width(self) -> int:
        return max((len(l) for l in self.lam), default=0)

    def children(self, v) -> list:
        return [u for u, p in enumerate(self.parent) if p == v]

    def subtree(self, v) -> list:
        out, stack = [], [v]
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(self.children(u))
        return sorted(out)

    def chi_of_subtree(self, v) -> frozenset:
        return frozenset().union(*(self.chi[u] for u in self.subtree(v)))

    def restrict(self, S) -> "HypertreeDecomposition":
        """The same tree with every bag intersected with S."""
        S = frozenset(S)
        return HypertreeDecomposition(self.parent, tuple(c & S for c in self.chi), self.lam)

    def postorder(self) -> list:
        out = []

        def visit(v):
            for c in self.children(v):
                visit(c)
            out.append(v)

        if self.parent:
            visit(0)
        return out

    def to_json(self) -> dict:
        return {
            "width": self.width,
            "vertices": [
                {"id": v, "parent": self.parent[v], "chi": sorted(self.chi[v]),
                 "lambda": [str(a) for a in self.lam[v]]}
                for v in self.vertices
            ],
        }

    def to_text(self) -> str:
        lines = []

        def visit(v, depth):
            lam = ", ".join(str(a) for a in self.lam[v])
            lines.append(f"{'  ' * depth}[{v}] chi={{{','.join(sorted(self.chi[v]))}}} lambda={{{lam}}}")
            for c in self.children(v):
                visit(c, depth + 1)

        if self.parent:
            visit(0, 0)
        return "\n".join(lines)

    def to_dot(self) -> str:
        lines = ["digraph HD {"]
        for v in self.vertices:
            label = "{" + ",".join(sorted(self.chi[v])) + "}\\n" + ", ".join(str(a) for a in self.lam[v])
            lines.append(f'  v{v} [shape=box,label="{label}"];')
            if self.parent[v] is not None:
                lines.append(f"  v{self.parent[v]} -> v{v};")
        lines.append("}")
        return "\n".join(lines)

    def __str__(self):
        return json.dumps(self.to_json(), sort_keys=True)


@dataclass
class ValidationReport:
    conditions: dict = field(default_factory=dict)   # name -> (ok, witness)
    complete: tuple = (True, None)

    @property
    def generalized_ok(self) -> bool:
        return all(self.conditions[c][0] for c in ("coverage", "connectedness", "chi_in_lambda"))

    @property
    def ok(self) -> bool:
        return all(ok for ok, _ in self.conditions.values())


def validate_hd(hd: HypertreeDecomposition, q) -> ValidationReport:
    atoms = list(q.atoms) if isinstance(q, Query) else list(q)
    rep = ValidationReport()
    bad = next((a for a in atoms if not any(a.var_set <= c for c in hd.chi)), None)
    rep.conditions["coverage"] = (bad is None, bad)
    allvars = frozenset().union(*hd.chi) if hd.chi else frozenset()
    bad = None
    for X in sorted(allvars):
        holders = {v for v in hd.vertices if X in hd.chi[v]}
        tops = [v for v in holders if hd.parent[v] is None or hd.parent[v] not in holders]
        if len(tops) != 1:
            bad = X
            break
    rep.conditions["connectedness"] = (bad is None, bad)
    bad = None
    for v in hd.vertices:
        lv = frozenset().union(*(a.var_set for a in hd.lam[v])) if hd.lam[v] else frozenset()
        if not hd.chi[v] <= lv:
            bad = (v, sorted(hd.chi[v] - lv))
            break
    rep.conditions["chi_in_lambda"] = (bad is None, bad)
    bad = None
    for v in hd.vertices:
        lv = frozenset().union(*(a.var_set for a in hd.lam[v])) if hd.lam[v] else frozenset()
        extra = (lv & hd.chi_of_subtree(v)) - hd.chi[v]
        if extra:
            bad = (v, sorted(extra))
            break
    rep.conditions["descendant"] = (bad is None, bad)
    in_lambda = set(a for l in hd.lam for a in l)
    missing = next((a for a in atoms if a not in in_lambda), None)
    rep.complete = (missing is None, missing)
    return rep


# ---------------------------------------------------------------------------
# tree projection search

def _popcount(x: int) -> int:
    return bin(x).count("1")


def _submasks(m: int):
    s = m
    while s:
        yield s
        s = (s - 1) & m
    yield 0


class _ComponentSearch:
    """Component recursion shared by the first-found and minimum-cost searches."""

    def __init__(self, h1: Hypergraph, h2: Hypergraph, admissible: Optional[Callable] = None,
                 max_edge_bits: int = 20, max_states: int = 200_000, prefer: Optional[Callable] = None):
        # isolated nodes need no bag, so only nodes inside edges take part
        used = frozenset().union(*h1.edges) if h1.edges else frozenset()
        self.names = sorted(used)
        self.bit = {v: 1 << i for i, v in enumerate(self.names)}
        self.edges = [self.mask(e) for e in h1.edges]
        self.adj = {}
        for i in range(len(self.names)):
            b = 1 << i
            acc = b
            for e in self.edges:
                if e & b:
                    acc |= e
            self.adj[b] = acc
        allowed = set()
        h2_masks = sorted({self.mask(e & used) for e in h2.edges}, key=_popcount, reverse=True)
        for m in h2_masks:
            if m in allowed:
                continue
            if _popcount(m) > max_edge_bits:
                raise SearchBudgetExceeded(f"a view restricted to the query has {_popcount(m)} variables")
            allowed.update(_submasks(m))
        self.allowed = allowed
        self.admissible = admissible
        self._adm_cache: dict = {}
        self.prefer = prefer
        self._pref_cache: dict = {}
        self.max_states = max_states
        self.memo: dict = {}

    def mask(self, vs) -> int:
        m = 0
        for v in vs:
            m |= self.bit[v]
        return m

    def unmask(self, m: int) -> frozenset:
        return frozenset(v for v in self.names if self.bit[v] & m)

    def neighbourhood(self, m: int) -> int:
        acc = 0
        while m:
            low = m & -m
            acc |= self.adj[low]
            m ^= low
        return acc

    def components(self, region: int) -> list:
        comps = []
        while region:
            comp = region & -region
            while True:
                grown = self.neighbourhood(comp) & region
                if grown == comp:
                    break
                comp = grown
            comps.append(comp)
            region &= ~comp
        return comps

    def is_admissible(self, bag: int) -> bool:
        if self.admissible is None:
            return True
        hit = self._adm_cache.get(bag)
        if hit is None:
            hit = self._adm_cache[bag] = bool(self.admissible(self.unmask(bag)))
        return hit

    def preferred(self, bag: int) -> bool:
        if self.prefer is None:
            return True
        hit = self._pref_cache.get(bag)
        if hit is None:
            hit = self._pref_cache[bag] = bool(self.prefer(self.unmask(bag)))
        return hit

    def candidates(self, C: int, conn: int) -> list:
        out = [conn | s for s in _submasks(C) if s and (conn | s) in self.allowed]
        # ordering only affects which decomposition is found first, not whether one is
        out.sort(key=lambda b: (not self.preferred(b), -_popcount(b), b))
        return [b for b in out if self.is_admissible(b)]

    def split(self, C: int, B: int) -> list:
        return [(c, B & self.neighbourhood(c)) for c in self.components(C & ~B)]

    def _remember(self, key, value):
        if len(self.memo) >= self.max_states:
            raise SearchBudgetExceeded("tree projection search exceeded its state budget")
        self.memo[key] = value
        return value

    def first(self, C: int, conn: int):
        key = (C, conn)
        if key in self.memo:
            return self.memo[key]
        for B in self.candidates(C, conn):
            kids = []
            for c2, conn2 in self.split(C, B):
                sub = self.first(c2, conn2)
                if sub is None:
                    break
                kids.append(sub)
            else:
                return self._remember(key, (B, tuple(kids)))
        return self._remember(key, None)

    def cheapest(self, C: int, conn: int, cost: Callable):
        key = (C, conn)
        if key in self.memo:
            return self.memo[key]
        best = None
        for B in self.candidates(C, conn):
            total = cost(B)
            if total is None:
                continue
            kids = []
            for c2, conn2 in self.split(C, B):
                sub = self.cheapest(c2, conn2, cost)
                if sub is None:
                    break
                total += sub[0]
                kids.append(sub[1])
            else:
                if best is None or total < best[0]:
                    best = (total, (B, tuple(kids)))
        return self._remember(key, best)

    def top_components(self) -> list:
        return self.components(self.mask(self.names) if self.names else 0)

    def flatten(self, roots: list) -> JoinTree:
        bags, parent = [], []

        def visit(node, par):
            B, kids = node
            idx = len(bags)
            bags.append(self.unmask(B))
            parent.append(par)
            for k in kids:
                visit(k, idx)

        for i, r in enumerate(roots):
            visit(r, None if i == 0 else 0)
        return JoinTree(tuple(bags), tuple(parent))


@dataclass(frozen=True)
class TreeProjection:
    hypergraph: Hypergraph
    tree: JoinTree


def _edges_reachable(h1: Hypergraph, h2: Hypergraph) -> bool:
    return covers(h1, h2)


def tree_projection(h1: Hypergraph, h2: Hypergraph, admissible: Optional[Callable] = None,
                    max_edge_bits: int = 20, max_states: int = 200_000,
                    prefer: Optional[Callable] = None) -> Optional[TreeProjection]:
    """An acyclic hypergraph between h1 and h2, or None if there is none.

    ``admissible`` optionally restricts which bags may be used; ``prefer``
    marks bags to try before the others.
    """
    if not _edges_reachable(h1, h2):
        return None
    search = _ComponentSearch(h1, h2, admissible, max_edge_bits, max_states, prefer)
    roots = []
    for C in search.top_components():
        node = search.first(C, 0)
        if node is None:
            return None
        roots.append(node)
    tree = search.flatten(roots)
    return TreeProjection(Hypergraph(tree.vertices), tree)


def _connected(atoms) -> bool:
    atoms = list(atoms)
    if len(atoms) <= 1:
        return True
    reach = set(atoms[0].var_set)
    rest = atoms[1:]
    grew = True
    while rest and grew:
        grew = False
        for a in list(rest):
            if a.var_set & reach:
                reach |= a.var_set
                rest.remove(a)
                grew = True
    return not rest


def connected_cover(vs: ViewSet) -> Callable:
    """Bag predicate: some view over connected atoms covers the bag.

    Bags covered only by views over disconnected atoms are evaluated as
    Cartesian products, so the searches try them last.
    """
    good = [v.vars for v in vs.views if _connected(v.provenance)]
    return lambda bag: any(bag <= g for g in good)


def _covering_view(bag, vs: ViewSet, prefer: Optional[Callable] = None) -> View:
    cands = [v for v in vs.views if bag <= v.vars]
    if prefer is not None:
        good = [v for v in cands if prefer(v, bag)]
        cands = good or cands
    return min(cands, key=lambda v: (not _connected(v.provenance), len(v.provenance)))


def projection_to_hd(tp: TreeProjection, vs: ViewSet, prefer: Optional[Callable] = None) -> HypertreeDecomposition:
    """HD over the projection's tree; lambda is the provenance of a covering view."""
    tree = tp.tree
    lam = tuple(_covering_view(b, vs, prefer).provenance for b in tree.vertices)
    return HypertreeDecomposition(tree.parent, tree.vertices, lam)


def ghd(q: Query, k: int) -> Optional[HypertreeDecomposition]:
    """A width-k generalized hypertree decomposition of q's hypergraph."""
    vs = build_view_set(q, min(k, len(q.atoms)))
    tp = tree_projection(hypergraph_of(q), vs.hypergraph(), prefer=connected_cover(vs))
    return None if tp is None else projection_to_hd(tp, vs)


def sharp_target(core_q: Query, free) -> Hypergraph:
    """H' = H_core together with the frontier hypergraph of the core."""
    return hypergraph_of(core_q).union(frontier_hypergraph(core_q, free))


@dataclass(frozen=True)
class SharpDecomposition:
    projection: TreeProjection
    core: Query


def sharp_decomposition(q: Query, vs: ViewSet, cores_to_try: int = 8, cores=None) -> Optional[SharpDecomposition]:
    if cores is None:
        cores = enumerate_cores(color(q), cores_to_try)
    for c in cores[:cores_to_try]:
        tp = tree_projection(sharp_target(c, q.free), vs.hypergraph(), prefer=connected_cover(vs))
        if tp is not None:
            return SharpDecomposition(tp, c)
    return None


class SharpWidth(NamedTuple):
    k: int
    hd: HypertreeDecomposition
    core: Query


def sharp_hypertree_width(q: Query, kmax: int, colored_core: Optional[Query] = None) -> Optional[SharpWidth]:
    """Smallest k <= kmax admitting a width-k #-hypertree decomposition.

    Views are built over the atoms of the (uncolored) core, so lambda labels
    are core atoms. Every core gives the same answer because cores are
    isomorphic.
    """
    c = colored_core if colored_core is not None else core(color(q))
    plain = uncolored(c)
    target = sharp_target(c, q.free)
    for k in range(1, kmax + 1):
        vs = build_view_set(plain, min(k, len(plain.atoms)))
        tp = tree_projection(target, vs.hypergraph(), prefer=connected_cover(vs))
        if tp is not None:
            return SharpWidth(k, projection_to_hd(tp, vs), c)
    return None


# ---------------------------------------------------------------------------
# completion

def complete_hd(hd: HypertreeDecomposition, q: Query, db: Database):
    """Make every atom of q strongly present: in lambda(p) with vars within chi(p).

    Each missing atom becomes a leaf below a vertex whose bag covers it; the
    leaf's relation is the atom's relation filtered by the parent's bag. An
    atom whose symbol is shared with other atoms is renamed to a fresh symbol
    first, so filtering it cannot affect the others. Returns (hd, q, db).
    """
    rep = validate_hd(hd, q)
    if not rep.generalized_ok:
        raise IncompatibleDecomposition(f"decomposition is not valid for the query: {rep.conditions}")
    present = set(a for v in hd.vertices for a in hd.lam[v] if a.var_set <= hd.chi[v])
    parent, chi, lam = list(hd.parent), list(hd.chi), list(hd.lam)
    atoms = list(q.atoms)
    updates = {}
    renamed: dict = {}
    taken = set(q.symbols()) | set(db.relations)
    usage: dict = {}
    for a in atoms:
        usage[a.relation] = usage.get(a.relation, 0) + 1
    r_cache: dict = {}

    def r_of(v):
        if v not in r_cache:
            from .relational import evaluate_atoms
            r_cache[v] = evaluate_atoms(hd.lam[v], db, project_to=hd.chi[v])
        return r_cache[v]

    for i, a in enumerate(atoms):
        if a in present:
            continue
        p = next(v for v in hd.vertices if a.var_set <= hd.chi[v])
        rel = atom_relation(a, db)
        keep = semijoin(rel, project(r_of(p), a.var_set))
        sym = a.relation
        if usage[sym] > 1 or sym in updates:
            base = f"{sym}_f{i}"
            sym = base
            while sym in taken:
                sym = "_" + sym
            taken.add(sym)
        # rebuild tuples in argument order, respecting constants and repeats
        tuples = set()
        for row in keep.rows:
            val = dict(zip(keep.schema, row))
            tuples.add(tuple(val[t.name] if isinstance(t, Var) else t.value for t in a.args))
        updates[sym] = tuples
        new_atom = Atom(sym, a.args)
        if new_atom != a:
            renamed[a] = new_atom
        atoms[i] = new_atom
        parent.append(p)
        chi.append(a.var_set)
        lam.append((new_atom,))
    if renamed:
        # a weakly present atom keeps its place in lambda under the new symbol
        lam = [tuple(renamed.get(x, x) for x in l) for l in lam]
    new_q = q.with_atoms(atoms)
    arities = {a.relation: a.arity for a in atoms if a.relation in updates}
    new_db = db.with_relations(updates, arities) if updates else db
    return HypertreeDecomposition(tuple(parent), tuple(chi), tuple(lam)), new_q, new_db


# ---------------------------------------------------------------------------
# D-optimal normal-form decompositions

def _max_block(rel: Relation, F) -> int:
    if not rel.rows:
        return 0
    Fs = tuple(sorted(set(F) & rel.schema_set))
    groups: dict = {}
    idx = rel.index_of(Fs)
    for row in rel.rows:
        key = tuple(row[i] for i in idx)
        groups[key] = groups.get(key, 0) + 1
    return max(groups.values())


def d_optimal_nf(q: Query, db: Database, k: int, free=None) -> Optional[HypertreeDecomposition]:
    """Width-k normal-form decomposition minimising sum over vertices of
    max over free profiles of (w+1)^(block size), w = number of atoms."""
    from .relational import evaluate_atoms
    F = q.free if free is None else frozenset(free)
    vs = build_view_set(q, min(k, len(q.atoms)))
    h1 = hypergraph_of(q)
    search = _ComponentSearch(h1, vs.hypergraph())
    w = len(q.atoms)
    rel_cache: dict = {}
    choice: dict = {}

    def view_rel(view):
        if view not in rel_cache:
            rel_cache[view] = evaluate_atoms(view.provenance, db, project_to=view.vars)
        return rel_cache[view]

    def cost(bag_mask):
        bag = search.unmask(bag_mask)
        best = None
        for view in vs.views:
            if bag <= view.vars:
                c = (w + 1) ** _max_block(project(view_rel(view), bag), F)
                if best is None or c < best[0] or (c == best[0] and len(view.provenance) < len(best[1].provenance)):
                    best = (c, view)
        choice[bag] = best[1]
        return best[0]

    roots = []
    for C in search.top_components():
        res = search.cheapest(C, 0, cost)
        if res is None:
            return None
        roots.append(res[1])
    tree = search.flatten(roots)
    lam = tuple(choice[b].provenance for b in tree.vertices)
    return HypertreeDecomposition(tree.parent, tree.vertices, lam)


def f_cost(hd: HypertreeDecomposition, db: Database, q: Query, free=None) -> int:
    """The additive cost used by d_optimal_nf, evaluated on a given decomposition."""
    from .relational import evaluate_atoms
    F = q.free if free is None else frozenset(free)
    w = len(q.atoms)
    total = 0
    for v in hd.vertices:
        r = evaluate_atoms(hd.lam[v], db, project_to=hd.chi[v])
        total += (w + 1) ** _max_block(r, F)
    return total


def gyo_check(tp: TreeProjection) -> bool:
    return gyo_reduce(tp.hypergraph) is not None
