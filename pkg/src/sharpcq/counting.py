"""Counting answers: the #-relation dynamic program over a complete
decomposition, and the end-to-end structural pipeline."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Optional

from .config import RunConfig
from .decomposition import (HypertreeDecomposition, TreeProjection, complete_hd, sharp_hypertree_width,
                            validate_hd)
from .errors import (FrontierNotCovered, IncompatibleDecomposition, IncompleteDecomposition,
                     NoDecompositionWithinBudget, SearchBudgetExceeded, UncoveredEdge,
                     WidthAssumptionViolated)
from .homomorphism import color, core, core_via_consistency
from .hypergraph import Hypergraph, JoinTree, component_frontier, hypergraph_of, w_components
from .relational import (Atom, Database, Query, Relation, Var, _getter, evaluate_atoms, project,
                         uncolored)
from .views import (LegalViewDatabase, View, ViewSet, enforce_pairwise_consistency, query_views,
                    standard_view_extension)

log = logging.getLogger(__name__)

__all__ = [
    "SharpRelation", "LegalViewDatabase", "standard_view_extension", "enforce_pairwise_consistency",
    "build_acyclic_instance", "reduce_quantified", "count_via_hd", "count", "CountReport",
    "structural_count",
]


@dataclass
class SharpRelation:
    """Blocks of bag rows sharing a free-variable profile, each with a count."""

    schema: tuple
    blocks: dict   # frozenset(rows) -> int

    def total(self) -> int:
        return sum(self.blocks.values())

    def __len__(self):
        return len(self.blocks)


def _fresh(base: str, taken: set) -> str:
    name = base
    i = 0
    while name in taken:
        i += 1
        name = f"{base}_{i}"
    taken.add(name)
    return name


def _max_group(rel: Relation, F) -> int:
    if not rel.rows:
        return 0
    get = _getter(rel.index_of(sorted(set(F) & rel.schema_set)))
    groups: dict = {}
    for row in rel.rows:
        k = get(row)
        groups[k] = groups.get(k, 0) + 1
    return max(groups.values())


def initial_sharp_relation(rel: Relation, free) -> SharpRelation:
    get = _getter(rel.index_of(sorted(set(free) & rel.schema_set)))
    groups: dict = {}
    for row in rel.rows:
        groups.setdefault(get(row), set()).add(row)
    return SharpRelation(rel.schema, {frozenset(rows): 1 for rows in groups.values()})


def sharp_semijoin(rp: SharpRelation, rq: SharpRelation) -> SharpRelation:
    """R_p ⋉ R_q with counts multiplied and identical blocks merged."""
    shared = tuple(sorted(set(rp.schema) & set(rq.schema)))
    pos_p = {v: i for i, v in enumerate(rp.schema)}
    pos_q = {v: i for i, v in enumerate(rq.schema)}
    key_p = _getter(tuple(pos_p[v] for v in shared))
    key_q = _getter(tuple(pos_q[v] for v in shared))
    # child blocks only matter through their set of shared-variable keys
    agg: dict = {}
    for block, c in rq.blocks.items():
        keys = frozenset(map(key_q, block))
        agg[keys] = agg.get(keys, 0) + c
    by_key: dict = {}
    for keys in agg:
        for k in keys:
            by_key.setdefault(k, []).append(keys)
    out: dict = {}
    for block, cp in rp.blocks.items():
        row_keys = [(row, key_p(row)) for row in block]
        seen = set()
        for _, k in row_keys:
            for keys in by_key.get(k, ()):
                if keys in seen:
                    continue
                seen.add(keys)
                kept = frozenset(row for row, kk in row_keys if kk in keys)
                out[kept] = out.get(kept, 0) + cp * agg[keys]
    return SharpRelation(rp.schema, out)


def _strongly_complete(hd: HypertreeDecomposition, q: Query):
    for a in q.atoms:
        if not any(a in hd.lam[v] and a.var_set <= hd.chi[v] for v in hd.vertices):
            return a
    return None


def count_via_hd(q: Query, db: Database, hd: HypertreeDecomposition, free=None,
                 stats: Optional[dict] = None) -> int:
    """|π_free(q^db)| by the bottom-up #-relation pass over a complete decomposition.

    ``free`` defaults to free(q). ``stats`` (optional dict) receives the
    largest block count seen, the bound it is checked against and the number
    of violations of that bound.
    """
    free = q.free if free is None else frozenset(free)
    rep = validate_hd(hd, q)
    if not rep.generalized_ok:
        raise IncompatibleDecomposition(f"decomposition is not valid for the query: {rep.conditions}")
    missing = _strongly_complete(hd, q)
    if missing is not None:
        raise IncompleteDecomposition(f"atom {missing} is not in any lambda whose bag covers it")
    if not hd.parent:
        raise IncompleteDecomposition("empty decomposition")
    rels = [evaluate_atoms(hd.lam[v], db, project_to=hd.chi[v]) for v in hd.vertices]
    m = max(db.max_tuples, 1)
    h = max((_max_group(r, free) for r in rels), default=0)
    limit = m ** max(hd.width, 1) * 2 ** h
    biggest = 0
    violations = 0
    R: dict = {}
    for v in hd.postorder():
        cur = initial_sharp_relation(rels[v], free)
        for c in hd.children(v):
            cur = sharp_semijoin(cur, R.pop(c))
            biggest = max(biggest, len(cur))
            if len(cur) > limit:
                violations += 1
        biggest = max(biggest, len(cur))
        R[v] = cur
    if stats is not None:
        stats["max_blocks"] = max(stats.get("max_blocks", 0), biggest)
        stats["block_limit"] = limit
        stats["block_violations"] = stats.get("block_violations", 0) + violations
        stats["bound"] = h
    if __debug__ and violations:
        log.error("block cardinality exceeded m^k*2^h (%d > %d)", biggest, limit)
    return R[0].total()


# ---------------------------------------------------------------------------
# structural pipeline

def hd_views(hd: HypertreeDecomposition, atoms) -> ViewSet:
    """One view per decomposition vertex (its bag, its lambda) plus query views."""
    vertex_views = [View(f"bag{v}", hd.chi[v], tuple(hd.lam[v])) for v in hd.vertices]
    return ViewSet(tuple(vertex_views) + tuple(query_views(atoms)))


def hd_projection(hd: HypertreeDecomposition) -> TreeProjection:
    tree = JoinTree(tuple(hd.chi), tuple(hd.parent))
    return TreeProjection(Hypergraph(hd.chi), tree)


def build_acyclic_instance(tp: TreeProjection, vs: ViewSet, lvdb: LegalViewDatabase, free=frozenset()):
    """One fresh atom per tree vertex, holding the projection of a covering view."""
    taken = set()
    atoms, rels = [], {}
    arities = {}
    for j, bag in enumerate(tp.tree.vertices):
        idx = next((i for i, v in enumerate(vs.views) if bag <= v.vars), None)
        if idx is None:
            raise UncoveredEdge(f"no view covers {sorted(bag)}")
        sym = _fresh(f"__tp{j}", taken)
        order = tuple(sorted(bag))
        atoms.append(Atom(sym, tuple(Var(x) for x in order)))
        rels[sym] = project(lvdb.relations[idx], bag).rows
        arities[sym] = len(order)
    allv = frozenset().union(*tp.tree.vertices) if tp.tree.vertices else frozenset()
    qa = Query("Qa", tuple(atoms), frozenset(free) & allv) if atoms else None
    return qa, Database(rels, arities)


def reduce_quantified(core_q: Query, tp: TreeProjection, qa_db, db: Database):
    """Replace every quantified component of core_q by one atom over its frontier.

    The frontier atom's relation is taken from the acyclic instance (the
    projection of a bag covering the frontier). Atoms of core_q over free
    variables only are kept with their relations from db. Returns (Q_f, D_f).
    """
    qa, da = qa_db
    free = core_q.free
    h = hypergraph_of(core_q)
    kept = [a for a in core_q.atoms if a.var_set <= free]
    taken = set(db.relations) | set(core_q.symbols())
    extra, arities = {}, {}
    bags = list(tp.tree.vertices)
    for i, comp in enumerate(w_components(h, free)):
        fr = component_frontier(h, comp, free)
        # a bag holding the frontier; for empty frontiers any bag meeting the component
        j = next((j for j, b in enumerate(bags) if fr <= b and (fr or b & comp)), None)
        if j is None:
            raise FrontierNotCovered(f"frontier {sorted(fr)} of component {sorted(comp)} is not covered")
        sym = _fresh(f"__fr{i}", taken)
        order = tuple(sorted(fr))
        rel = Relation(tuple(sorted(bags[j])), da[qa.atoms[j].relation])
        extra[sym] = project(rel, fr).rows
        arities[sym] = len(order)
        kept.append(Atom(sym, tuple(Var(x) for x in order)))
    qf = Query("Qf", tuple(kept), free)
    assert qf.vars <= free, "reduced query still has quantified variables"
    needed = {a.relation for a in kept}
    base = {s: db[s] for s in needed if s in db}
    base_ar = {s: db.arities[s] for s in base if s in db.arities}
    base.update(extra)
    base_ar.update(arities)
    return qf, Database(base, base_ar)


def residual_count(qf: Query, df: Database, tp: TreeProjection, qa_db, out_free, stats=None) -> int:
    """Count π_out_free over Q_f using the tree restricted to vars(Q_f)."""
    qa, da = qa_db
    S = qf.free
    taken = set(df.relations) | set(qf.symbols())
    atoms, rels, arities = [], {}, {}
    chi = []
    for j, bag in enumerate(tp.tree.vertices):
        keep = bag & S
        sym = _fresh(f"__res{j}", taken)
        order = tuple(sorted(keep))
        atoms.append(Atom(sym, tuple(Var(x) for x in order)))
        rels[sym] = project(Relation(tuple(sorted(bag)), da[qa.atoms[j].relation]), keep).rows
        arities[sym] = len(order)
        chi.append(keep)
    parent = list(tp.tree.parent)
    lam = [(a,) for a in atoms]
    if not chi:
        parent, chi, lam = [None], [frozenset()], [()]
    # the tree's root must sit at index 0
    root = parent.index(None)
    if root != 0:
        order = [root] + [i for i in range(len(parent)) if i != root]
        pos = {old: new for new, old in enumerate(order)}
        parent = [None if parent[o] is None else pos[parent[o]] for o in order]
        chi = [chi[o] for o in order]
        lam = [lam[o] for o in order]
    res_q = Query("Qres", tuple(atoms) + qf.atoms, frozenset(out_free)) if (atoms or qf.atoms) else None
    base = dict(df.relations)
    base.update(rels)
    ar = dict(df.arities)
    ar.update(arities)
    res_db = Database(base, ar)
    hd = HypertreeDecomposition(tuple(parent), tuple(chi), tuple(lam))
    hd, res_q, res_db = complete_hd(hd, res_q, res_db)
    return count_via_hd(res_q, res_db, hd, free=out_free, stats=stats)


def structural_count(q: Query, db: Database, hd: HypertreeDecomposition, colored_core: Query,
                     pseudo_free=None, stats: Optional[dict] = None, trace: Optional[dict] = None) -> int:
    """Count answers of q given a #-decomposition of the core for the free set
    ``pseudo_free`` (default free(q)). The final pass counts over free(q)."""
    S = q.free if pseudo_free is None else frozenset(pseudo_free)
    core_q = uncolored(colored_core).with_free(S)
    vs = hd_views(hd, core_q.atoms)
    lvdb = standard_view_extension(core_q, db, vs)
    consistent = enforce_pairwise_consistency(lvdb)
    if trace is not None:
        trace["views"] = vs
        trace["before"] = lvdb
        trace["after"] = consistent
    if consistent.is_empty():
        return 0
    tp = hd_projection(hd)
    qa_db = build_acyclic_instance(tp, vs, consistent, S)
    qf, df = reduce_quantified(core_q, tp, qa_db, db)
    return residual_count(qf, df, tp, qa_db, q.free, stats)


# ---------------------------------------------------------------------------
# orchestration

@dataclass
class CountReport:
    count: int
    mode_used: str
    width: Optional[int] = None
    core_atoms: Optional[list] = None
    bound: Optional[int] = None
    elapsed_ms: Optional[float] = None
    pseudo_free: Optional[list] = None
    core_method: Optional[str] = None
    notes: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    def to_json(self, timings: bool = False) -> dict:
        return {
            "count": str(self.count),
            "width": self.width,
            "core_atoms": self.core_atoms,
            "bound": self.bound,
            "elapsed_ms": round(self.elapsed_ms, 3) if (timings and self.elapsed_ms is not None) else None,
            "mode_used": self.mode_used,
        }


def colored_core_for(q: Query, cfg: RunConfig, notes: Optional[list] = None):
    """Core of color(q) by consistency tests, raising k until the cross-check agrees.

    Falls back to the direct homomorphism-based core if no k <= kmax works.
    """
    cq = color(q)
    for k in range(1, cfg.kmax + 1):
        try:
            return core_via_consistency(cq, k, cross_check=cfg.cross_check), f"consistency(k={k})"
        except WidthAssumptionViolated:
            if notes is not None:
                notes.append(f"consistency core failed its cross-check at k={k}")
    return core(cq), "direct"


def _ground_ok(q: Query, db: Database) -> bool:
    for a in q.atoms:
        if not a.var_set and tuple(t.value for t in a.args) not in db[a.relation]:
            return False
    return True


def count(q: Query, db: Database, cfg: RunConfig = RunConfig()) -> CountReport:
    """Count the answers of q over db, reporting which method produced the number."""
    from .hybrid import count_hybrid, search_sharp_b
    from .oracle import brute_force_count

    t0 = time.perf_counter()
    for a in q.atoms:
        db[a.relation]  # MissingRelation early
    report = None
    if cfg.mode == "oracle":
        report = CountReport(brute_force_count(q, db, cfg.state_cap), "oracle")
    elif not _ground_ok(q, db):
        report = CountReport(0, "structural", notes=["a ground atom is false"])
    else:
        notes: list = []
        if cfg.mode in ("auto", "structural"):
            ccore, method = colored_core_for(q, cfg, notes)
            res = sharp_hypertree_width(q, cfg.kmax, colored_core=ccore)
            if res is not None:
                stats: dict = {}
                n = structural_count(q, db, res.hd, res.core, stats=stats)
                report = CountReport(n, "structural", res.k, [str(a) for a in uncolored(res.core).atoms],
                                     stats.get("bound"), core_method=method, notes=notes, stats=stats)
            elif cfg.mode == "structural":
                raise NoDecompositionWithinBudget(f"no #-hypertree decomposition of width <= {cfg.kmax}")
        if report is None and cfg.mode in ("auto", "hybrid"):
            try:
                found = search_sharp_b(q, db, cfg.kmax, cfg.bmax, max_promoted=cfg.max_promoted,
                                       order=cfg.sbar_order)
            except SearchBudgetExceeded as e:
                if cfg.mode == "hybrid":
                    raise
                notes.append(f"hybrid search gave up: {e}")
                found = None
            if found is not None:
                stats = {}
                n = count_hybrid(q, db, found.hd, found.pseudo_free, colored_core=found.core, stats=stats)
                report = CountReport(n, "hybrid", found.k, [str(a) for a in uncolored(found.core).atoms],
                                     found.b, pseudo_free=sorted(found.pseudo_free), notes=notes, stats=stats)
            elif cfg.mode == "hybrid":
                raise NoDecompositionWithinBudget(
                    f"no #_b decomposition of width {cfg.kmax} with b <= {cfg.bmax}")
        if report is None:
            report = CountReport(brute_force_count(q, db, cfg.state_cap), "oracle", notes=notes)
    report.elapsed_ms = (time.perf_counter() - t0) * 1000
    return report
