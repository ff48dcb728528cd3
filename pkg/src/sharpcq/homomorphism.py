"""Homomorphism search, coloring, and core computation.

Cores are returned in a canonical form: among all cores of a query (which
are isomorphic to each other) we return the one whose atom positions form the
lexicographically least index tuple. The plain deletion loop only fixes the
core size.
"""
from __future__ import annotations

import logging
from typing import Callable, Optional

from .errors import WidthAssumptionViolated
from .relational import Atom, ColoredQuery, Const, Query, Var

log = logging.getLogger(__name__)


def _atoms(x) -> list:
    if isinstance(x, Query):
        return list(x.atoms)
    return list(dict.fromkeys(x))


def find_homomorphism(src, dst, fixed: Optional[dict] = None, injective: bool = False) -> Optional[dict]:
    """Map variables of src to terms of dst so every src atom lands in dst.

    Returns a dict from variable name to Term, or None. Constants are fixed.
    Backtracking picks the atom with the fewest compatible images first.
    """
    src_atoms = _atoms(src)
    index: dict = {}
    for a in _atoms(dst):
        index.setdefault((a.relation, a.arity), []).append(a.args)
    mapping: dict = dict(fixed or {})
    used = set(mapping.values()) if injective else None

    def candidates(a: Atom) -> list:
        out = []
        for args in index.get((a.relation, a.arity), ()):
            local: dict = {}
            ok = True
            for s, d in zip(a.args, args):
                if isinstance(s, Const):
                    if s != d:
                        ok = False
                        break
                    continue
                bound = mapping.get(s.name, local.get(s.name))
                if bound is None:
                    if injective and (d in used or d in local.values()):
                        ok = False
                        break
                    local[s.name] = d
                elif bound != d:
                    ok = False
                    break
            if ok:
                out.append(local)
        return out

    def search(remaining: list) -> bool:
        if not remaining:
            return True
        best = None
        best_cands = None
        for i, a in enumerate(remaining):
            cands = candidates(a)
            if not cands:
                return False
            if best is None or len(cands) < len(best_cands):
                best, best_cands = i, cands
                if len(cands) == 1:
                    break
        rest = remaining[:best] + remaining[best + 1:]
        for local in best_cands:
            mapping.update(local)
            if injective:
                used.update(local.values())
            if search(rest):
                return True
            for v in local:
                del mapping[v]
            if injective:
                used.difference_update(local.values())
        return False

    if search(src_atoms):
        return dict(mapping)
    return None


def color(q: Query) -> ColoredQuery:
    """Add a fresh unary atom per free variable."""
    taken = set(q.symbols())
    extra = []
    symbols = set()
    for X in sorted(q.free):
        sym = f"color_{X}"
        while sym in taken:
            sym = "_" + sym
        taken.add(sym)
        symbols.add(sym)
        extra.append(Atom(sym, (Var(X),)))
    return ColoredQuery(q.name, q.atoms + tuple(extra), q.free, frozenset(symbols))


def _deletion_loop(atoms: list, maps_into: Callable) -> list:
    current = list(atoms)
    for a in atoms:
        trial = [b for b in current if b != a]
        if trial and maps_into(current, trial):
            current = trial
    return current


def _subsets_in_lex_order(atoms: list, size: int):
    """Index subsets of the given size in lexicographic order, pruned so that
    every relation symbol keeps at least one atom (a homomorphism needs it)."""
    n = len(atoms)
    symbols = [a.relation for a in atoms]
    need = {}
    for i, s in enumerate(symbols):
        need.setdefault(s, []).append(i)
    last = {s: idx[-1] for s, idx in need.items()}
    chosen: list = []
    have: dict = {}

    def rec(i):
        if len(chosen) == size:
            if len(have) == len(need):
                yield tuple(chosen)
            return
        if n - i < size - len(chosen):
            return
        s = symbols[i]
        chosen.append(i)
        have[s] = have.get(s, 0) + 1
        yield from rec(i + 1)
        chosen.pop()
        have[s] -= 1
        if not have[s]:
            del have[s]
        if last[s] == i and s not in have:
            return
        yield from rec(i + 1)

    yield from rec(0)


def _cores(q: Query, maps_into: Callable, cap: Optional[int]) -> tuple:
    atoms = list(q.atoms)
    size = len(_deletion_loop(atoms, maps_into))
    found = []
    truncated = False
    for idx in _subsets_in_lex_order(atoms, size):
        sub = [atoms[i] for i in idx]
        if maps_into(atoms, sub):
            if cap is not None and len(found) >= cap:
                truncated = True
                break
            found.append(q.with_atoms(sub))
            if cap == 1:
                break
    return found, truncated


def _direct(src, dst) -> bool:
    return find_homomorphism(src, dst) is not None


def core(q: Query) -> Query:
    """The canonical core: the lexicographically least core by atom position."""
    return _cores(q, _direct, 1)[0][0]


def enumerate_cores(q: Query, cap: int = 8, meta: Optional[dict] = None) -> list:
    """All cores of q (as atom subsets), in lexicographic order, at most cap."""
    cores, truncated = _cores(q, _direct, cap)
    if meta is not None:
        meta["truncated"] = truncated
        meta["count"] = len(cores)
    return cores


def consistency_maps_into(k: int, cross_check: bool = True) -> Callable:
    """Decide src -> dst by pairwise consistency over the width-k view set of src
    evaluated on dst taken as a database."""
    from .views import build_view_set, enforce_pairwise_consistency, query_as_database, standard_view_extension

    def maps_into(src, dst) -> bool:
        src_q = Query("src", tuple(src), frozenset())
        kk = min(k, len(src_q.atoms))
        vs = build_view_set(src_q, kk)
        ddb = query_as_database(dst)
        if not src_q.symbols() <= set(ddb.relations):
            return False
        lvdb = enforce_pairwise_consistency(standard_view_extension(src_q, ddb, vs))
        answer = not lvdb.is_empty()
        if cross_check:
            direct = _direct(src, dst)
            if direct != answer:
                raise WidthAssumptionViolated(
                    f"pairwise consistency at width {k} says {answer}, homomorphism search says {direct}")
        return answer

    return maps_into


def core_via_consistency(q: Query, k: int, cross_check: Optional[bool] = None) -> Query:
    """Core computed with consistency-based homomorphism tests.

    With cross_check (the default under ``__debug__``) each decision is
    compared with a direct search and a disagreement raises
    WidthAssumptionViolated.
    """
    if cross_check is None:
        cross_check = __debug__
    return _cores(q, consistency_maps_into(k, cross_check), 1)[0][0]


def isomorphic(q1, q2) -> bool:
    a1, a2 = _atoms(q1), _atoms(q2)
    if len(a1) != len(a2):
        return False
    v1 = frozenset().union(*(a.var_set for a in a1))
    v2 = frozenset().union(*(a.var_set for a in a2))
    if len(v1) != len(v2):
        return False
    return find_homomorphism(a1, a2, injective=True) is not None


def hom_equivalent(q1, q2) -> bool:
    return _direct(q1, q2) and _direct(q2, q1)
