"""Queries and databases used as worked examples throughout the tests."""
from __future__ import annotations

import random

from .decomposition import HypertreeDecomposition
from .io import parse_query
from .relational import Atom, Database, Query, Var, atom

Q0_TEXT = ("Q0(A,B,C) :- mw(A,B,I), wt(B,D), wi(B,E), pt(C,D), st(D,F), st(D,G), "
           "rr(G,H), rr(F,H), rr(D,H).")
Q1_TEXT = "Q1(A,C) :- s1(A,B), s2(B,C), s3(C,D), s4(D,A)."


def q0() -> Query:
    return parse_query(Q0_TEXT)


def q1() -> Query:
    return parse_query(Q1_TEXT)


def q0_hd() -> HypertreeDecomposition:
    """A width-2 decomposition of Q0 that also covers its frontier edges."""
    a = {str(x): x for x in q0().atoms}
    chi = (
        frozenset("ABID"),
        frozenset("BE"),
        frozenset("CD"),
        frozenset("DFH"),
        frozenset("DGH"),
    )
    lam = (
        (a["mw(A,B,I)"], a["wt(B,D)"]),
        (a["wi(B,E)"],),
        (a["pt(C,D)"],),
        (a["st(D,F)"], a["rr(F,H)"]),
        (a["st(D,G)"], a["rr(G,H)"]),
    )
    return HypertreeDecomposition((None, 0, 0, 0, 3), chi, lam)


def q0_views():
    """The view set of the introduction: query views plus views over {B,C,D}
    and {D,F,H}."""
    from .views import view_set_with
    q = q0()
    a = {str(x): x for x in q.atoms}
    extra = [
        ("v_bcd", "BCD", (a["wt(B,D)"], a["pt(C,D)"])),
        ("v_dfh", "DFH", (a["st(D,F)"], a["rr(F,H)"])),
    ]
    return view_set_with(q, extra)


def q1n(n: int) -> Query:
    """r(Xi,Yi) for all i, plus chains over the X's and over the Y's."""
    atoms = [atom("r", f"X{i}", f"Y{i}") for i in range(1, n + 1)]
    atoms += [atom("r", f"X{i}", f"X{i + 1}") for i in range(1, n)]
    atoms += [atom("r", f"Y{i}", f"Y{i + 1}") for i in range(1, n)]
    return Query(f"Q1_{n}", tuple(atoms), frozenset(f"X{i}" for i in range(1, n + 1)))


def q2n(n: int) -> Query:
    """Complete bipartite r(Xi,Yj), Boolean."""
    atoms = [atom("r", f"X{i}", f"Y{j}") for i in range(1, n + 1) for j in range(1, n + 1)]
    return Query(f"Q2_{n}", tuple(atoms), frozenset())


def _bits(i: int, h: int) -> tuple:
    return tuple((i >> (h - 1 - b)) & 1 for b in range(h))


def keyed_query(h: int) -> Query:
    """r(X0,Y1..Yh), s(Y0,Y1..Yh), wi(Xi,Yi): acyclic, every frontier is all X's."""
    Y = [Var(f"Y{i}") for i in range(h + 1)]
    atoms = [Atom("r", (Var("X0"),) + tuple(Y[1:])), Atom("s", tuple(Y))]
    atoms += [atom(f"w{i}", f"X{i}", f"Y{i}") for i in range(1, h + 1)]
    return Query(f"K{h}", tuple(atoms), frozenset(f"X{i}" for i in range(h + 1)))


def keyed_database(h: int) -> Database:
    m = 2 ** h
    rels = {
        "r": {(f"a{i}",) + _bits(i, h) for i in range(m)},
        "s": {(f"n{i}",) + _bits(i, h) for i in range(m)},
    }
    for b in range(1, h + 1):
        rels[f"w{b}"] = {(f"x{j}", _bits(j, h)[b - 1]) for j in range(m)}
    return Database(rels)


def keyed_width1_hd(q: Query) -> HypertreeDecomposition:
    """Root r, child s, and one leaf per wi under the root."""
    r, s, *ws = q.atoms
    chi = [r.var_set, s.var_set] + [w.var_set for w in ws]
    lam = [(r,), (s,)] + [(w,) for w in ws]
    parent = [None, 0] + [0] * len(ws)
    return HypertreeDecomposition(tuple(parent), tuple(chi), tuple(lam))


def keyed_merged_hd(q: Query) -> HypertreeDecomposition:
    """The root and its s-child merged into one width-2 vertex."""
    r, s, *ws = q.atoms
    chi = [r.var_set | s.var_set] + [w.var_set for w in ws]
    lam = [(r, s)] + [(w,) for w in ws]
    parent = [None] + [0] * len(ws)
    return HypertreeDecomposition(tuple(parent), tuple(chi), tuple(lam))


def hybrid_query(h: int) -> Query:
    """The keyed query with r widened by a quantified Z and an extra v(Z,X1)."""
    Y = [Var(f"Y{i}") for i in range(h + 1)]
    atoms = [Atom("rb", (Var("X0"),) + tuple(Y[1:]) + (Var("Z"),)), Atom("s", tuple(Y))]
    atoms += [atom(f"w{i}", f"X{i}", f"Y{i}") for i in range(1, h + 1)]
    atoms.append(atom("v", "Z", "X1"))
    return Query(f"H{h}", tuple(atoms), frozenset(f"X{i}" for i in range(h + 1)))


def hybrid_database(h: int) -> Database:
    m = 2 ** h
    zs = [f"z{j}" for j in range(m)]
    xs = [f"x{j}" for j in range(m)]
    rels = {
        "rb": {(f"a{i}",) + _bits(i, h) + (z,) for i in range(m) for z in zs},
        "s": {(f"n{i}",) + _bits(i, h) for i in range(m)},
        "v": {(z, x) for z in zs for x in xs},
    }
    for b in range(1, h + 1):
        rels[f"w{b}"] = {(xs[j], _bits(j, h)[b - 1]) for j in range(m)}
    return Database(rels)


def random_database(q: Query, rng: random.Random, domain: int = 4, tuples: int = 10) -> Database:
    """Random relations for every symbol of q."""
    arity = {a.relation: a.arity for a in q.atoms}
    rels = {}
    for sym, k in sorted(arity.items()):
        cap = domain ** k
        n = min(tuples, cap)
        rows = set()
        while len(rows) < n:
            rows.add(tuple(rng.randrange(domain) for _ in range(k)))
        rels[sym] = rows
    return Database(rels, arity)


def cycle_database(edges=((1, 2), (2, 3), (3, 4), (4, 1))) -> Database:
    return Database({f"s{i}": set(edges) for i in range(1, 5)})
