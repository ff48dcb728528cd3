"""Brute-force reference counting. Deliberately simple.

Variables are assigned one at a time, free variables first. Once every free
variable is set, the search only asks whether some extension to the
quantified variables exists, and records the free tuple if so.
"""
from __future__ import annotations

from .errors import StateCapExceeded
from .relational import Const, Database, Query, Relation


def _variable_order(q: Query) -> list:
    order: list = []
    for group in (sorted(q.free), sorted(q.quantified)):
        rest = list(group)
        while rest:
            # prefer the variable sharing most atoms with those already placed
            def links(v):
                return sum(1 for a in q.atoms if v in a.var_set and a.var_set & set(order))
            best = max(rest, key=lambda v: (links(v), -rest.index(v)))
            rest.remove(best)
            order.append(best)
    return order


def _solutions(q: Query, db: Database, state_cap: int):
    order = _variable_order(q)
    pos = {v: i for i, v in enumerate(order)}
    nfree = len(q.free)
    tuples = {a: list(db[a.relation]) for a in q.atoms}
    # an atom is checked as soon as its last variable is assigned
    finishing = [[] for _ in order]
    for a in q.atoms:
        if a.var_set:
            finishing[max(pos[v] for v in a.var_set)].append(a)
    # candidate values of a variable come from one atom that contains it
    source = []
    for v in order:
        holders = [a for a in q.atoms if v in a.var_set]
        source.append(max(holders, key=lambda a: len([u for u in a.var_set if pos[u] < pos[v]])))
    assignment: dict = {}
    visited = 0

    def ground(a):
        return tuple(t.value if isinstance(t, Const) else assignment[t.name] for t in a.args)

    for a in q.atoms:
        if not a.var_set and ground(a) not in db[a.relation]:
            return sorted(q.free), set()

    def candidates(i):
        v = order[i]
        a = source[i]
        vals = set()
        for t in tuples[a]:
            local = {}
            ok = True
            for term, val in zip(a.args, t):
                if isinstance(term, Const):
                    ok = term.value == val
                elif term.name in assignment:
                    ok = assignment[term.name] == val
                elif term.name in local:
                    ok = local[term.name] == val
                else:
                    local[term.name] = val
                if not ok:
                    break
            if ok:
                vals.add(local[v])
        return vals

    def tick():
        nonlocal visited
        visited += 1
        if visited > state_cap:
            raise StateCapExceeded(f"more than {state_cap} partial assignments")

    def consistent(i):
        return all(ground(a) in db[a.relation] for a in finishing[i])

    def exists(i):
        tick()
        if i == len(order):
            return True
        v = order[i]
        for val in candidates(i):
            assignment[v] = val
            if consistent(i) and exists(i + 1):
                del assignment[v]
                return True
            del assignment[v]
        return False

    answers = set()
    free = order[:nfree]

    def enum(i):
        tick()
        if i == nfree:
            if exists(i):
                answers.add(tuple(assignment[v] for v in free))
            return
        v = order[i]
        for val in candidates(i):
            assignment[v] = val
            if consistent(i):
                enum(i + 1)
            del assignment[v]

    enum(0)
    return free, answers


def enumerate_answers(q: Query, db: Database, state_cap: int = 10 ** 8) -> Relation:
    free, answers = _solutions(q, db, state_cap)
    return Relation.make(free, answers)


def brute_force_count(q: Query, db: Database, state_cap: int = 10 ** 8) -> int:
    return len(_solutions(q, db, state_cap)[1])


def full_solutions(q: Query, db: Database, state_cap: int = 10 ** 8) -> Relation:
    return enumerate_answers(q.with_free(q.vars), db, state_cap)
