"""Exhaustive reference checks used only by the tests (desk-scale inputs)."""
from itertools import combinations, permutations, product

from sharpcq.homomorphism import find_homomorphism
from sharpcq.hypergraph import Hypergraph


def _trees(n):
    """All labelled trees on n vertices as parent lists (via Pruefer sequences)."""
    if n == 1:
        yield [None]
        return
    if n == 2:
        yield [None, 0]
        return
    for seq in product(range(n), repeat=n - 2):
        degree = [1] * n
        for x in seq:
            degree[x] += 1
        edges = []
        seq = list(seq)
        for x in seq:
            leaf = min(i for i in range(n) if degree[i] == 1)
            edges.append((leaf, x))
            degree[leaf] -= 1
            degree[x] -= 1
        u, v = [i for i in range(n) if degree[i] == 1]
        edges.append((u, v))
        adj = {i: [] for i in range(n)}
        for a, b in edges:
            adj[a].append(b)
            adj[b].append(a)
        parent = [None] * n
        seen, stack = {0}, [0]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    parent[y] = x
                    stack.append(y)
        yield parent


def connected_tree(vertices, parent) -> bool:
    nodes = set().union(*vertices) if vertices else set()
    for X in nodes:
        holding = {i for i, e in enumerate(vertices) if X in e}
        roots = [i for i in holding if parent[i] is None or parent[i] not in holding]
        if len(roots) != 1:
            return False
    return True


def acyclic_by_trees(h: Hypergraph) -> bool:
    """alpha-acyclic iff some tree over the edges is a join tree."""
    edges = h.sorted_edges()
    if not edges:
        return True
    return any(connected_tree(edges, p) for p in _trees(len(edges)))


def gyo_any_order(h: Hypergraph) -> bool:
    """Try every order of ear removals; True if some order empties the hypergraph."""
    edges = h.sorted_edges()
    for order in permutations(range(len(edges))):
        alive = set(range(len(edges)))
        ok = True
        for i in order[:-1]:
            others = alive - {i}
            shared = edges[i] & set().union(*(edges[j] for j in others))
            if not any(shared <= edges[j] for j in others):
                ok = False
                break
            alive.discard(i)
        if ok:
            return True
    return not edges


def sandwich_exists(h1: Hypergraph, h2: Hypergraph) -> bool:
    """An acyclic H with h1 <= H <= h2 exists iff some elimination order of the
    primal graph of h1 only creates bags that fit inside an edge of h2."""
    from functools import lru_cache
    nodes = sorted(set().union(*h1.edges)) if h1.edges else []
    adj = {v: set() for v in nodes}
    for e in h1.edges:
        for v in e:
            adj[v] |= set(e) - {v}
    big = [frozenset(e) for e in h2.edges]

    def bag(v, gone):
        seen, stack, out = {v}, [v], {v}
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y in seen:
                    continue
                seen.add(y)
                if y in gone:
                    stack.append(y)
                else:
                    out.add(y)
        return frozenset(out)

    @lru_cache(maxsize=None)
    def ok(gone):
        if len(gone) == len(nodes):
            return True
        for v in nodes:
            if v not in gone and any(bag(v, gone) <= e for e in big) and ok(gone | {v}):
                return True
        return False

    return ok(frozenset())


def substructure_cores(q):
    """All minimum-size atom subsets that are homomorphic images of q."""
    atoms = list(q.atoms)
    for r in range(1, len(atoms) + 1):
        found = []
        for sub in combinations(atoms, r):
            if find_homomorphism(atoms, list(sub)) is not None:
                found.append(sub)
        if found:
            return found
    return []
