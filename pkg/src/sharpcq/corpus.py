"""Seeded random query/database instances for oracle comparisons."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .io import export_database, format_query, parse_database, parse_query
from .relational import Atom, Const, Database, Query, Var


@dataclass(frozen=True)
class CorpusSpec:
    max_atoms: int = 8
    max_vars: int = 10
    max_arity: int = 3
    max_domain: int = 6
    min_tuples: int = 30
    max_tuples: int = 60
    free_prob: float = 0.4
    const_prob: float = 0.05


@dataclass(frozen=True)
class Instance:
    name: str
    query: Query
    db: Database


def random_instance(rng: random.Random, name: str, spec: CorpusSpec = CorpusSpec()) -> Instance:
    domain = rng.randint(4, spec.max_domain)
    n_atoms = rng.randint(2, spec.max_atoms)
    n_vars = rng.randint(2, spec.max_vars)
    # a small symbol pool, reused across atoms, so that cores are often proper
    n_syms = rng.randint(1, min(4, n_atoms))
    arities = {}
    for i in range(n_syms):
        arities[f"r{i}"] = rng.choice([2, 3, 3]) if spec.max_arity >= 3 else rng.randint(1, spec.max_arity)
    pool = [f"V{i}" for i in range(n_vars)]
    atoms = []
    used: list = []
    for _ in range(n_atoms):
        sym = rng.choice(sorted(arities))
        args = []
        for _ in range(arities[sym]):
            if rng.random() < spec.const_prob:
                args.append(Const(rng.randrange(domain)))
                continue
            # lean towards variables already in use so the query stays connected
            if used and rng.random() < 0.5:
                v = rng.choice(used)
            else:
                v = rng.choice(pool)
            if v not in used:
                used.append(v)
            args.append(Var(v))
        atoms.append(Atom(sym, tuple(args)))
    qvars = sorted({t.name for a in atoms for t in a.args if isinstance(t, Var)})
    free = frozenset(v for v in qvars if rng.random() < spec.free_prob)
    q = Query(name, tuple(atoms), free)
    rels = {}
    for sym in sorted({a.relation for a in q.atoms}):
        k = arities[sym]
        n = min(rng.randint(spec.min_tuples, spec.max_tuples), domain ** k)
        rows = set()
        while len(rows) < n:
            rows.add(tuple(rng.randrange(domain) for _ in range(k)))
        rels[sym] = rows
    return Instance(name, q, Database(rels, {s: arities[s] for s in rels}))


def generate(seed: int, n: int, spec: CorpusSpec = CorpusSpec()) -> list:
    rng = random.Random(seed)
    return [random_instance(rng, f"c{seed}_{i:04d}", spec) for i in range(n)]


def write_corpus(instances, out) -> Path:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = []
    for inst in instances:
        qf = out / f"{inst.name}.cq"
        dbf = out / f"{inst.name}.facts"
        qf.write_text(format_query(inst.query) + "\n")
        export_database(inst.db, dbf)
        manifest.append({"name": inst.name, "query": qf.name, "db": dbf.name})
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return out


def read_corpus(path) -> list:
    path = Path(path)
    entries = json.loads((path / "manifest.json").read_text())
    return [Instance(e["name"], parse_query((path / e["query"]).read_text()), parse_database(path / e["db"]))
            for e in entries]
