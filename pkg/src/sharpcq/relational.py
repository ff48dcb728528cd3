"""Terms, atoms, queries, databases and relations of substitutions.

Relations are stored column-wise canonical: the schema is the sorted tuple of
variable names and every row is a tuple aligned with it. All values are
immutable so they can be shared freely.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from operator import itemgetter
from typing import Iterable, Mapping, Union

from .errors import ArityMismatch, FreeVarNotInBody, MissingRelation, SharpCQError, UnknownVariable

Value = Union[int, str]


def value_key(v):
    """Total order over mixed constant types (ints before strings)."""
    if isinstance(v, bool):
        return (0, int(v), "")
    if isinstance(v, int):
        return (0, v, "")
    if isinstance(v, str):
        return (1, 0, v)
    return (2, 0, repr(v))


def row_key(row):
    return tuple(value_key(v) for v in row)


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    value: Value

    def __str__(self):
        return str(self.value)

    def __lt__(self, other):
        return value_key(self.value) < value_key(other.value)


Term = Union[Var, Const]


def is_var(t) -> bool:
    return isinstance(t, Var)


@dataclass(frozen=True)
class Atom:
    relation: str
    args: tuple

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))

    @property
    def arity(self) -> int:
        return len(self.args)

    @cached_property
    def variables(self) -> tuple:
        """Distinct variable names in order of first occurrence."""
        seen = []
        for t in self.args:
            if isinstance(t, Var) and t.name not in seen:
                seen.append(t.name)
        return tuple(seen)

    @cached_property
    def var_set(self) -> frozenset:
        return frozenset(self.variables)

    def __str__(self):
        return f"{self.relation}({','.join(str(a) for a in self.args)})"

    def sort_key(self):
        return (self.relation, tuple((0, a.name, ()) if isinstance(a, Var) else (1, "", value_key(a.value))
                                     for a in self.args))


def atom(relation: str, *args) -> Atom:
    """Convenience constructor: uppercase-initial strings become variables."""
    terms = []
    for a in args:
        if isinstance(a, (Var, Const)):
            terms.append(a)
        elif isinstance(a, str) and a[:1].isupper():
            terms.append(Var(a))
        else:
            terms.append(Const(a))
    return Atom(relation, tuple(terms))


def vars_of(atoms: Iterable[Atom]) -> frozenset:
    out = set()
    for a in atoms:
        out |= a.var_set
    return frozenset(out)


def check_arities(atoms: Iterable[Atom], known: Mapping[str, int] | None = None) -> dict:
    arities = dict(known or {})
    for a in atoms:
        if arities.setdefault(a.relation, a.arity) != a.arity:
            raise ArityMismatch(f"relation {a.relation} used with arities {arities[a.relation]} and {a.arity}")
    return arities


@dataclass(frozen=True)
class Query:
    """A conjunctive query. Duplicate atoms are collapsed, first occurrence wins."""

    name: str
    atoms: tuple
    free: frozenset

    def __post_init__(self):
        atoms = tuple(dict.fromkeys(self.atoms))
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "free", frozenset(self.free))
        if not atoms:
            raise SharpCQError("a query needs at least one atom")
        check_arities(atoms)
        missing = self.free - vars_of(atoms)
        if missing:
            raise FreeVarNotInBody(f"free variables not in body: {sorted(missing)}")

    @cached_property
    def vars(self) -> frozenset:
        return vars_of(self.atoms)

    @property
    def quantified(self) -> frozenset:
        return self.vars - self.free

    def with_atoms(self, atoms) -> "Query":
        return replace(self, atoms=tuple(atoms))

    def with_free(self, free) -> "Query":
        return replace(self, free=frozenset(free))

    def symbols(self) -> frozenset:
        return frozenset(a.relation for a in self.atoms)

    def __str__(self):
        from .io import format_query
        return format_query(self)


@dataclass(frozen=True)
class ColoredQuery(Query):
    """A query extended with one fresh unary atom per free variable."""

    color_symbols: frozenset = frozenset()

    def uncolored(self) -> Query:
        kept = [a for a in self.atoms if a.relation not in self.color_symbols]
        return Query(self.name, tuple(kept), self.free)

    def is_color_atom(self, a: Atom) -> bool:
        return a.relation in self.color_symbols


def uncolored(q: Query) -> Query:
    return q.uncolored() if isinstance(q, ColoredQuery) else q


@dataclass(frozen=True)
class Database:
    """Relation symbol -> frozenset of constant tuples."""

    relations: Mapping
    arities: Mapping = field(default_factory=dict)

    def __post_init__(self):
        rels = {}
        arities = dict(self.arities)
        for name, tuples in self.relations.items():
            ts = frozenset(tuple(t) for t in tuples)
            for t in ts:
                if arities.setdefault(name, len(t)) != len(t):
                    raise ArityMismatch(f"relation {name} has tuples of arities {arities[name]} and {len(t)}")
            rels[name] = ts
        object.__setattr__(self, "relations", rels)
        object.__setattr__(self, "arities", arities)

    def __getitem__(self, name):
        try:
            return self.relations[name]
        except KeyError:
            raise MissingRelation(f"relation {name!r} not in database") from None

    def __contains__(self, name):
        return name in self.relations

    def __eq__(self, other):
        if not isinstance(other, Database):
            return NotImplemented
        return self.relations == other.relations

    def __hash__(self):
        return hash(frozenset(self.relations.items()))

    @cached_property
    def domain(self) -> frozenset:
        return frozenset(v for ts in self.relations.values() for t in ts for v in t)

    @property
    def max_tuples(self) -> int:
        return max((len(ts) for ts in self.relations.values()), default=0)

    @property
    def size(self) -> int:
        return sum(len(ts) for ts in self.relations.values())

    def with_relations(self, updates: Mapping, arities: Mapping | None = None) -> "Database":
        rels = dict(self.relations)
        rels.update(updates)
        ar = {k: v for k, v in self.arities.items() if k not in updates}
        ar.update(arities or {})
        return Database(rels, ar)


def _getter(indices):
    """itemgetter that always returns a tuple."""
    indices = tuple(indices)
    if not indices:
        return lambda row: ()
    if len(indices) == 1:
        i = indices[0]
        return lambda row: (row[i],)
    return itemgetter(*indices)


@dataclass(frozen=True)
class Relation:
    """A duplicate-free set of substitutions over a sorted variable schema."""

    schema: tuple
    rows: frozenset

    def __post_init__(self):
        if list(self.schema) != sorted(set(self.schema)):
            raise SharpCQError(f"schema must be sorted and duplicate free: {self.schema}")
        if not isinstance(self.rows, frozenset):
            object.__setattr__(self, "rows", frozenset(self.rows))

    @classmethod
    def make(cls, schema, rows) -> "Relation":
        """Build from rows aligned with an arbitrary variable order."""
        schema = tuple(schema)
        order = sorted(range(len(schema)), key=lambda i: schema[i])
        if order == list(range(len(schema))):
            return cls(schema, frozenset(tuple(r) for r in rows))
        get = _getter(order)
        return cls(tuple(schema[i] for i in order), frozenset(get(tuple(r)) for r in rows))

    @classmethod
    def from_dicts(cls, schema, dicts) -> "Relation":
        schema = tuple(sorted(schema))
        return cls(schema, frozenset(tuple(d[v] for v in schema) for d in dicts))

    @classmethod
    def unit(cls) -> "Relation":
        return cls((), frozenset({()}))

    @classmethod
    def empty(cls, schema=()) -> "Relation":
        return cls(tuple(sorted(schema)), frozenset())

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.sorted_rows())

    @property
    def schema_set(self) -> frozenset:
        return frozenset(self.schema)

    def sorted_rows(self) -> list:
        return sorted(self.rows, key=row_key)

    def substitutions(self) -> list:
        return [dict(zip(self.schema, r)) for r in self.sorted_rows()]

    def index_of(self, variables) -> tuple:
        pos = {v: i for i, v in enumerate(self.schema)}
        try:
            return tuple(pos[v] for v in variables)
        except KeyError as e:
            raise UnknownVariable(f"variable {e.args[0]} not in schema {self.schema}") from None


def project(rel: Relation, W) -> Relation:
    W = tuple(sorted(set(W)))
    if W == rel.schema:
        return rel
    get = _getter(rel.index_of(W))
    return Relation(W, frozenset(map(get, rel.rows)))


def select(rel: Relation, theta: Mapping) -> Relation:
    """Rows agreeing with the partial substitution theta."""
    keys = tuple(sorted(theta))
    get = _getter(rel.index_of(keys))
    target = tuple(theta[k] for k in keys)
    return Relation(rel.schema, frozenset(r for r in rel.rows if get(r) == target))


def natural_join(r1: Relation, r2: Relation) -> Relation:
    s1, s2 = r1.schema_set, r2.schema_set
    shared = tuple(sorted(s1 & s2))
    out_schema = tuple(sorted(s1 | s2))
    if not r1.rows or not r2.rows:
        return Relation(out_schema, frozenset())
    extra = tuple(v for v in r2.schema if v not in s1)
    key1 = _getter(r1.index_of(shared))
    key2 = _getter(r2.index_of(shared))
    ext2 = _getter(r2.index_of(extra))
    combined = r1.schema + extra
    pos = {v: i for i, v in enumerate(combined)}
    perm = _getter(tuple(pos[v] for v in out_schema))
    index: dict = {}
    for row in r2.rows:
        index.setdefault(key2(row), []).append(ext2(row))
    out = set()
    for row in r1.rows:
        for ext in index.get(key1(row), ()):
            out.add(perm(row + ext))
    return Relation(out_schema, frozenset(out))


def semijoin(r1: Relation, r2: Relation) -> Relation:
    shared = tuple(sorted(r1.schema_set & r2.schema_set))
    if not r2.rows:
        return Relation(r1.schema, frozenset())
    if not shared:
        return r1
    key1 = _getter(r1.index_of(shared))
    keys = set(map(_getter(r2.index_of(shared)), r2.rows))
    kept = frozenset(r for r in r1.rows if key1(r) in keys)
    if len(kept) == len(r1.rows):
        return r1
    return Relation(r1.schema, kept)


def atom_relation(a: Atom, db: Database) -> Relation:
    """The substitutions over vars(a) that map a into db."""
    tuples = db[a.relation]
    if db.arities.get(a.relation, a.arity) != a.arity:
        raise ArityMismatch(f"atom {a} has arity {a.arity}, relation has {db.arities[a.relation]}")
    checks_const = [(i, t.value) for i, t in enumerate(a.args) if isinstance(t, Const)]
    first = {}
    checks_eq = []
    for i, t in enumerate(a.args):
        if isinstance(t, Var):
            if t.name in first:
                checks_eq.append((first[t.name], i))
            else:
                first[t.name] = i
    schema = tuple(sorted(first))
    get = _getter(tuple(first[v] for v in schema))
    rows = set()
    for tup in tuples:
        if all(tup[i] == c for i, c in checks_const) and all(tup[i] == tup[j] for i, j in checks_eq):
            rows.add(get(tup))
    return Relation(schema, frozenset(rows))


def join_all(rels, project_to=None) -> Relation:
    """Join relations greedily, smallest connected candidate first.

    With ``project_to`` set, variables outside it are dropped as soon as no
    remaining relation mentions them.
    """
    pending = list(rels)
    if not pending:
        return Relation.unit()
    keep = None if project_to is None else frozenset(project_to)
    pending.sort(key=len)
    current = pending.pop(0)
    while pending:
        if not current.rows:
            break
        connected = [r for r in pending if r.schema_set & current.schema_set]
        nxt = min(connected or pending, key=len)
        pending.remove(nxt)
        current = natural_join(current, nxt)
        if keep is not None:
            needed = keep.union(*(r.schema_set for r in pending))
            if not current.schema_set <= needed:
                current = project(current, current.schema_set & needed)
    if keep is not None:
        schema = frozenset().union(*(r.schema_set for r in rels)) & keep
        if not current.rows:
            return Relation.empty(schema)
        current = project(current, schema)
    elif not current.rows:
        return Relation.empty(frozenset().union(*(r.schema_set for r in rels)))
    return current


def evaluate_atoms(atoms, db: Database, project_to=None) -> Relation:
    """All substitutions over vars(atoms) satisfying every atom in db."""
    return join_all([atom_relation(a, db) for a in atoms], project_to)
