"""Query and database text formats.

Query grammar::

    NAME(V1,...,Vn) :- atom1, ..., atomm.

Identifiers starting with an uppercase letter are variables, everything else
(lowercase identifiers, integers, quoted strings) is a constant. ``%`` starts
a comment that runs to the end of the line.
"""
from __future__ import annotations

import csv
import re
from pathlib import Path

from .errors import ArityMismatch, FreeVarNotInBody, ParseError
from .relational import Atom, Const, Database, Query, Var, check_arities

_TOKEN = re.compile(r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<implies>:-)
  | (?P<punct>[(),.])
  | (?P<int>-?\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<str>"(?:[^"\\]|\\.)*"|'(?:[^'\\]|\\.)*')
""", re.VERBOSE)

_BARE = re.compile(r"[a-z][A-Za-z0-9_]*\Z")


def _tokens(text: str):
    pos = 0
    line, col = 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        val = m.group(kind)
        if kind != "ws":
            yield kind, val, line, col
        nl = val.count("\n")
        if nl:
            line += nl
            col = len(val) - val.rfind("\n")
        else:
            col += len(val)
        pos = m.end()
    yield "eof", "", line, col


class _Parser:
    def __init__(self, text: str, facts: bool = False):
        self.toks = list(_tokens(text))
        self.i = 0
        self.facts = facts

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        tok = self.toks[self.i]
        if (kind and tok[0] != kind) or (value and tok[1] != value):
            want = value or kind
            raise ParseError(f"expected {want}, found {tok[1] or 'end of input'!r}", tok[2], tok[3])
        self.i += 1
        return tok

    def term(self):
        kind, val, line, col = self.peek()
        if kind == "int":
            self.i += 1
            return Const(int(val))
        if kind == "str":
            self.i += 1
            return Const(bytes(val[1:-1], "utf-8").decode("unicode_escape"))
        if kind == "ident":
            self.i += 1
            if val[0].isupper() and not self.facts:
                return Var(val)
            return Const(val)
        raise ParseError(f"expected a term, found {val or 'end of input'!r}", line, col)

    def atom(self):
        _, name, _, _ = self.take("ident")
        self.take("punct", "(")
        args = []
        if self.peek()[1] != ")":
            args.append(self.term())
            while self.peek()[1] == ",":
                self.i += 1
                args.append(self.term())
        self.take("punct", ")")
        return Atom(name, tuple(args))


def parse_query(text: str) -> Query:
    p = _Parser(text)
    head = p.atom()
    for t in head.args:
        if not isinstance(t, Var):
            _, _, line, col = p.toks[0]
            raise ParseError(f"head arguments must be variables, found {t}", line, col)
    p.take("implies")
    body = [p.atom()]
    while p.peek()[1] == ",":
        p.i += 1
        body.append(p.atom())
    p.take("punct", ".")
    p.take("eof")
    check_arities(body)
    free = frozenset(t.name for t in head.args)
    body_vars = frozenset().union(*(a.var_set for a in body))
    if not free <= body_vars:
        raise FreeVarNotInBody(f"head variables missing from the body: {sorted(free - body_vars)}")
    return Query(head.relation, tuple(body), free)


def _fmt_const(v) -> str:
    if isinstance(v, int):
        return str(v)
    if _BARE.match(v):
        return v
    return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'


def format_term(t) -> str:
    return t.name if isinstance(t, Var) else _fmt_const(t.value)


def format_atom(a: Atom) -> str:
    return f"{a.relation}({','.join(format_term(t) for t in a.args)})"


def format_query(q: Query, head_order=None) -> str:
    head = head_order or sorted(q.free)
    body = ", ".join(format_atom(a) for a in q.atoms)
    return f"{q.name}({','.join(head)}) :- {body}."


def parse_facts(text: str) -> Database:
    p = _Parser(text, facts=True)
    rels: dict = {}
    arities: dict = {}
    while p.peek()[0] != "eof":
        tok = p.peek()
        a = p.atom()
        p.take("punct", ".")
        if arities.setdefault(a.relation, a.arity) != a.arity:
            raise ArityMismatch(f"relation {a.relation} used with arities {arities[a.relation]} and {a.arity}"
                                f" (line {tok[2]})")
        rels.setdefault(a.relation, set()).add(tuple(t.value for t in a.args))
    return Database(rels, arities)


def _csv_cell(s: str):
    s = s.strip()
    try:
        return int(s)
    except ValueError:
        return s


def parse_csv_dir(path) -> Database:
    rels: dict = {}
    arities: dict = {}
    for f in sorted(Path(path).glob("*.csv")):
        name = f.stem
        rows = set()
        with open(f, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), 1):
                if not row:
                    continue
                if arities.setdefault(name, len(row)) != len(row):
                    raise ArityMismatch(f"{f}: row {lineno} has {len(row)} columns, expected {arities[name]}")
                rows.add(tuple(_csv_cell(c) for c in row))
        rels[name] = rows
    return Database(rels, arities)


def parse_database(path) -> Database:
    path = Path(path)
    if path.is_dir():
        return parse_csv_dir(path)
    return parse_facts(path.read_text())


def format_database(db: Database) -> str:
    from .relational import row_key
    lines = []
    for name in sorted(db.relations):
        for t in sorted(db.relations[name], key=row_key):
            lines.append(f"{name}({','.join(_fmt_const(v) for v in t)}).")
    return "\n".join(lines) + ("\n" if lines else "")


def export_database(db: Database, path, fmt: str = "facts") -> None:
    from .relational import row_key
    path = Path(path)
    if fmt == "facts":
        path.write_text(format_database(db))
        return
    path.mkdir(parents=True, exist_ok=True)
    for name in sorted(db.relations):
        with open(path / f"{name}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            for t in sorted(db.relations[name], key=row_key):
                w.writerow(t)


def load_query(path) -> Query:
    return parse_query(Path(path).read_text())
