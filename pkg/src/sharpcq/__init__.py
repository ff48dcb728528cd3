"""Counting answers of conjunctive queries via #-hypertree decompositions."""
from .relational import (Atom, ColoredQuery, Const, Database, Query, Relation, Var, atom,
                         evaluate_atoms, natural_join, project, select, semijoin)
from .io import format_query, parse_database, parse_query

__version__ = "0.1.0"

__all__ = [
    "Atom", "ColoredQuery", "Const", "Database", "Query", "Relation", "Var", "atom",
    "evaluate_atoms", "natural_join", "project", "select", "semijoin",
    "format_query", "parse_database", "parse_query",
]
