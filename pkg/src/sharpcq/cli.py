"""Command line interface: ``sharpcq <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time

from . import __version__
from .config import RunConfig
from .errors import (ArityMismatch, FreeVarNotInBody, InvalidSelection, InvalidWidth, MissingRelation,
                     NoDecompositionWithinBudget, ParseError, SearchBudgetExceeded, SharpCQError,
                     StateCapExceeded)
from .io import format_query, load_query, parse_database

USAGE_ERRORS = (ParseError, ArityMismatch, FreeVarNotInBody, MissingRelation, InvalidWidth, InvalidSelection,
                OSError, ValueError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def _cfg(args, **extra) -> RunConfig:
    fields = {}
    for name in ("kmax", "bmax", "cores_to_try", "mode", "state_cap", "json", "paranoid", "timings"):
        if getattr(args, name, None) is not None:
            fields[name] = getattr(args, name)
    fields.update(extra)
    return RunConfig(**fields)


def cmd_count(args) -> int:
    from .counting import count
    q = load_query(args.query)
    db = parse_database(args.db)
    cfg = _cfg(args)
    report = count(q, db, cfg)
    if args.json:
        _emit(report.to_json(cfg.timings))
    else:
        print(report.count)
    return 0


def cmd_oracle(args) -> int:
    from .counting import CountReport
    from .oracle import brute_force_count
    q = load_query(args.query)
    db = parse_database(args.db)
    t0 = time.perf_counter()
    n = brute_force_count(q, db, args.state_cap)
    report = CountReport(n, "oracle", elapsed_ms=(time.perf_counter() - t0) * 1000)
    if args.json:
        _emit(report.to_json(args.timings))
    else:
        print(n)
    return 0


def cmd_decompose(args) -> int:
    from .decomposition import ghd, sharp_hypertree_width
    from .relational import uncolored
    q = load_query(args.query)
    if args.width is None and args.kmax is None:
        raise InvalidWidth("give --width or --kmax")
    widths = range(1, args.kmax + 1) if args.kmax is not None else [args.width]
    hd, k, core_atoms = None, None, None
    for w in widths:
        if args.sharp:
            res = sharp_hypertree_width(q, w)
            if res is not None and (args.kmax is not None or res.k <= w):
                hd, k, core_atoms = res.hd, res.k, [str(a) for a in uncolored(res.core).atoms]
                break
        else:
            hd = ghd(q, w)
            if hd is not None:
                k = w
                break
    if hd is None:
        raise NoDecompositionWithinBudget(f"no decomposition within width {max(widths)}")
    if args.json:
        _emit({"width": k, "sharp": bool(args.sharp), "core_atoms": core_atoms, "decomposition": hd.to_json()})
    elif args.dot:
        print(hd.to_dot())
    else:
        print(f"% width {k}")
        print(hd.to_text())
    return 0


def cmd_core(args) -> int:
    from .homomorphism import color, core
    q = load_query(args.query)
    c = core(color(q))
    out = c if args.colored else c.uncolored()
    print(format_query(out))
    return 0


def cmd_frontier(args) -> int:
    from .homomorphism import color, core
    from .hypergraph import frontier_hypergraph
    q = load_query(args.query)
    W = q.free if args.free is None else frozenset(v for v in args.free.split(",") if v)
    target = core(color(q)) if args.core else q
    fh = frontier_hypergraph(target, W)
    if args.format == "dot":
        print(fh.to_dot("FH"))
    else:
        _emit(fh.to_json())
    return 0


def cmd_hybrid(args) -> int:
    from .hybrid import count_hybrid, search_sharp_b
    q = load_query(args.query)
    db = parse_database(args.db)
    found = search_sharp_b(q, db, args.width, args.bmax, max_promoted=args.max_promoted)
    if found is None:
        raise NoDecompositionWithinBudget(f"no #_b decomposition of width {args.width} with b <= {args.bmax}")
    n = count_hybrid(q, db, found.hd, found.pseudo_free, colored_core=found.core)
    if args.json:
        _emit({"k": found.k, "b": found.b, "pseudo_free": sorted(found.pseudo_free),
               "decomposition": found.hd.to_json(), "count": str(n)})
    else:
        print(f"% k={found.k} b={found.b} pseudo_free={{{','.join(sorted(found.pseudo_free))}}}")
        print(found.hd.to_text())
        print(n)
    return 0


def cmd_degree(args) -> int:
    from .decomposition import d_optimal_nf
    from .hybrid import bound
    q = load_query(args.query)
    db = parse_database(args.db)
    F = q.free if args.free is None else frozenset(v for v in args.free.split(",") if v)
    hd = d_optimal_nf(q, db, args.width, free=F)
    if hd is None:
        raise NoDecompositionWithinBudget(f"no decomposition of width {args.width}")
    prof = bound(hd, db, F)
    if args.json:
        _emit({"F": sorted(F), "overall": prof.overall, "per_vertex": list(prof.per_vertex),
               "decomposition": hd.to_json()})
    else:
        print(hd.to_text())
        print(f"degree per vertex: {list(prof.per_vertex)}")
        print(f"bound: {prof.overall}")
    return 0


def cmd_gen_corpus(args) -> int:
    from .corpus import generate, write_corpus
    insts = generate(args.seed, args.n)
    out = write_corpus(insts, args.out)
    if args.json:
        _emit({"seed": args.seed, "n": args.n, "out": str(out)})
    else:
        print(f"wrote {len(insts)} instances to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sharpcq", description="Count answers of conjunctive queries.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--paranoid", action="store_true", help="always cross-check consistency-based decisions")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_io(sp, db=True):
        sp.add_argument("--query", required=True)
        if db:
            sp.add_argument("--db", required=True, help="facts file or directory of CSV files")
        sp.add_argument("--json", action="store_true")

    sp = sub.add_parser("count", help="count answers")
    add_io(sp)
    sp.add_argument("--mode", choices=["auto", "structural", "hybrid", "oracle"], default="auto")
    sp.add_argument("--kmax", type=int, default=3)
    sp.add_argument("--bmax", type=int, default=16)
    sp.add_argument("--cores-to-try", dest="cores_to_try", type=int, default=8)
    sp.add_argument("--state-cap", dest="state_cap", type=int, default=10 ** 8)
    sp.add_argument("--timings", action="store_true", help="include measured elapsed_ms in JSON")
    sp.set_defaults(func=cmd_count)

    sp = sub.add_parser("oracle-count", help="count answers by brute force")
    add_io(sp)
    sp.add_argument("--state-cap", dest="state_cap", type=int, default=10 ** 8)
    sp.add_argument("--timings", action="store_true")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("decompose", help="print a (#-)hypertree decomposition")
    add_io(sp, db=False)
    sp.add_argument("--width", type=int)
    sp.add_argument("--kmax", type=int)
    sp.add_argument("--sharp", action="store_true")
    sp.add_argument("--dot", action="store_true")
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("core", help="print the core of the colored query")
    sp.add_argument("--query", required=True)
    sp.add_argument("--colored", action="store_true", help="keep the color atoms")
    sp.set_defaults(func=cmd_core)

    sp = sub.add_parser("frontier", help="print a frontier hypergraph")
    sp.add_argument("--query", required=True)
    sp.add_argument("--free", help="comma separated variables (default: head variables)")
    sp.add_argument("--core", action="store_true", help="use the core of the colored query")
    sp.add_argument("--format", choices=["json", "dot"], default="json")
    sp.set_defaults(func=cmd_frontier)

    sp = sub.add_parser("hybrid", help="search a #_b decomposition and count with it")
    add_io(sp)
    sp.add_argument("--width", type=int, required=True)
    sp.add_argument("--bmax", type=int, default=16)
    sp.add_argument("--max-promoted", dest="max_promoted", type=int, default=12)
    sp.set_defaults(func=cmd_hybrid)

    sp = sub.add_parser("degree", help="degree profile of a D-optimal normal-form decomposition")
    add_io(sp)
    sp.add_argument("--width", type=int, required=True)
    sp.add_argument("--free", help="comma separated reference variables (default: head variables)")
    sp.set_defaults(func=cmd_degree)

    sp = sub.add_parser("gen-corpus", help="write a seeded random corpus")
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--n", type=int, default=200)
    sp.add_argument("--out", required=True)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_gen_corpus)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:  # --help, --version and usage errors
        return e.code if isinstance(e.code, int) else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except NoDecompositionWithinBudget as e:
        print(f"sharpcq: {e}", file=sys.stderr)
        return 2
    except (StateCapExceeded, SearchBudgetExceeded) as e:
        print(f"sharpcq: {e}", file=sys.stderr)
        return 3
    except USAGE_ERRORS as e:
        print(f"sharpcq: {e}", file=sys.stderr)
        return 1
    except SharpCQError as e:
        print(f"sharpcq: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
