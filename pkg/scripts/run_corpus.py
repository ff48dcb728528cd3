"""Run count --mode auto against the oracle over a seeded random corpus.

    python3 scripts/run_corpus.py --seed 1 --n 200 --kmax 3 [--out results.json]
"""
import argparse
import collections
import json
import sys
import time

from sharpcq.config import RunConfig
from sharpcq.corpus import generate
from sharpcq.counting import count
from sharpcq.oracle import brute_force_count


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--kmax", type=int, default=3)
    ap.add_argument("--out", help="write per-instance results as JSON")
    args = ap.parse_args(argv)

    modes = collections.Counter()
    rows, mismatches = [], 0
    t0 = time.perf_counter()
    for inst in generate(args.seed, args.n):
        t = time.perf_counter()
        rep = count(inst.query, inst.db, RunConfig(kmax=args.kmax))
        t_count = time.perf_counter() - t
        t = time.perf_counter()
        oracle = brute_force_count(inst.query, inst.db)
        t_oracle = time.perf_counter() - t
        modes[rep.mode_used] += 1
        if rep.count != oracle:
            mismatches += 1
            print(f"MISMATCH {inst.name}: count={rep.count} oracle={oracle} ({rep.mode_used})", file=sys.stderr)
        rows.append({"name": inst.name, "count": str(rep.count), "oracle": str(oracle), "mode": rep.mode_used,
                     "width": rep.width, "atoms": len(inst.query.atoms), "vars": len(inst.query.vars),
                     "count_ms": round(t_count * 1000, 2), "oracle_ms": round(t_oracle * 1000, 2)})
    total = time.perf_counter() - t0
    summary = {"seed": args.seed, "n": args.n, "kmax": args.kmax, "modes": dict(modes),
               "mismatches": mismatches, "seconds": round(total, 2),
               "widths": dict(collections.Counter(str(r["width"]) for r in rows))}
    print(json.dumps(summary, sort_keys=True, indent=2))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"summary": summary, "instances": rows}, fh, indent=1, sort_keys=True)
    return 1 if mismatches else 0


if __name__ == "__main__":
    sys.exit(main())
