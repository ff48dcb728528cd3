"""Runtime of structural counting against the oracle on the 4-cycle query Q1
as the database grows.

    python3 scripts/scaling.py --sizes 100 1000 10000 100000
"""
import argparse
import math
import random
import statistics
import sys
import time

from sharpcq.config import RunConfig
from sharpcq.counting import count
from sharpcq.errors import StateCapExceeded
from sharpcq.fixtures import q1
from sharpcq.oracle import brute_force_count
from sharpcq.relational import Database


def cycle_instance(n_tuples: int, seed: int, degree: int = 2) -> Database:
    """Four random binary relations of n/4 tuples each, average out-degree ``degree``."""
    rng = random.Random(seed)
    per = n_tuples // 4
    dom = max(4, per // degree)
    rels = {}
    for i in range(1, 5):
        rows = set()
        while len(rows) < per:
            rows.add((rng.randrange(dom), rng.randrange(dom)))
        rels[f"s{i}"] = rows
    return Database(rels)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 1000, 10000])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--oracle-cap", type=int, default=200_000, help="oracle state cap per size")
    args = ap.parse_args(argv)

    q = q1()
    print(f"{'tuples':>8} {'count':>8} {'count_ms':>10} {'oracle_ms':>10}")
    xs, ys = [], []
    for size in args.sizes:
        db = cycle_instance(size, size)
        runs = []
        for _ in range(args.repeats):
            t = time.perf_counter()
            rep = count(q, db, RunConfig(mode="structural"))
            runs.append(time.perf_counter() - t)
        t_count = statistics.median(runs)
        t = time.perf_counter()
        try:
            o = brute_force_count(q, db, state_cap=args.oracle_cap)
            oracle = f"{(time.perf_counter() - t) * 1000:10.1f}"
            assert o == rep.count, (o, rep.count)
        except StateCapExceeded:
            oracle = f"{'cap':>10}"
        print(f"{size:>8} {rep.count:>8} {t_count * 1000:10.1f} {oracle}")
        xs.append(math.log10(size))
        ys.append(math.log10(t_count))
    if len(xs) > 1:
        mx, my = statistics.mean(xs), statistics.mean(ys)
        slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sum((x - mx) ** 2 for x in xs)
        print(f"log-log slope of count runtime: {slope:.2f}")


if __name__ == "__main__":
    sys.exit(main())
