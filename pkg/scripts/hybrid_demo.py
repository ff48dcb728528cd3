"""Degree-bounded counting on the keyed family: pure structure needs the
quantified Y's in one bag, promoting them as pseudo-free keeps degree 1.

    python3 scripts/hybrid_demo.py --h 2 3 4
"""
import argparse
import sys
import time

from sharpcq.decomposition import d_optimal_nf
from sharpcq.fixtures import (hybrid_database, hybrid_query, keyed_database, keyed_merged_hd, keyed_query,
                              keyed_width1_hd)
from sharpcq.hybrid import bound, count_hybrid, search_sharp_b
from sharpcq.oracle import brute_force_count


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=int, nargs="+", default=[2, 3])
    ap.add_argument("--no-oracle", action="store_true", help="skip the brute-force check (slow from h=4 on)")
    args = ap.parse_args(argv)

    for h in args.h:
        m = 2 ** h
        kq, kdb = keyed_query(h), keyed_database(h)
        print(f"h={h} m={m}")
        print(f"  keyed: bound width-1 hd {bound(keyed_width1_hd(kq), kdb, kq.free).overall}, "
              f"merged hd {bound(keyed_merged_hd(kq), kdb, kq.free).overall}")
        for k in (1, 2):
            hd = d_optimal_nf(kq, kdb, k)
            print(f"  keyed: D-optimal k={k}: bound {bound(hd, kdb, kq.free).overall}, vertices {len(hd.parent)}")
        q, db = hybrid_query(h), hybrid_database(h)
        t = time.perf_counter()
        found = search_sharp_b(q, db, 2, 16)
        n = count_hybrid(q, db, found.hd, found.pseudo_free, colored_core=found.core)
        elapsed = (time.perf_counter() - t) * 1000
        print(f"  hybrid: b={found.b} pseudo-free={sorted(found.pseudo_free)} count={n} ({elapsed:.0f} ms)")
        if not args.no_oracle:
            print(f"  oracle: {brute_force_count(q, db)}")


if __name__ == "__main__":
    sys.exit(main())
