"""Classify every catalog entry and print a residual table.

    python3 scripts/catalog_report.py --tol 1e-6 --csv catalog.csv
"""

import argparse
import csv
import sys
import time

from infharm.catalog import catalog_entries
from infharm.inflap import classify

COLUMNS = ["infinity_harmonic", "verticality", "conformality", "homothety"]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tol", type=float, default=1e-6)
    ap.add_argument("--csv")
    args = ap.parse_args()

    rows = []
    print(f"{'entry':28s} {'pts':>6s} " + " ".join(f"{c[:12]:>12s}" for c in COLUMNS) + "  match")
    for e in catalog_entries():
        t0 = time.perf_counter()
        c = classify(e.map, e.source_metric, e.target_metric, e.grid(), tol=args.tol)
        elapsed = time.perf_counter() - t0
        match = c.verdict == e.expected_flags
        res = [c.worst_residuals[k] for k in COLUMNS]
        print(f"{e.id:28s} {c.sample_count:6d} " + " ".join(f"{r:12.2e}" for r in res)
              + f"  {'yes' if match else 'NO'} ({elapsed:.2f}s)")
        rows.append([e.id, c.sample_count, *res, " ".join(sorted(c.verdict)), match])
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["id", "samples", *COLUMNS, "verdict", "matches_expected"])
            w.writerows(rows)
    return 0 if all(r[-1] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
