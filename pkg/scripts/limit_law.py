"""Rearranged p-Laplacian residual against p for catalog maps.

For each map the residual max_x || p_lap / ((p-2) |dphi|^{p-4}) - Delta_inf ||
is printed with the fitted log-log slope against p - 2.

    python3 scripts/limit_law.py --entry aronsson_function --entry radial_projection
"""

import argparse
import csv
import sys

import numpy as np

from infharm.catalog import catalog_get
from infharm.inflap import energy_density, inf_laplacian_map, p_laplacian

DEFAULT_ENTRIES = ["aronsson_function", "product_aronsson", "radial_projection", "circle_metric_projection"]


def residuals(entry, ps):
    pts = entry.grid()
    args = (entry.map, entry.source_metric, entry.target_metric, pts)
    E = energy_density(*args).value
    lap = inf_laplacian_map(*args)
    out = []
    for p in ps:
        scaled = p_laplacian(*args, p) / ((p - 2) * E ** ((p - 4) / 2))[..., None]
        out.append(float(np.max(np.linalg.norm(scaled - lap, axis=-1))))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--entry", action="append", help="catalog id (repeatable)")
    ap.add_argument("--p", type=float, nargs="+", default=[4, 8, 16, 32, 64])
    ap.add_argument("--csv", help="also write entry,p,residual rows here")
    args = ap.parse_args()
    ps = np.array(args.p)
    rows = []
    for eid in args.entry or DEFAULT_ENTRIES:
        res = residuals(catalog_get(eid), ps)
        rows += [(eid, p, r) for p, r in zip(ps, res)]
        if min(res) > 0:
            slope = np.polyfit(np.log(ps - 2), np.log(res), 1)[0]
            note = f"slope {slope:+.4f}"
        else:
            note = "residual vanishes (harmonic map)"
        print(f"{eid:26s} " + " ".join(f"{r:.3e}" for r in res) + f"   {note}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["entry", "p", "residual"])
            w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
