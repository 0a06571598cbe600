"""Print the slab refinement tables (angle error against the finest mesh).

    python scripts/mesh_table.py [--kind hex|tet|both] [--csv out.csv]
"""

import argparse
import csv
import time

from fibergen.analysis import slab_ladder
from fibergen.ldrbm import AngleSet, GeometryConfig, GeometryKind

CONFIG = GeometryConfig(GeometryKind.SLAB, {"endo": 20, "epi": 10, "base_up": 50, "base_down": 60},
                        AngleSet(alpha_endo=60, alpha_epi=-60, beta_endo=-45, beta_epi=45))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kind", choices=("hex", "tet", "both"), default="both")
    ap.add_argument("--csv", help="also write the rows to this file")
    args = ap.parse_args()

    kinds = ("hex", "tet") if args.kind == "both" else (args.kind,)
    records = []
    for kind in kinds:
        t0 = time.perf_counter()
        rows = slab_ladder(kind, CONFIG)
        print(f"\n{kind} slab ({time.perf_counter() - t0:.1f} s), last row is the reference")
        print(f"{'h [mm]':>8} {'DoFs':>8} {'avg [deg]':>10} {'max [deg]':>10}")
        for r in rows:
            print(f"{r.h:8.3f} {r.dofs:8d} {r.avg_error:10.3g} {r.max_error:10.3g}")
            records.append((kind, r.h, r.dofs, r.avg_error, r.max_error))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["kind", "h_mm", "dofs", "avg_deg", "max_deg"])
            w.writerows(records)


if __name__ == "__main__":
    main()
