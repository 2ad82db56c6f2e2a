"""
Script to regenerate the coefficient, spectral and accuracy tables in one go
Run this after installing requirements; results land in OUTPUT_DIR/tables
"""
import argparse
import os
import sys

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config import Config
from services import SchemeId, coefficient_dump, oa_mixed, oa_straight, scheme_report
from services.errors import SchemeError
from services.output import write_csv, write_json

STRAIGHT_SCHEMES = ("me4-base", "me4-opti", "me6-base", "me6-opti", "visbal-e4", "visbal-e6", "nishikawa")
MIXED_SCHEMES = ("me4-base", "me4-opti", "me6-base", "me6-opti")
GRIDS = (20, 40, 80, 160, 320)
SIXTH_ORDER_GRIDS = (20, 40, 80, 160)


def reproduce(out_dir: str) -> int:
    failures = 0

    print("Coefficient tables...")
    for name in ("me4-opti", "me6-opti"):
        scheme = SchemeId.parse(name)
        write_json(os.path.join(out_dir, f"coeffs-{scheme.slug}.json"), coefficient_dump(scheme))
        print(f"  ✓ {scheme.name}")

    print("Spectral metrics...")
    metrics = []
    for name in STRAIGHT_SCHEMES:
        report = scheme_report(name)
        metrics.append(report.as_dict())
        print(f"  ✓ {report.curve.scheme.name}: e_v={report.resolving_efficiency:.4f}")
    for name in MIXED_SCHEMES:
        report = scheme_report(SchemeId.parse(name, "mixed"), "mixed")
        metrics.append(report.as_dict())
        print(f"  ✓ {report.curve.scheme.name} mixed: e_v={report.resolving_efficiency:.4f}")
    write_json(os.path.join(out_dir, "spectral-metrics.json"), metrics)

    print("Order-of-accuracy tables...")
    for name in STRAIGHT_SCHEMES:
        grids = SIXTH_ORDER_GRIDS if name.startswith("me6") else GRIDS
        try:
            study = oa_straight(name, grids)
        except SchemeError as e:
            print(f"  ✗ {name}: {e}")
            failures += 1
            continue
        write_csv(os.path.join(out_dir, f"oa-{name}-straight.csv"), ("N", "L1", "order"), study.rows())
        print(f"  ✓ {study.scheme} straight: {study.errors[-1]:.4e}")
    for name in MIXED_SCHEMES:
        for penalty in (True, False):
            study = oa_mixed(name, GRIDS[:3], filter_penalty=penalty)
            suffix = "" if penalty else "-nofilter"
            write_csv(os.path.join(out_dir, f"oa-{name}-mixed{suffix}.csv"), ("N", "L1", "order"), study.rows())
            print(f"  ✓ {study.scheme} mixed: {study.errors[-1]:.4e}")
    return failures


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=os.path.join(Config.OUTPUT_DIR, "tables"))
    args = parser.parse_args()
    failed = reproduce(args.out)
    if failed:
        print(f"⚠ {failed} table(s) could not be produced")
    else:
        print("✓ All tables written to", args.out)
    sys.exit(1 if failed else 0)
