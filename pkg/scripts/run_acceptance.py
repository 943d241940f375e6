"""Run every acceptance check and print one verdict line per criterion."""

import argparse
import sys

from dlchp.acceptance import CHECKS, AcceptanceConfig


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--only", type=int, nargs="*", help="criterion numbers to run")
    ap.add_argument("--subst-instances", type=int, default=1000)
    ap.add_argument("--statics-instances", type=int, default=500)
    ap.add_argument("--trace-samples", type=int, default=500)
    ap.add_argument("--mutations", type=int, default=50)
    args = ap.parse_args(argv)
    cfg = AcceptanceConfig(subst_instances=args.subst_instances, statics_instances=args.statics_instances,
                           trace_samples=args.trace_samples, mutations=args.mutations, seed=args.seed)
    failed = 0
    for i, check in enumerate(CHECKS, 1):
        if args.only and i not in args.only:
            continue
        v = check(cfg)
        print(f"{v.line()}  ({v.seconds:.1f}s)", flush=True)
        for note in v.notes:
            print("    " + note)
        failed += not v.passed
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
