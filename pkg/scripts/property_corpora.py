"""Run the substitution and statics corpora at a chosen size and print their counters."""

import argparse
import time

from dlchp.properties import StaticsConfig, SubstConfig, statics_oracle_corpus, usubst_corpus


def report(title, rep, seconds):
    print(f"== {title}: {rep.instances} instances in {seconds:.1f}s")
    for k, v in sorted(rep.counts.items()):
        print(f"  {k:32} {v}")
    for kind, seed, detail in rep.violations:
        print(f"  VIOLATION {kind} (seed {seed}): {detail}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--subst", type=int, default=1000, help="substitution instances")
    ap.add_argument("--statics", type=int, default=500, help="statics instances")
    ap.add_argument("--depth", type=int, default=5, help="program depth for substitution inputs")
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    t = time.perf_counter()
    r1 = usubst_corpus(SubstConfig(a.subst, a.seed, a.depth))
    report("substitution", r1, time.perf_counter() - t)
    t = time.perf_counter()
    r2 = statics_oracle_corpus(StaticsConfig(a.statics, a.seed))
    report("statics vs oracle", r2, time.perf_counter() - t)
    raise SystemExit(0 if r1.ok and r2.ok else 1)


if __name__ == "__main__":
    main()
