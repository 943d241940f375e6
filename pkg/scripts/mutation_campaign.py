"""Mutate each bundled proof script and tally how the kernel reacts."""

import argparse
from collections import Counter
from dataclasses import dataclass

from dlchp.kernel import DERIVED, bundled_script_text, bundled_scripts, library_before
from dlchp.mutation import mutation_campaign


@dataclass
class CampaignConfig:
    mutations: int = 50
    seed: int = 0
    verbose: bool = False


def run(cfg: CampaignConfig) -> int:
    silent = 0
    for name in bundled_scripts():
        lib = library_before(name) if name in DERIVED else None
        out = mutation_campaign(bundled_script_text(name), cfg.mutations, cfg.seed, lib)
        tally = Counter(o.verdict for o in out)
        ops = Counter(o.mutation.operator for o in out)
        print(f"{name:16} {dict(tally)}  operators {dict(ops)}")
        for o in out:
            if cfg.verbose or o.verdict == "silent":
                m = o.mutation
                print(f"  line {m.line} {m.operator}: {o.verdict} ({o.detail})")
        silent += tally["silent"]
    return silent


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", "--mutations", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("-v", "--verbose", action="store_true")
    a = ap.parse_args()
    raise SystemExit(1 if run(CampaignConfig(a.mutations, a.seed, a.verbose)) else 0)
