"""Spanning failure of Bernoulli subsamples of the C^2 MUB design against the planned size."""
import argparse

import numpy as np

from psdcompare.apps import designs


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--draws", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args(argv)
    base = designs.mub_c2()
    for delta in (0.5, 0.1, 0.01):
        plan = designs.design_sampling_plan(2, delta, 2)
        for frac in (0.05, 0.1, 0.25, 1.0):
            s = frac * plan.s
            sys_ = base.replicate(designs.replication_for(base, s))
            rate = designs.spanning_failure_rate(sys_, s, a.draws, a.seed)
            print(f"delta={delta:<5} s={s:8.3f} ({frac:>4} of plan) failure={rate:.4f}")


if __name__ == "__main__":
    main()
