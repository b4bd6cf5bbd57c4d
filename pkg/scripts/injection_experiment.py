"""Injection quality of sparse sign sketches on a random orthonormal Q.

Compares the derived (k, ζ) with the practical k = 2d, ζ = 8 preset.
"""
import argparse

import numpy as np

from psdcompare.apps import sketching
from psdcompare.matcore import random_orthonormal
from psdcompare.rng import stream


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--d", type=int, default=20)
    ap.add_argument("--epsilon", type=float, default=0.5)
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--seeds", type=int, default=200)
    a = ap.parse_args(argv)
    q = random_orthonormal(a.n, a.d, stream(1, 0))
    mu = sketching.coherence(q)
    print(f"coherence {mu:.5f} (floor d/n = {a.d / a.n:.5f})")
    for p in (sketching.sketch_params(a.d, mu, a.epsilon, a.delta), sketching.practical_preset(a.d)):
        lam = sketching.sample_injection_lmin(q, p.k, p.zeta, range(a.seeds))
        model = sketching.injection_model(q, p.k, p.zeta)
        print(f"{p.label:22s} k={p.k:5d} zeta={p.zeta:8.4f} mean lmin={lam.mean():.4f} "
              f"min={lam.min():.4f} fail(<1-eps)={np.mean(lam < 1 - a.epsilon):.3f} "
              f"model lb={model.report.expectation_lb:.4f}")


if __name__ == "__main__":
    main()
