"""How the eigenvalue gaps and the first eigenvector settle as M grows.

One gradient set of the largest size is drawn; smaller M use its leading
rows, which is what a counter-based stream gives anyway.

    python3 scripts/sample_size_sweep.py [--sizes 50,100,250,500,1000] [--seed 0]
"""
import argparse

import numpy as np

from pvsubspace import DIODE_SI_2CM2, DiodePmaxModel, build_sample_set, estimate_c_matrix


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="50,100,250,500,1000")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    sizes = sorted(int(s) for s in args.sizes.split(","))

    samples = build_sample_set(DiodePmaxModel(), DIODE_SI_2CM2, sizes[-1], seed=args.seed)
    reference = estimate_c_matrix(samples.grads).eigenvectors[:, 0]
    print(f"{'M':>6} {'l1/l2':>8} {'l2/l3':>8} {'|w1 - w1(Mmax)|':>16}  w1")
    for m in sizes:
        est = estimate_c_matrix(samples.grads[:m])
        lam, w1 = est.eigenvalues, est.eigenvectors[:, 0]
        print(f"{m:6d} {lam[0] / lam[1]:8.2f} {lam[1] / lam[2]:8.2f} {np.linalg.norm(w1 - reference):16.4f}  "
              + " ".join(f"{v:+.3f}" for v in w1))


if __name__ == "__main__":
    main()
