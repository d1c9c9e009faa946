"""Run the full single-diode study and print the headline numbers.

    python3 scripts/diode_study.py [--out-dir DIR] [--seed S] [--M M]
"""
import argparse
import json
from pathlib import Path

import numpy as np

from pvsubspace.study import StudyConfig, run_study


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="study-out")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--M", type=int, default=1000)
    args = ap.parse_args()

    cfg = StudyConfig.from_dict({"M": args.M, "seed": args.seed, "output_dir": args.out_dir, "gnuplot": True})
    run_study(cfg)
    out = Path(args.out_dir)
    sub = json.loads((out / "subspace.json").read_text())
    sob = json.loads((out / "sobol.json").read_text())
    names = sub["parameters"]
    lam = np.array(sub["eigenvalues"])

    print("eigenvalues      " + "  ".join(f"{v:.3e}" for v in lam))
    print("ratios           " + "  ".join(f"{r:.2f}" for r in lam[:-1] / lam[1:]))
    print(f"{'':16} " + "".join(f"{n:>9}" for n in names))
    print(f"{'w1':16} " + "".join(f"{v:9.3f}" for v in sub["eigenvectors"][0]))
    print(f"{'first-order':16} " + "".join(f"{sob['first_order'][n]:9.3f}" for n in names))
    print(f"{'total':16} " + "".join(f"{sob['total'][n]:9.3f}" for n in names))
    err = sub["subspace_error"]
    print(f"subspace error (n={err['n']}): mean {err['mean']:.4f}, "
          f"{sub['level']:.0%} interval [{err['lo']:.4f}, {err['hi']:.4f}]")
    print(f"artifacts in {out}/ (gnuplot {out / 'plots.gp'})")


if __name__ == "__main__":
    main()
