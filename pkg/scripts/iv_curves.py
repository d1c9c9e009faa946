"""Write I-V curves for random draws from the diode parameter box.

Each curve goes to ``curve_NN.csv`` with its maximum power point listed in
``index.csv``.

    python3 scripts/iv_curves.py [--count 10] [--points 200] [--seed 0] [--out-dir iv-out]
"""
import argparse
import csv
from pathlib import Path

from pvsubspace.diode import DiodeParams, iv_curve, p_max
from pvsubspace.params import DIODE_SI_2CM2, sample_uniform


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=10)
    ap.add_argument("--points", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", default="iv-out")
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "index.csv", "w", newline="") as fh:
        index = csv.writer(fh)
        index.writerow(["curve", *DIODE_SI_2CM2.names, "v_oc", "v_max", "i_max", "p_max"])
        for k, x in enumerate(sample_uniform(DIODE_SI_2CM2, args.count, args.seed)):
            p = DiodeParams.from_normalized(x)
            with open(out / f"curve_{k:02d}.csv", "w", newline="") as cf:
                w = csv.writer(cf)
                w.writerow(["v_volts", "i_amps"])
                w.writerows((f"{pt.v:.17g}", f"{pt.i:.17g}") for pt in iv_curve(p, points=args.points))
            res = p_max(p)
            index.writerow([k, p.i_sc, p.i_s, p.n, p.r_s, p.r_p, res.v_oc, res.v_max, res.i_max, res.p_max])
            print(f"curve {k:02d}: p_max = {res.p_max * 1e3:.3f} mW at {res.v_max:.4f} V (V_oc {res.v_oc:.4f} V)")


if __name__ == "__main__":
    main()
