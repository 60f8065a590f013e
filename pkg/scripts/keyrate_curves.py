"""Key rate against the number of signals, one curve per noise level.

Writes long-format CSV (theta, x, Q, N, test_fraction, rate, asymptote) that
any plotting tool can read.  By default the test fraction is optimized per
point; pass --test-frac to hold it fixed instead.

    python scripts/keyrate_curves.py --theta 1.0471975512 --out curves_pi3.csv
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

import numpy as np

from filterkey.b92 import B92Params
from filterkey.keyrate import ProtocolSpec, asymptotic_rate, key_length_b92, optimize_test_fraction


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--theta", type=float, default=math.pi / 3)
    ap.add_argument("--x", nargs="+", default=["ideal", "practical"])
    ap.add_argument("--q", type=float, nargs="+", default=[0.0, 0.01, 0.02, 0.03, 0.05])
    ap.add_argument("--eps", type=float, default=1e-6)
    ap.add_argument("--log10-n", type=float, nargs=2, default=[4.0, 12.0], metavar=("LO", "HI"))
    ap.add_argument("--points", type=int, default=33)
    ap.add_argument("--test-frac", type=float, default=None)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)

    n_totals = np.unique(np.round(np.logspace(*args.log10_n, args.points)).astype(np.int64))
    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["theta", "x", "Q", "N", "test_fraction", "rate", "asymptote"])
    for label in args.x:
        for q in args.q:
            params = B92Params.make(args.theta, label, q)
            asym = asymptotic_rate(params)
            for n_total in n_totals:
                spec = ProtocolSpec(int(n_total), args.eps, params, args.test_frac or 0.25)
                if args.test_frac is None:
                    f, rep = optimize_test_fraction(spec)
                else:
                    f, rep = args.test_frac, key_length_b92(spec)
                writer.writerow([f"{params.theta:.12g}", f"{params.x:.12g}", q, int(n_total),
                                 f"{f:.6g}", f"{rep.rate:.12g}", f"{asym:.12g}"])
    if out is not sys.stdout:
        out.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
