"""Key rate as a function of the signal angle at fixed block sizes.

Smaller angles make the two key states harder to tell apart, so fewer
rounds are accepted but the sampled noise says more about the key.  This
script tabulates the trade-off for ideal and practical devices.

    python scripts/theta_comparison.py --q 0.02 --out theta_q002.csv
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

import numpy as np

from filterkey.b92 import B92Params, acceptance_prob, key_error
from filterkey.keyrate import ProtocolSpec, asymptotic_rate, optimize_test_fraction


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--q", type=float, default=0.02)
    ap.add_argument("--eps", type=float, default=1e-6)
    ap.add_argument("--n-total", type=float, nargs="+", default=[1e6, 1e8, 1e10])
    ap.add_argument("--angles", type=int, default=30)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)

    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["theta", "device", "p_a", "Q_Z", "N", "rate", "asymptote"])
    for theta in np.linspace(math.pi / 12, math.pi / 2, args.angles):
        for label in ("ideal", "practical"):
            params = B92Params.make(float(theta), label, args.q)
            p_a, q_z, asym = acceptance_prob(params), key_error(params), asymptotic_rate(params)
            for n_total in args.n_total:
                _, rep = optimize_test_fraction(ProtocolSpec(int(n_total), args.eps, params))
                writer.writerow([f"{theta:.12g}", label, f"{p_a:.12g}", f"{q_z:.12g}", int(n_total),
                                 f"{rep.rate:.12g}", f"{asym:.12g}"])
    if out is not sys.stdout:
        out.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
