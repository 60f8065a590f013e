"""Compare simulated acceptance and error rates with the closed forms.

Prints one line per (theta, device, Q) point with the z-scores of the
empirical acceptance probability, raw-key error rate and X-basis error rate.

    python scripts/simulator_check.py --rounds 1000000 --seed 3
"""

from __future__ import annotations

import argparse
import itertools
import math
import sys

from filterkey.b92 import B92Params, acceptance_prob, key_error
from filterkey.sim import SimConfig, estimate_statistics


def zscore(est, expect):
    sigma = math.sqrt(expect * (1 - expect) / est.count)
    return (est.value - expect) / sigma if sigma > 0 else 0.0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--rounds", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--q", type=float, nargs="+", default=[0.01, 0.05])
    args = ap.parse_args(argv)

    print(f"{'theta':>8} {'device':>9} {'Q':>5} {'z(p_a)':>8} {'z(Q_Z)':>8} {'z(X)':>8}")
    worst = 0.0
    for theta, label, q in itertools.product((math.pi / 4, math.pi / 3, math.pi / 2), ("ideal", "practical"), args.q):
        params = B92Params.make(theta, label, q)
        st = estimate_statistics(SimConfig(args.rounds, args.rounds // 4, params, seed=args.seed))
        zs = (zscore(st.p_a, acceptance_prob(params)), zscore(st.q_z, key_error(params)), zscore(st.x_error, q))
        worst = max(worst, *map(abs, zs))
        print(f"{theta:8.4f} {label:>9} {q:5.2f} " + " ".join(f"{z:8.2f}" for z in zs))
    print(f"max |z| = {worst:.2f}")
    return 0 if worst <= 4 else 1


if __name__ == "__main__":
    sys.exit(main())
