"""Command-line front end.

    filterkey keyrate  --theta 1.0472 --q 0.01 --eps 1e-6 --n-total 1000000
    filterkey sweep    --theta 1.0472 --q-list 0.01,0.03 --n-total 1e4:1e10:log10
    filterkey verify   [--suite gamma --max-n 10] [--self-test] [--json out.json]
    filterkey simulate --rounds 1000000 --theta 1.0472 --q 0.02 --seed 1

Exit codes: 0 success, 1 domain outcome (no extractable key, failed suite),
2 usage error.  ``--config FILE`` reads flat ``key = value`` lines named
after the long flags; flags given on the command line take precedence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Optional, Sequence

from . import verify as verify_mod
from .b92 import B92Params, acceptance_prob, key_error
from .keyrate import (
    KeyRateReport,
    PointError,
    ProtocolSpec,
    asymptotic_rate,
    key_length_b92,
    optimize_test_fraction,
    sweep,
    sweep_grid,
)
from .sim import SimConfig, estimate_statistics, run_protocol_trace

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2

CSV_COLUMNS = ["N", "m", "n", "n0", "delta", "eps_cl", "gamma_bits", "lambda_ec", "ell", "rate", "security_eps"]
_REPORT_FIELD = {"security_eps": "security_epsilon"}


class UsageError(Exception):
    pass


def fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.12g}"
    return str(value)


def report_row(report: KeyRateReport) -> list[str]:
    return [fmt(getattr(report, _REPORT_FIELD.get(col, col))) for col in CSV_COLUMNS]


def write_csv(rows: list[list[str]], out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(rows)


def _float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def _count(text: str) -> int:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a count: {text!r}")
    if value != int(value) or value < 0:
        raise argparse.ArgumentTypeError(f"not a nonnegative integer: {text!r}")
    return int(value)


def _float_list(text: str) -> list[float]:
    return [_float(part) for part in text.split(",") if part.strip()]


def _x_list(text: str) -> list[str]:
    items = [part.strip() for part in text.split(",") if part.strip()]
    for item in items:
        if item.lower() not in ("ideal", "practical"):
            _float(item)
    return items


def parse_count_range(text: str) -> list[int]:
    """``a,b,c`` list, ``start:stop:log10`` (one point per decade) or ``start:stop:step``."""
    if ":" not in text:
        values = [_count(part) for part in text.split(",") if part.strip()]
    else:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"range must be start:stop:step, got {text!r}")
        start, stop = float(parts[0]), float(parts[1])
        if parts[2] == "log10":
            if start <= 0 or stop < start:
                raise UsageError(f"degenerate log range {text!r}")
            lo, hi = math.log10(start), math.log10(stop)
            values = [round(10 ** (lo + k)) for k in range(int(math.floor(hi - lo + 1e-9)) + 1)]
        else:
            step = float(parts[2])
            if step <= 0 or stop < start:
                raise UsageError(f"degenerate range {text!r}")
            values = [int(round(start + k * step)) for k in range(int(math.floor((stop - start) / step + 1e-9)) + 1)]
    if not values:
        raise UsageError(f"empty range {text!r}")
    return values


def read_config(path: str) -> list[str]:
    """Turn ``key = value`` lines into argv tokens (``true``/``false`` for switches)."""
    argv = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            flag = "--" + key.replace("_", "-")
            if value.lower() in ("true", "yes", "on"):
                argv.append(flag)
            elif value.lower() in ("false", "no", "off"):
                continue
            else:
                argv.extend([flag, value])
    return argv


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="filterkey", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key = value file mirroring the long flags")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--workers", type=int, default=None, help="worker processes (default: FILTERKEY_THREADS or CPUs)")

    kr = sub.add_parser("keyrate", help="finite key length for one parameter point")
    common(kr)
    kr.add_argument("--theta", type=_float, required=True, help="signal angle in radians, (0, pi/2]")
    kr.add_argument("--q", type=_float, required=True, help="depolarizing parameter / abort threshold")
    kr.add_argument("--eps", type=_float, required=True, help="target security level")
    kr.add_argument("--n-total", type=_count, required=True, help="total signals N")
    kr.add_argument("--x", default="ideal", help="device quality: ideal, practical or a number")
    kr.add_argument("--test-frac", type=_float, default=0.25)
    kr.add_argument("--optimize-f", action="store_true", help="choose the test fraction maximizing the rate")
    kr.add_argument("--n0", default="expected", help="abort threshold: 'expected' or a count")
    kr.add_argument("--n0-sigma", type=_float, default=0.0, help="lower the expected n0 by k binomial sigmas")
    kr.add_argument("--eps-cor", type=_float, default=None, help="deduct log2(1/eps_cor) for a correctness check")
    kr.add_argument("--format", choices=("csv", "json"), default="csv")

    sw = sub.add_parser("sweep", help="key-rate table over a parameter grid")
    common(sw)
    sw.add_argument("--theta", type=_float_list, required=True, help="comma list of angles (radians)")
    sw.add_argument("--q-list", type=_float_list, required=True)
    sw.add_argument("--n-total", required=True, help="list a,b,c or start:stop:log10 or start:stop:step")
    sw.add_argument("--eps", type=_float_list, default=[1e-6])
    sw.add_argument("--x", type=_x_list, default=["ideal"])
    sw.add_argument("--test-frac", type=_float_list, default=[0.25])
    sw.add_argument("--optimize-f", action="store_true")
    sw.add_argument("--eps-cor", type=_float, default=None)
    sw.add_argument("--asymptote", action="store_true", help="append the large-N rate as an N=inf row per curve")
    sw.add_argument("--format", choices=("csv", "json"), default="csv")

    vf = sub.add_parser("verify", help="run the oracle suites")
    vf.add_argument("--config")
    vf.add_argument("--suite", action="append", choices=sorted(verify_mod.SUITES))
    vf.add_argument("--seed", type=_count, default=0)
    vf.add_argument("--max-n", type=_count, default=8, help="largest n for the exhaustive gamma comparison")
    vf.add_argument("--sim-rounds", type=_count, default=200_000)
    vf.add_argument("--self-test", action="store_true", help="invert tolerances; a sound build must then fail")
    vf.add_argument("--json", dest="json_out", help="write the machine-readable summary here")
    vf.add_argument("--workers", type=int, default=None)

    sm = sub.add_parser("simulate", help="seeded Monte Carlo run of the protocol")
    common(sm)
    sm.add_argument("--rounds", type=_count, required=True)
    sm.add_argument("--theta", type=_float, required=True)
    sm.add_argument("--q", type=_float, required=True)
    sm.add_argument("--x", default="ideal")
    sm.add_argument("--test-m", type=_count, default=None, help="test-set size (default rounds // 4)")
    sm.add_argument("--delta", type=_float, default=0.05)
    sm.add_argument("--q-max", type=_float, default=0.5)
    sm.add_argument("--n0-min", type=_count, default=0)
    sm.add_argument("--seed", type=_count, default=0)
    sm.add_argument("--repetitions", type=_count, default=1)
    return parser


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _spec_from_args(args) -> ProtocolSpec:
    params = B92Params.make(args.theta, args.x, args.q)
    n0 = None if str(args.n0).lower() == "expected" else _count(str(args.n0))
    return ProtocolSpec(args.n_total, args.eps, params, args.test_frac, n0, args.n0_sigma, args.eps_cor)


def cmd_keyrate(args) -> int:
    spec = _spec_from_args(args)
    if args.optimize_f:
        _, report = optimize_test_fraction(spec)
    else:
        report = key_length_b92(spec)
    if args.format == "json":
        text = json.dumps(report.to_dict(), indent=2) + "\n"
    else:
        buf = io.StringIO()
        write_csv([report_row(report)], buf)
        text = buf.getvalue()
    _emit(text, args.out)
    if report.ell <= 0:
        print("no extractable key", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def cmd_sweep(args) -> int:
    n_totals = parse_count_range(args.n_total)
    if not args.theta or not args.q_list or not args.eps or not args.x or not args.test_frac:
        raise UsageError("every grid axis needs at least one value")
    specs = sweep_grid(n_totals, args.q_list, args.theta, args.x, args.test_frac, args.eps, args.eps_cor)
    rows = sweep(specs, optimize_fraction=args.optimize_f, workers=args.workers)

    csv_rows, json_rows = [], []
    group = len(n_totals)
    for i, row in enumerate(rows):
        p = row.spec.params
        meta = {"theta": p.theta, "x": p.x, "Q": p.Q, "test_fraction": row.test_fraction, "eps": row.spec.eps}
        if isinstance(row.result, PointError):
            print(f"warning: N={row.spec.n_total} theta={p.theta} Q={p.Q}: {row.result.message}", file=sys.stderr)
            csv_rows.append([fmt(row.spec.n_total)] + [""] * (len(CSV_COLUMNS) - 1))
            json_rows.append({**meta, "N": row.spec.n_total, "error": row.result.message})
        else:
            csv_rows.append(report_row(row.result))
            json_rows.append({**meta, **row.result.to_dict()})
        if args.asymptote and (i + 1) % group == 0:
            asym = asymptotic_rate(p)
            csv_rows.append(["inf"] + [""] * (len(CSV_COLUMNS) - 3) + [fmt(asym), ""])
            json_rows.append({**meta, "N": "inf", "rate": asym, "asymptotic": True})

    if args.format == "json":
        text = json.dumps(json_rows, indent=2) + "\n"
    else:
        buf = io.StringIO()
        write_csv(csv_rows, buf)
        text = buf.getvalue()
    _emit(text, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    opt = verify_mod.Options(seed=args.seed, max_n=args.max_n, sim_rounds=args.sim_rounds,
                             self_test=args.self_test, workers=args.workers)
    if args.max_n > 12:
        raise UsageError("--max-n above 12 is not practical for full enumeration")
    results = verify_mod.run_suites(args.suite, opt)
    for res in results:
        print(f"[{'PASS' if res.passed else 'FAIL'}] {res.name}")
        for c in res.checks:
            if not c.passed or len(res.checks) <= 4:
                print(f"    {'ok  ' if c.passed else 'FAIL'} {c.name}: {c.detail}")
    summary = verify_mod.to_json_dict(results, opt)
    if args.json_out:
        _emit(json.dumps(summary, indent=2, sort_keys=True) + "\n", args.json_out)
    ok = summary["passed"]
    print("all suites passed" if ok else "some checks FAILED")
    return EXIT_OK if ok else EXIT_DOMAIN


def cmd_simulate(args) -> int:
    params = B92Params.make(args.theta, args.x, args.q)
    m = args.test_m if args.test_m is not None else args.rounds // 4
    cfg = SimConfig(args.rounds, m, params, args.delta, args.q_max, args.n0_min, args.seed)
    trace = run_protocol_trace(cfg, workers=args.workers)
    stats = estimate_statistics(cfg, args.repetitions, workers=args.workers)
    summary = {
        "seed": cfg.seed,
        "rounds": cfg.rounds,
        "m": cfg.m,
        "theta": params.theta,
        "x": params.x,
        "Q": params.Q,
        "delta": cfg.delta,
        "q_max": cfg.q_max,
        "n0_min": cfg.n0_min,
        "s_observed": trace.s_observed,
        "accepted": trace.accepted,
        "errors": trace.errors,
        "abort": trace.aborted,
        "repetitions": stats.repetitions,
        "aborts": stats.aborts,
        "p_a_hat": stats.p_a.value,
        "p_a_stderr": stats.p_a.stderr,
        "q_z_hat": stats.q_z.value,
        "q_z_stderr": stats.q_z.stderr,
        "x_error_hat": stats.x_error.value,
        "x_error_stderr": stats.x_error.stderr,
        "p_a_analytic": acceptance_prob(params),
        "q_z_analytic": key_error(params),
    }
    _emit(json.dumps(summary, indent=2) + "\n", args.out)
    return EXIT_OK


COMMANDS = {"keyrate": cmd_keyrate, "sweep": cmd_sweep, "verify": cmd_verify, "simulate": cmd_simulate}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        if "--config" in argv:
            i = argv.index("--config")
            if i + 1 >= len(argv):
                raise UsageError("--config needs a path")
            path = argv[i + 1]
            rest = argv[:i] + argv[i + 2:]
            # file values first so explicit flags override them
            argv = rest[:1] + read_config(path) + rest[1:]
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except (UsageError, ValueError, OSError) as exc:
        print(f"filterkey: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
