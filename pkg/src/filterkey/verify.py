"""Oracle suites run by ``filterkey verify``.

Each suite compares an analytic route with an independent one (enumeration,
Born rule, Monte Carlo) and returns named pass/fail checks.  Output depends
only on the seed and the suite options, never on timing or worker count.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .b92 import (
    B92Params,
    acceptance_prob,
    acceptance_prob_born,
    filter_ops,
    key_error,
    resolve_x,
)
from .bitmath import BitString
from .gamma import GammaQuery, gamma_brute_many, gamma_hamming_bound, gamma_hamming_reduced
from .keyrate import ProtocolSpec, key_length_b92
from .qubit import X_BASIS, Basis2, FilterRelationError, entropy_desk_check, verify_filter_relation
from .sampling import epsilon_cl, estimate_failure_prob
from .sim import SimConfig, estimate_statistics


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class SuiteResult:
    name: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(Check(name, bool(passed), detail))


@dataclass(frozen=True)
class Options:
    seed: int = 0
    max_n: int = 8
    sim_rounds: int = 200_000
    # self-test negates every tolerance so a correct build must fail
    self_test: bool = False
    workers: int | None = None

    def tol(self, value: float) -> float:
        return -abs(value) - 1.0 if self.self_test else value


def suite_filter(opt: Options) -> SuiteResult:
    res = SuiteResult("filter")
    for theta in np.linspace(0.1, math.pi / 2, 20):
        for label in ("ideal", "practical"):
            x = resolve_x(label, theta)
            try:
                f0, f1 = filter_ops(theta, x)
                lam0 = verify_filter_relation(f0, X_BASIS, X_BASIS, tol=1e-10)
                verify_filter_relation(f1, X_BASIS, X_BASIS, tol=1e-10)
                err = abs(abs(lam0[1]) ** 2 - x**2)
                res.add(f"theta={theta:.4f} x={label}", err <= opt.tol(1e-10), f"|lambda(0|-)^2 - x^2| = {err:.2e}")
            except FilterRelationError as exc:
                res.add(f"theta={theta:.4f} x={label}", False, str(exc))
    return res


def suite_gamma(opt: Options) -> SuiteResult:
    res = SuiteResult("gamma")
    windows = [(q, d) for q in (0.0, 0.1, 0.25) for d in (0.05, 0.2)]
    mismatches = violations = cases = 0
    for n in range(1, opt.max_n + 1):
        for c0 in range(1, n + 1):
            brute = gamma_brute_many(n, c0, windows)
            for (q, d), b in zip(windows, brute):
                cases += 1
                r = gamma_hamming_reduced(GammaQuery(n, c0, q, d))
                if b != r:
                    mismatches += 1
                if b is not None and b - gamma_hamming_bound(n, c0, q, d) > opt.tol(1e-12):
                    violations += 1
    res.add("brute == reduced", mismatches == 0, f"{mismatches} mismatches in {cases} cases")
    res.add("brute <= bound", violations == 0, f"{violations} violations in {cases} cases")
    return res


def suite_entropy(opt: Options) -> SuiteResult:
    res = SuiteResult("entropy")
    rng = np.random.default_rng(opt.seed)
    worst = math.inf
    for _ in range(100):
        j_size = int(rng.integers(1, 3))
        m = random_basis(rng)
        envs = [random_ket(rng) for _ in range(j_size)]
        amps = rng.normal(size=j_size) + 1j * rng.normal(size=j_size)
        chk = entropy_desk_check(j_size, envs, m, amps)
        worst = min(worst, chk.lhs - chk.rhs)
    res.add("H_min >= c - log2|J| (100 random)", worst >= -1e-9 + opt.tol(0.0), f"min slack {worst:.3e}")
    eq = entropy_desk_check(1, [random_ket(rng)], X_BASIS)
    res.add("|J|=1, M=X equality", abs(eq.lhs - 1.0) <= opt.tol(1e-9) and abs(eq.rhs - 1.0) <= opt.tol(1e-9),
            f"lhs={eq.lhs:.12f} rhs={eq.rhs:.12f}")
    return res


def suite_born(opt: Options) -> SuiteResult:
    res = SuiteResult("born")
    worst = 0.0
    for theta in np.linspace(0.05, math.pi / 2, 10):
        for x in np.linspace(0.2, 1.0, 5):
            for q in (0.0, 0.01, 0.05, 0.11):
                p = B92Params(float(theta), float(x), q)
                worst = max(worst, abs(acceptance_prob(p, cross_check=False) - acceptance_prob_born(p)))
    res.add("p_a formula == Born (200 points)", worst <= opt.tol(1e-12), f"max diff {worst:.2e}")
    return res


def suite_sampling(opt: Options) -> SuiteResult:
    res = SuiteResult("sampling")
    for n_total in (8, 12, 16):
        m = n_total // 4
        for delta in (0.1, 0.25):
            bound = epsilon_cl(m, n_total - m, delta)
            worst = 0.0
            for w in range(n_total + 1):
                qb = BitString.from_bits([1] * w + [0] * (n_total - w))
                est = estimate_failure_prob(BitString.zeros(n_total), qb, m, delta, 1, 0, exhaustive=True)
                worst = max(worst, est.prob)
            res.add(f"exhaustive N={n_total} delta={delta}", worst <= bound + opt.tol(0.0),
                    f"worst {worst:.4f} <= bound {bound:.4f}")
    n_total, m, delta = 2000, 500, 0.05
    bound = epsilon_cl(m, n_total - m, delta)
    qb = BitString.from_bits(np.arange(n_total) % 2)
    est = estimate_failure_prob(BitString.zeros(n_total), qb, m, delta, 5000, opt.seed, workers=opt.workers)
    res.add(f"monte carlo N={n_total} delta={delta}", est.prob <= bound + 4 * est.stderr + opt.tol(0.0),
            f"estimate {est.prob:.4f} +- {est.stderr:.4f} vs bound {bound:.4f}")
    return res


def suite_sim(opt: Options) -> SuiteResult:
    res = SuiteResult("sim")
    for theta in (math.pi / 3, math.pi / 2):
        for label in ("ideal", "practical"):
            params = B92Params.make(theta, label, 0.02)
            cfg = SimConfig(opt.sim_rounds, opt.sim_rounds // 4, params, seed=opt.seed)
            st = estimate_statistics(cfg, workers=opt.workers)
            for name, est, expect in (
                ("p_a", st.p_a, acceptance_prob(params)),
                ("Q_Z", st.q_z, key_error(params)),
                ("X error", st.x_error, params.Q),
            ):
                sigma = math.sqrt(expect * (1 - expect) / est.count)
                dev = abs(est.value - expect)
                res.add(f"{name} theta={theta:.4f} x={label}", dev <= 4 * sigma + opt.tol(1e-12),
                        f"{est.value:.6f} vs {expect:.6f} (4 sigma = {4 * sigma:.2e})")
    return res


def suite_keyrate(opt: Options) -> SuiteResult:
    res = SuiteResult("keyrate")
    rng = np.random.default_rng(opt.seed)
    bad = 0
    for _ in range(20):
        params = B92Params.make(float(rng.uniform(0.3, math.pi / 2)), "ideal", float(rng.uniform(0, 0.05)))
        spec = ProtocolSpec(int(rng.integers(10_000, 200_000)), 1e-6, params, float(rng.uniform(0.05, 0.45)))
        scanned = key_length_b92(spec, scan_c0=True)
        direct = key_length_b92(spec)
        if abs(scanned.ell - direct.ell) > opt.tol(1e-9) * max(1.0, direct.ell):
            bad += 1
    res.add("c0 scan minimum at n0", bad == 0, f"{bad} of 20 specs disagree")
    return res


SUITES: dict[str, Callable[[Options], SuiteResult]] = {
    "filter": suite_filter,
    "gamma": suite_gamma,
    "entropy": suite_entropy,
    "born": suite_born,
    "sampling": suite_sampling,
    "sim": suite_sim,
    "keyrate": suite_keyrate,
}


def run_suites(names: list[str] | None, opt: Options) -> list[SuiteResult]:
    return [SUITES[name](opt) for name in (names or list(SUITES))]


def to_json_dict(results: list[SuiteResult], opt: Options) -> dict:
    return {
        "seed": opt.seed,
        "self_test": opt.self_test,
        "passed": all(r.passed for r in results),
        "suites": {r.name: {"passed": r.passed, "checks": [asdict(c) for c in r.checks]} for r in results},
    }


def random_ket(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


def random_basis(rng: np.random.Generator) -> Basis2:
    q, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    return Basis2((q[:, 0], q[:, 1]))
