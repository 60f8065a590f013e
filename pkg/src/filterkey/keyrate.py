"""Finite-key length for filtered protocols and its Extended-B92 specialization.

The generic engine takes the overlap constant in bits, a penalty function of
the number of kept rounds ``c0`` and the sampling failure probability:

    ell = min_{n0 <= c0 <= n} [c0 * c_bits - gamma(c0)] - lambda_EC - log2(1 / eps_cl)

(``2 log2(1/sqrt(eps_cl)) == log2(1/eps_cl)``) and the resulting key is
``5 sqrt(eps_cl)``-secure.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np
from scipy.optimize import minimize_scalar

from ._parallel import worker_count
from .b92 import B92Params, acceptance_prob, key_error
from .bitmath import binary_entropy
from .gamma import GammaQuery, gamma_hamming_bound, gamma_hamming_reduced
from .sampling import delta_for_epsilon, epsilon_cl, security_from_epsilon_cl

# sampling X against a Z-basis key: mutually unbiased, one bit per kept round
C_BITS_XZ = 1.0


def h_clamped(x: float) -> float:
    """Binary entropy with the argument clamped to [0, 1/2]."""
    return binary_entropy(min(max(x, 0.0), 0.5))


@dataclass(frozen=True)
class KeyLength:
    ell: float
    c0: int
    raw: float  # unclamped value


def key_length_general(
    c_bits: float,
    gamma_of_c0: Callable[[int], Optional[float]],
    n0: int,
    n: int,
    lambda_ec: float,
    eps_cl: float,
    eps_cor: Optional[float] = None,
    c0_values: Optional[Iterable[int]] = None,
) -> KeyLength:
    """Minimize ``c0 * c_bits - gamma(c0)`` over ``c0 in [n0, n]`` and deduct leakage.

    ``c0_values`` restricts the scan when the minimizer is known analytically.
    A penalty of ``None`` (no consistent word at all) contributes nothing.
    """
    if not 1 <= n0 <= n:
        raise ValueError(f"need 1 <= n0 <= n, got n0={n0}, n={n}")
    if not 0.0 < eps_cl < 1.0:
        raise ValueError(f"eps_cl must lie in (0, 1), got {eps_cl}")
    best, best_c0 = math.inf, n0
    for c0 in (range(n0, n + 1) if c0_values is None else c0_values):
        if not n0 <= c0 <= n:
            raise ValueError(f"c0={c0} outside [{n0}, {n}]")
        g = gamma_of_c0(c0)
        value = c0 * c_bits - (g if g is not None else 0.0)
        if value < best:
            best, best_c0 = value, c0
    raw = best - lambda_ec - math.log2(1.0 / eps_cl)
    if eps_cor is not None:
        raw -= math.log2(1.0 / eps_cor)
    return KeyLength(max(raw, 0.0), best_c0, raw)


@dataclass(frozen=True)
class ProtocolSpec:
    """One finite-key evaluation point.

    ``n0`` fixes the abort threshold explicitly; otherwise it is the expected
    number of accepted rounds ``floor(p_a n)``, lowered by ``n0_sigma``
    binomial standard deviations when that is positive.
    """

    n_total: int
    eps: float
    params: B92Params
    test_fraction: float = 0.25
    n0: Optional[int] = None
    n0_sigma: float = 0.0
    eps_cor: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 0.5:
            raise ValueError(f"test fraction must lie in (0, 1/2), got {self.test_fraction}")
        if not 0.0 < self.eps < 1.0:
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")
        if self.n_total < 3:
            raise ValueError("n_total must be at least 3")
        if self.n0_sigma < 0:
            raise ValueError("n0_sigma must be nonnegative")

    @property
    def m(self) -> int:
        return math.floor(self.test_fraction * self.n_total)

    @property
    def n(self) -> int:
        return self.n_total - self.m


@dataclass(frozen=True)
class KeyRateReport:
    N: int
    m: int
    n: int
    n0: int
    delta: float
    eps_cl: float
    gamma_bits: float
    c_bits: float
    lambda_ec: float
    ell: float
    rate: float
    security_epsilon: float
    c0: int = 0
    aborted: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def expected_n0(spec: ProtocolSpec) -> int:
    if spec.n0 is not None:
        return spec.n0
    p_a = acceptance_prob(spec.params, cross_check=False)
    mean = p_a * spec.n
    slack = spec.n0_sigma * math.sqrt(spec.n * p_a * (1 - p_a))
    return max(0, math.floor(mean - slack))


def key_length_b92(spec: ProtocolSpec, gamma: str = "bound", scan_c0: bool = False) -> KeyRateReport:
    """Extended-B92 key length.

    ``gamma="bound"`` uses the closed-form Hamming-ball penalty, for which the
    minimum over ``c0`` sits at ``n0`` (no scan needed unless ``scan_c0``).
    ``gamma="exact"`` uses the weight-class evaluator and always scans.
    """
    if spec.m < 1:
        raise ValueError(f"test set is empty: floor({spec.test_fraction} * {spec.n_total}) = 0")
    params = spec.params
    p_a = acceptance_prob(params, cross_check=False)
    if p_a <= 0:
        raise ValueError("acceptance probability is zero")
    m, n = spec.m, spec.n
    delta = delta_for_epsilon(m, n, spec.eps)
    eps_cl = epsilon_cl(m, n, delta)
    n0 = expected_n0(spec)
    if n0 > n:
        raise ValueError(f"n0={n0} exceeds the {n} unsampled rounds")
    q_z = key_error(params)
    lambda_ec = n0 * h_clamped(q_z + delta)
    security = security_from_epsilon_cl(eps_cl)

    if n0 < 1:
        return KeyRateReport(spec.n_total, m, n, n0, delta, eps_cl, 0.0, C_BITS_XZ,
                             lambda_ec, 0.0, 0.0, security, 0, True)

    if gamma == "bound":
        def penalty(c0: int) -> float:
            return gamma_hamming_bound(n, c0, params.Q, delta)
        c0_values = None if scan_c0 else [n0]
    elif gamma == "exact":
        def penalty(c0: int) -> Optional[float]:
            return gamma_hamming_reduced(GammaQuery(n, c0, params.Q, delta))
        c0_values = None
    else:
        raise ValueError(f"unknown gamma mode {gamma!r}")

    kl = key_length_general(C_BITS_XZ, penalty, n0, n, lambda_ec, eps_cl,
                            eps_cor=spec.eps_cor, c0_values=c0_values)
    g = penalty(kl.c0)
    return KeyRateReport(
        N=spec.n_total, m=m, n=n, n0=n0, delta=delta, eps_cl=eps_cl,
        gamma_bits=g if g is not None else 0.0, c_bits=C_BITS_XZ, lambda_ec=lambda_ec,
        ell=kl.ell, rate=kl.ell / spec.n_total, security_epsilon=security,
        c0=kl.c0, aborted=kl.ell <= 0.0,
    )


def asymptotic_rate(params: B92Params) -> float:
    """Large-N limit of ``ell / N`` (delta -> 0, vanishing test fraction).

    ``p_a (1 - h(Q / p_a) - h(Q_Z))`` with both entropy arguments clamped to
    [0, 1/2]; a limit of the finite formula, not an independent result.
    """
    p_a = acceptance_prob(params, cross_check=False)
    if p_a <= 0:
        return 0.0
    return max(0.0, p_a * (1.0 - h_clamped(params.Q / p_a) - h_clamped(key_error(params))))


def optimize_test_fraction(spec: ProtocolSpec, coarse: int = 48) -> tuple[float, KeyRateReport]:
    """Test fraction maximizing the key rate: log-spaced scan, then bounded Brent refinement."""
    lo = min(0.49, max(2.0 / spec.n_total, 1e-12))
    hi = 0.49
    grid = np.geomspace(lo, hi, coarse)

    def rate(log_f: float) -> float:
        f = float(np.exp(log_f))
        return key_length_b92(_with_fraction(spec, f)).rate

    rates = [rate(math.log(f)) for f in grid]
    i = int(np.argmax(rates))
    if rates[i] > 0:
        a = math.log(grid[max(i - 1, 0)])
        b = math.log(grid[min(i + 1, coarse - 1)])
        res = minimize_scalar(lambda lf: -rate(lf), bounds=(a, b), method="bounded",
                              options={"xatol": 1e-6})
        f_best = float(np.exp(res.x)) if -res.fun >= rates[i] else float(grid[i])
    else:
        f_best = float(grid[i])
    return f_best, key_length_b92(_with_fraction(spec, f_best))


def _with_fraction(spec: ProtocolSpec, f: float) -> ProtocolSpec:
    return ProtocolSpec(spec.n_total, spec.eps, spec.params, f, spec.n0, spec.n0_sigma, spec.eps_cor)


@dataclass(frozen=True)
class PointError:
    """A sweep point that could not be evaluated; the sweep carries on."""

    message: str


@dataclass(frozen=True)
class SweepRow:
    spec: ProtocolSpec
    result: Union[KeyRateReport, PointError]
    test_fraction: float


def sweep_grid(
    n_totals: Sequence[int],
    qs: Sequence[float],
    thetas: Sequence[float],
    xs: Sequence[Union[float, str]] = ("ideal",),
    fractions: Sequence[float] = (0.25,),
    epss: Sequence[float] = (1e-6,),
    eps_cor: Optional[float] = None,
) -> list[ProtocolSpec]:
    """Cartesian grid, ordered theta > x > Q > f > eps > N (N varies fastest)."""
    specs = []
    for theta in thetas:
        for x in xs:
            for q in qs:
                params = B92Params.make(theta, x, q)
                for f in fractions:
                    for eps in epss:
                        for n_total in n_totals:
                            specs.append(ProtocolSpec(int(n_total), eps, params, f, eps_cor=eps_cor))
    return specs


def _evaluate(args) -> SweepRow:
    spec, optimize = args
    try:
        if optimize:
            f, report = optimize_test_fraction(spec)
        else:
            f, report = spec.test_fraction, key_length_b92(spec)
        return SweepRow(spec, report, f)
    except (ValueError, ArithmeticError) as exc:
        return SweepRow(spec, PointError(str(exc)), spec.test_fraction)


def sweep(specs: Sequence[ProtocolSpec], optimize_fraction: bool = False,
          workers: Optional[int] = None) -> list[SweepRow]:
    """Evaluate every point in order; failures are recorded per row."""
    if not specs:
        raise ValueError("empty sweep grid")
    jobs = [(s, optimize_fraction) for s in specs]
    n_workers = worker_count(workers)
    if n_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(n_workers) as pool:
            return list(pool.map(_evaluate, jobs))
    return [_evaluate(j) for j in jobs]
