"""Two-party sampling strategy over X-basis outcomes.

Alice and Bob reveal their bits on a uniformly random subset ``t`` of size
``m`` and compare the relative weight of the XOR there (the guess) with the
XOR weight on the unrevealed positions (the target).  A word pair is good
for ``t`` when the two differ by at most ``delta``.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._parallel import worker_count
from .bitmath import BitString, relative_weight, xor

# Absorbs rounding in |guess - target| <= delta when both sides are ratios of
# small integers; shared by every evaluator so they agree on boundary cases.
WINDOW_SLACK = 1e-12

# Trials are grouped into fixed-size blocks; each block draws from its own
# stream keyed by (seed, block index), so any partition over workers gives the
# same answer.
TRIAL_BLOCK = 512


def within(s, tau, delta):
    """``|s - tau| <= delta`` with a shared rounding slack (works on arrays)."""
    return np.abs(np.asarray(s) - tau) <= delta + WINDOW_SLACK


@dataclass(frozen=True)
class HammingXor:
    """Guess = target = relative weight of ``qA XOR qB``."""

    name: str = "hamming-xor"

    def __call__(self, qa: BitString, qb: BitString) -> float:
        return relative_weight(xor(qa, qb))

    def on_codes(self, a_codes: np.ndarray, b_codes: np.ndarray, n: int) -> np.ndarray:
        """Vectorized target over integer-coded ``n``-bit words (broadcasting)."""
        return np.bitwise_count(np.bitwise_xor(a_codes, b_codes)) / n


HAMMING_XOR = HammingXor()

Strategy = Callable[[BitString, BitString], float]


@dataclass(frozen=True)
class SamplingSpec:
    n_total: int
    m: int
    delta: float

    def __post_init__(self):
        if not 1 <= self.m or not 2 * self.m < self.n_total:
            raise ValueError(f"need 1 <= m < N/2, got m={self.m}, N={self.n_total}")
        if not self.delta > 0:
            raise ValueError("delta must be positive")

    @property
    def n(self) -> int:
        return self.n_total - self.m

    def epsilon_cl(self) -> float:
        return epsilon_cl(self.m, self.n, self.delta)


@dataclass(frozen=True)
class ObservationOutcome:
    t: tuple[int, ...]
    s: float


def _complement_sizes(n_total: int, t: Sequence[int]) -> int:
    k = len(set(t))
    if k != len(t):
        raise ValueError("index set t contains duplicates")
    if k == 0 or k >= n_total:
        raise ValueError("t must be a nonempty proper subset")
    if min(t) < 0 or max(t) >= n_total:
        raise ValueError("index out of range")
    return k


def good_word_test(
    qa: BitString,
    qb: BitString,
    t: Sequence[int],
    delta: float,
    strategy: Strategy = HAMMING_XOR,
) -> bool:
    if len(qa) != len(qb):
        raise ValueError("qA and qB must have the same length")
    _complement_sizes(len(qa), t)
    guess = strategy(qa.take(t), qb.take(t))
    target = strategy(qa.drop(t), qb.drop(t))
    return bool(within(guess, target, delta))


def epsilon_cl(m: int, n: int, delta: float) -> float:
    """Failure probability bound for size-``m`` uniform sampling with ``n`` unsampled positions."""
    if m < 1 or n < 1 or not delta > 0:
        raise ValueError(f"need m, n >= 1 and delta > 0, got m={m}, n={n}, delta={delta}")
    exponent = -(delta**2) * m * (n + m) / (m + n + 2)
    return min(1.0, 2.0 * math.exp(exponent))


def delta_for_epsilon(m: int, n: int, eps: float) -> float:
    """Tolerance at which ``5 * sqrt(epsilon_cl(m, n, delta)) == eps``."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    # ln(50 / eps^2) in split form: eps**2 underflows for eps below ~1e-154
    return math.sqrt((m + n + 2) / (m * (m + n)) * (math.log(50.0) - 2.0 * math.log(eps)))


def security_from_epsilon_cl(eps_cl: float) -> float:
    return min(1.0, 5.0 * math.sqrt(eps_cl))


@dataclass(frozen=True)
class FailureEstimate:
    prob: float
    stderr: float
    trials: int
    exhaustive: bool = False


def _fail_counts_block(args) -> int:
    err_bits, m, delta, seed, block, n_trials = args
    n_total = err_bits.size
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))
    total = int(err_bits.sum())
    fails = 0
    for _ in range(n_trials):
        # partial Fisher-Yates: only the first m slots of the permutation are needed
        t = rng.choice(n_total, size=m, replace=False, shuffle=False)
        k = int(err_bits[t].sum())
        if not within(k / m, (total - k) / (n_total - m), delta):
            fails += 1
    return fails


def _check_failure_args(qa: BitString, qb: BitString, m: int) -> np.ndarray:
    if len(qa) != len(qb):
        raise ValueError("qA and qB must have the same length")
    # m = N/2 is still well defined for estimation; the analytic bound setting wants m < N/2
    if not 0 < m or not 2 * m <= len(qa):
        raise ValueError(f"need 0 < m <= N/2, got m={m}, N={len(qa)}")
    return xor(qa, qb).to_array().astype(np.int64)


def exhaustive_failure_prob(qa: BitString, qb: BitString, m: int, delta: float) -> FailureEstimate:
    """Exact failure probability by enumerating every size-``m`` subset (N <= 20)."""
    err = _check_failure_args(qa, qb, m)
    n_total = err.size
    if n_total > 20:
        raise ValueError("exhaustive enumeration is limited to N <= 20")
    subsets = np.array(list(itertools.combinations(range(n_total), m)), dtype=np.intp)
    k = err[subsets].sum(axis=1)
    ok = within(k / m, (err.sum() - k) / (n_total - m), delta)
    fails = int((~ok).sum())
    return FailureEstimate(fails / len(subsets), 0.0, len(subsets), exhaustive=True)


def estimate_failure_prob(
    qa: BitString,
    qb: BitString,
    m: int,
    delta: float,
    trials: int,
    seed: int,
    exhaustive: bool = False,
    workers: int | None = None,
) -> FailureEstimate:
    """Monte Carlo probability that a uniform size-``m`` subset misses the target by more than ``delta``.

    The result depends only on ``seed`` and ``trials``; ``workers`` changes
    wall time, never the estimate.
    """
    if exhaustive:
        return exhaustive_failure_prob(qa, qb, m, delta)
    err = _check_failure_args(qa, qb, m)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    blocks = [
        (err, m, delta, seed, b, min(TRIAL_BLOCK, trials - b * TRIAL_BLOCK))
        for b in range(math.ceil(trials / TRIAL_BLOCK))
    ]
    workers = min(worker_count(workers), len(blocks))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            fails = sum(pool.map(_fail_counts_block, blocks))
    else:
        fails = sum(map(_fail_counts_block, blocks))
    p = fails / trials
    return FailureEstimate(p, math.sqrt(p * (1 - p) / trials), trials)
