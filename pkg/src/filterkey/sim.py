"""Seeded Monte Carlo run of the filtered protocol for Extended B92 under
depolarizing noise.

Every round is an independent copy of the channel output state.  Outcomes
are drawn from the exact Born distributions of the 4x4 joint state, so the
only randomness is the sampling itself.  Round ``i`` takes its uniform
variate from the stream of block ``i // ROUND_BLOCK``, keyed by the seed, so
transcripts do not depend on how blocks are spread over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._parallel import worker_count
from .b92 import B92Params, key_outcome_probs, xbasis_outcome_probs
from .bitmath import BitString

ROUND_BLOCK = 1 << 16
PROB_TOL = 1e-12

# spawn-key tags separating the independent random streams of one run
_SUBSET_STREAM = 0
_ROUND_STREAM = 1


@dataclass(frozen=True)
class SimConfig:
    rounds: int
    m: int
    params: B92Params
    delta: float = 0.05
    q_max: float = 0.5
    n0_min: int = 0
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.m or not 2 * self.m < self.rounds:
            raise ValueError(f"need 1 <= m < rounds/2, got m={self.m}, rounds={self.rounds}")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not 0.0 <= self.q_max <= 1.0:
            raise ValueError("q_max must lie in [0, 1]")
        if not 0 <= self.n0_min <= self.rounds - self.m:
            raise ValueError("n0_min must lie in [0, rounds - m]")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


@dataclass(frozen=True)
class Transcript:
    t: np.ndarray
    s_observed: float
    d: BitString
    aborted: bool
    raw_key_a: BitString
    raw_key_b: BitString
    accepted: int
    errors: int
    test_errors: int

    @property
    def key_rounds(self) -> int:
        return len(self.d)

    @property
    def test_rounds(self) -> int:
        return int(self.t.size)


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def _cdf(probs: np.ndarray) -> np.ndarray:
    probs = np.clip(probs.ravel(), 0.0, None)
    total = probs.sum()
    if abs(total - 1.0) > PROB_TOL:
        raise AssertionError(f"outcome probabilities sum to {total!r}")
    cdf = np.cumsum(probs / total)
    cdf[-1] = 1.0
    return cdf


def _block_outcomes(args) -> np.ndarray:
    seed, rep, block, is_test, test_cdf, key_cdf = args
    u = _stream(seed, rep, _ROUND_STREAM, block).random(is_test.size)
    out = np.searchsorted(key_cdf, u, side="right")
    out[is_test] = np.searchsorted(test_cdf, u[is_test], side="right")
    return out.astype(np.int8)


def _run(cfg: SimConfig, rep: int, workers: Optional[int]) -> Transcript:
    n_rounds = cfg.rounds
    t = np.sort(_stream(cfg.seed, rep, _SUBSET_STREAM).choice(n_rounds, size=cfg.m, replace=False))
    is_test = np.zeros(n_rounds, dtype=bool)
    is_test[t] = True

    # test: index 2a + b over X outcomes; key: index 3a + b with b = 2 for inconclusive
    test_cdf = _cdf(xbasis_outcome_probs(cfg.params))
    key_cdf = _cdf(key_outcome_probs(cfg.params))
    jobs = [
        (cfg.seed, rep, k, is_test[k * ROUND_BLOCK:(k + 1) * ROUND_BLOCK], test_cdf, key_cdf)
        for k in range(math.ceil(n_rounds / ROUND_BLOCK))
    ]
    n_workers = min(worker_count(workers), len(jobs))
    if n_workers > 1:
        with ProcessPoolExecutor(n_workers) as pool:
            outcomes = np.concatenate(list(pool.map(_block_outcomes, jobs)))
    else:
        outcomes = np.concatenate([_block_outcomes(j) for j in jobs])

    test_out = outcomes[is_test]
    test_errors = int(((test_out >> 1) != (test_out & 1)).sum())
    s_observed = test_errors / cfg.m

    key_out = outcomes[~is_test]
    alice, bob = key_out // 3, key_out % 3
    discard = bob == 2
    keep = ~discard
    raw_a, raw_b = alice[keep], bob[keep]
    accepted = int(keep.sum())
    errors = int((raw_a != raw_b).sum())
    aborted = s_observed > cfg.q_max or accepted < cfg.n0_min
    return Transcript(
        t=t,
        s_observed=s_observed,
        d=BitString.from_bits(discard.astype(np.uint8)),
        aborted=aborted,
        raw_key_a=BitString.from_bits(raw_a.astype(np.uint8)),
        raw_key_b=BitString.from_bits(raw_b.astype(np.uint8)),
        accepted=accepted,
        errors=errors,
        test_errors=test_errors,
    )


def run_protocol_trace(cfg: SimConfig, workers: Optional[int] = None) -> Transcript:
    """One seeded run: sampling on a uniform size-m subset, filtering, abort decision, raw keys.

    Alice has no filter (her discard register is all zero), so the combined
    discard flag is Bob's inconclusive outcome.
    """
    return _run(cfg, 0, workers)


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    count: int

    @classmethod
    def binomial(cls, hits: int, count: int) -> "Estimate":
        if count <= 0:
            raise ValueError("no trials to estimate from")
        p = hits / count
        return cls(p, math.sqrt(p * (1 - p) / count), count)


@dataclass(frozen=True)
class SimStats:
    p_a: Estimate
    q_z: Estimate
    x_error: Estimate
    aborts: int
    repetitions: int


def estimate_statistics(cfg: SimConfig, repetitions: int = 1, workers: Optional[int] = None) -> SimStats:
    """Pooled acceptance rate, raw-key error rate and X-basis error rate over repetitions."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    key_rounds = accepted = errors = test_rounds = test_errors = aborts = 0
    for rep in range(repetitions):
        tr = _run(cfg, rep, workers)
        key_rounds += tr.key_rounds
        accepted += tr.accepted
        errors += tr.errors
        test_rounds += tr.test_rounds
        test_errors += tr.test_errors
        aborts += tr.aborted
    if accepted == 0:
        raise ValueError("no accepted rounds in any repetition; raw-key error rate undefined")
    return SimStats(
        p_a=Estimate.binomial(accepted, key_rounds),
        q_z=Estimate.binomial(errors, accepted),
        x_error=Estimate.binomial(test_errors, test_rounds),
        aborts=aborts,
        repetitions=repetitions,
    )
