"""Entropy penalty of filtered sampling: log2 of the largest set of kept substrings
consistent with an accepted sampling outcome.

For a kept-position pattern ``d`` with ``c0`` zeros, discarded bits ``a``,
partner word ``b`` and observation ``s``, the counted set is every
``q in {0,1}^c0`` whose merged word ``pi_d(q, a)`` has target value within
``delta`` of ``s`` against ``b``.  The penalty is the log2 of the largest such
set over all ``s in [0, s_max]``, ``d``, ``a`` and ``b``.

Three evaluators are provided:

* :func:`gamma_brute` enumerates ``d``, ``b``, ``a`` and ``q`` for any strategy (n <= 14).
* :func:`gamma_hamming_reduced` is exact for the Hamming-XOR strategy and works
  on weight classes only.
* :func:`gamma_hamming_bound` is the closed-form ``c0 h(n (Q + delta) / c0)`` bound.

Empty counted sets are skipped in the maximum; when every cell is empty the
evaluators return ``None`` (a singleton gives ``0.0``).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bitmath import binary_entropy
from .sampling import HAMMING_XOR, HammingXor, within

BRUTE_MAX_N = 14
REDUCED_MAX_N = 4000
_B_CHUNK = 1 << 10


@dataclass(frozen=True)
class GammaQuery:
    n: int
    c0: int
    s_max: float
    delta: float
    strategy: object = field(default=HAMMING_XOR, compare=False)

    def __post_init__(self):
        if not 1 <= self.c0 <= self.n:
            raise ValueError(f"need 1 <= c0 <= n, got c0={self.c0}, n={self.n}")
        if not 0.0 <= self.s_max <= 1.0:
            raise ValueError("s_max must lie in [0, 1]")
        if not self.delta > 0:
            raise ValueError("delta must be positive")


def s_grid(n: int, s_max: float, delta: float) -> np.ndarray:
    """Observation values at which the admissible target window can change.

    Target values are multiples of 1/n, so the set of levels inside
    ``[s - delta, s + delta]`` only changes where ``s = k/n -+ delta``.  Those
    breakpoints plus the interval ends make the maximum over ``[0, s_max]``
    exact.
    """
    levels = np.arange(n + 1) / n
    cand = np.concatenate([[0.0, s_max], levels, levels - delta, levels + delta])
    cand = cand[(cand >= 0.0) & (cand <= s_max)]
    return np.unique(cand)


def _log2_or_none(count: int) -> Optional[float]:
    return math.log2(count) if count > 0 else None


def _level_hist(strategy, x_codes: np.ndarray, b_codes: np.ndarray, n: int):
    """Per-(b, row) histogram of target values over the last axis of ``x_codes``."""
    if isinstance(strategy, HammingXor):
        lvl = np.bitwise_count(np.bitwise_xor(x_codes[None, :, :], b_codes[:, None, None]))
        values = np.arange(n + 1) / n
    else:
        tau = strategy.on_codes(x_codes[None, :, :], b_codes[:, None, None], n)
        values, lvl = np.unique(tau, return_inverse=True)
        lvl = lvl.reshape(tau.shape)
    rows = lvl.shape[0] * lvl.shape[1]
    flat = (np.arange(rows).reshape(lvl.shape[0], lvl.shape[1], 1) * len(values) + lvl).ravel()
    hist = np.bincount(flat, minlength=rows * len(values)).reshape(rows, len(values))
    return hist, values


def gamma_brute_many(
    n: int,
    c0: int,
    windows: Sequence[tuple[float, float]],
    strategy=HAMMING_XOR,
) -> list[Optional[float]]:
    """Brute-force penalty for several ``(s_max, delta)`` pairs sharing ``n`` and ``c0``."""
    if n > BRUTE_MAX_N:
        raise ValueError(
            f"full enumeration is limited to n <= {BRUTE_MAX_N}; "
            "use gamma_hamming_reduced or gamma_hamming_bound"
        )
    if not 1 <= c0 <= n:
        raise ValueError(f"need 1 <= c0 <= n, got c0={c0}, n={n}")
    weights = 1 << np.arange(n - 1, -1, -1, dtype=np.int64)
    q_bits = ((np.arange(1 << c0)[:, None] >> np.arange(c0 - 1, -1, -1)) & 1).astype(np.int64)
    a_len = n - c0
    a_bits = ((np.arange(1 << a_len)[:, None] >> np.arange(a_len - 1, -1, -1)) & 1).astype(np.int64)
    all_b = np.arange(1 << n, dtype=np.int64)
    grids = [s_grid(n, s_max, delta) for s_max, delta in windows]
    best = [0] * len(windows)

    for ones in itertools.combinations(range(n), a_len):
        is_one = np.zeros(n, dtype=bool)
        is_one[list(ones)] = True
        # x[a, q] = code of pi_d(q, a)
        x_codes = (a_bits @ weights[is_one])[:, None] + (q_bits @ weights[~is_one])[None, :]
        for start in range(0, all_b.size, _B_CHUNK):
            hist, values = _level_hist(strategy, x_codes, all_b[start:start + _B_CHUNK], n)
            for w, ((_, delta), grid) in enumerate(zip(windows, grids)):
                admissible = within(grid[:, None], values[None, :], delta)
                best[w] = max(best[w], int((hist @ admissible.T.astype(np.int64)).max()))
    return [_log2_or_none(c) for c in best]


def gamma_brute(query: GammaQuery) -> Optional[float]:
    return gamma_brute_many(query.n, query.c0, [(query.s_max, query.delta)], query.strategy)[0]


def _binom_prefix(c0: int) -> list[int]:
    prefix, acc = [0], 0
    for k in range(c0 + 1):
        acc += math.comb(c0, k)
        prefix.append(acc)
    return prefix


def gamma_hamming_reduced(query: GammaQuery) -> Optional[float]:
    """Exact penalty for the Hamming-XOR strategy via weight classes.

    With ``j = wt(a XOR b_L)`` and ``k = wt(q XOR b_R)`` the target is
    ``(j + k) / n``, so the counted set size is a sum of ``C(c0, k)`` over the
    admissible ``k`` for each ``j``.
    """
    if not isinstance(query.strategy, HammingXor):
        raise ValueError("gamma_hamming_reduced only applies to the Hamming-XOR strategy")
    n, c0 = query.n, query.c0
    if n > REDUCED_MAX_N:
        raise ValueError(f"reduced evaluator is limited to n <= {REDUCED_MAX_N}")
    prefix = _binom_prefix(c0)
    values = np.arange(n + 1) / n
    best = 0
    for s in s_grid(n, query.s_max, query.delta):
        ok = np.flatnonzero(within(s, values, query.delta))
        if ok.size == 0:
            continue
        w_lo, w_hi = int(ok[0]), int(ok[-1])
        for j in range(n - c0 + 1):
            k_lo, k_hi = max(w_lo - j, 0), min(w_hi - j, c0)
            if k_lo <= k_hi:
                count = prefix[k_hi + 1] - prefix[k_lo]
                if count > best:
                    best = count
    return _log2_or_none(best)


def gamma_hamming_bound(n: int, c0: int, q: float, delta: float) -> float:
    """``c0 h(n (q + delta) / c0)``, capped at ``c0`` once the radius passes c0/2."""
    if c0 < 1:
        raise ValueError("c0 must be >= 1")
    r = n / c0 * (q + delta)
    if r >= 0.5:
        return float(c0)
    return c0 * binary_entropy(max(r, 0.0))

