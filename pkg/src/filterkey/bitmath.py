"""Bit strings, binary entropy and Hamming-ball volumes."""

from __future__ import annotations

import math
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.special import gammaln, logsumexp

_LN2 = math.log(2.0)


class BitString:
    """Immutable fixed-length bit word, stored packed (8 bits per byte, MSB first).

    Position 0 is the leftmost character of the textual form, so
    ``BitString.from_str("01011")[1] == 1``.
    """

    __slots__ = ("_packed", "_len")

    def __init__(self, packed: np.ndarray, length: int):
        packed = np.asarray(packed, dtype=np.uint8)
        if length < 0 or packed.size != (length + 7) // 8:
            raise ValueError(f"packed buffer of {packed.size} bytes does not hold {length} bits")
        packed = packed.copy()
        # keep padding bits zero so that equality and popcount stay exact
        if length % 8:
            packed[-1] &= np.uint8((0xFF << (8 - length % 8)) & 0xFF)
        packed.flags.writeable = False
        self._packed = packed
        self._len = length

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitString":
        arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits)
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ValueError("bit strings may only contain 0 and 1")
        arr = arr.astype(np.uint8).ravel()
        return cls(np.packbits(arr), arr.size)

    @classmethod
    def from_str(cls, text: str) -> "BitString":
        if set(text) - {"0", "1"}:
            raise ValueError(f"not a bit string: {text!r}")
        return cls.from_bits([int(ch) for ch in text])

    @classmethod
    def zeros(cls, length: int) -> "BitString":
        return cls(np.zeros((length + 7) // 8, dtype=np.uint8), length)

    def __len__(self) -> int:
        return self._len

    def __getitem__(self, i: int) -> int:
        if not -self._len <= i < self._len:
            raise IndexError(i)
        i %= self._len
        return int((self._packed[i >> 3] >> (7 - (i & 7))) & 1)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitString):
            return NotImplemented
        return self._len == other._len and np.array_equal(self._packed, other._packed)

    def __hash__(self) -> int:
        return hash((self._len, self._packed.tobytes()))

    def __str__(self) -> str:
        return "".join("1" if b else "0" for b in self.to_array())

    def __repr__(self) -> str:
        if self._len <= 64:
            return f"BitString('{self}')"
        return f"BitString(<{self._len} bits, weight {self.count(1)}>)"

    def __xor__(self, other: "BitString") -> "BitString":
        return xor(self, other)

    @property
    def packed(self) -> np.ndarray:
        return self._packed

    def to_array(self) -> np.ndarray:
        """Unpacked ``uint8`` array of length ``len(self)``."""
        return np.unpackbits(self._packed, count=self._len)

    def count(self, j: int) -> int:
        """Number of occurrences of bit value ``j``."""
        ones = int(np.bitwise_count(self._packed).sum())
        if j == 1:
            return ones
        if j == 0:
            return self._len - ones
        raise ValueError("j must be 0 or 1")

    def take(self, indices: Sequence[int] | np.ndarray) -> "BitString":
        """Substring indexed by ``indices`` (the ``q_t`` of a subset ``t``)."""
        return BitString.from_bits(self.to_array()[np.asarray(indices, dtype=np.intp)])

    def drop(self, indices: Sequence[int] | np.ndarray) -> "BitString":
        """Substring on the complement of ``indices`` (``q_{-t}``)."""
        mask = np.ones(self._len, dtype=bool)
        mask[np.asarray(indices, dtype=np.intp)] = False
        return BitString.from_bits(self.to_array()[mask])


def relative_weight(q: BitString) -> float:
    """Fraction of ones in ``q``."""
    if len(q) == 0:
        raise ValueError("relative weight of an empty string is undefined")
    return q.count(1) / len(q)


def xor(a: BitString, b: BitString) -> BitString:
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} != {len(b)}")
    return BitString(np.bitwise_xor(a.packed, b.packed), len(a))


Word = Union[BitString, str, Sequence]


def pi_d(d: BitString, q0: Word, q1: Word) -> Word:
    """Interleave ``q0`` into the zero positions of ``d`` and ``q1`` into its one positions.

    Works on BitStrings (returns a BitString), on ``str`` (returns a ``str``)
    and on generic sequences (returns a list), so ``pi_d(01011, "ab", "cde")``
    gives ``"acbde"``.
    """
    dbits = d.to_array()
    n_zero = int((dbits == 0).sum())
    if len(q0) != n_zero or len(q1) != len(dbits) - n_zero:
        raise ValueError(
            f"pi_d expects {n_zero} and {len(dbits) - n_zero} symbols, "
            f"got {len(q0)} and {len(q1)}"
        )
    if isinstance(q0, BitString) and isinstance(q1, BitString):
        out = np.empty(len(dbits), dtype=np.uint8)
        out[dbits == 0] = q0.to_array()
        out[dbits == 1] = q1.to_array()
        return BitString.from_bits(out)
    it0, it1 = iter(q0), iter(q1)
    merged = [next(it1) if bit else next(it0) for bit in dbits]
    if isinstance(q0, str) and isinstance(q1, str):
        return "".join(merged)
    return merged


def binary_entropy(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary entropy needs 0 <= x <= 1, got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def hamming_ball_log2(n: int, r: int) -> float:
    """Exact log2 of the number of words within Hamming distance ``r`` of a point in {0,1}^n."""
    if r < 0 or n < 0 or r > n:
        raise ValueError(f"need 0 <= r <= n, got n={n}, r={r}")
    if n <= 1000:
        return math.log2(sum(math.comb(n, k) for k in range(r + 1)))
    k = np.arange(r + 1, dtype=np.float64)
    log_binom = gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)
    return float(logsumexp(log_binom)) / _LN2


def entropy_bound_log2(n: int, r: int) -> float:
    """``n h(r/n)`` upper bound on :func:`hamming_ball_log2`; the whole cube once r > n/2."""
    if r < 0 or n < 0 or r > n:
        raise ValueError(f"need 0 <= r <= n, got n={n}, r={r}")
    if n == 0:
        return 0.0
    if 2 * r > n:
        return float(n)
    return n * binary_entropy(r / n)
