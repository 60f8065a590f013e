import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from filterkey.bitmath import BitString
from filterkey.sampling import (
    SamplingSpec,
    delta_for_epsilon,
    epsilon_cl,
    estimate_failure_prob,
    exhaustive_failure_prob,
    good_word_test,
    security_from_epsilon_cl,
)

B = BitString.from_str


def word_with_weight(n_total, w):
    return BitString.from_bits([1] * w + [0] * (n_total - w))


@pytest.mark.parametrize(
    "qa, qb, t, delta, expected",
    [
        ("0110", "0110", [0, 1], 0.01, True),
        ("1111", "0000", [0, 1], 0.1, True),
        ("1100", "0000", [0, 1], 0.5, False),
        ("1100", "0000", [0, 2], 0.0 + 1e-9, True),
    ],
)
def test_good_word_examples(qa, qb, t, delta, expected):
    assert good_word_test(B(qa), B(qb), t, delta) is expected


@pytest.mark.parametrize("t", [[], [0, 1, 2, 3], [0, 0], [7]])
def test_good_word_bad_subsets(t):
    with pytest.raises(ValueError):
        good_word_test(B("1100"), B("0000"), t, 0.1)


def test_sampling_spec_validation():
    assert SamplingSpec(10, 4, 0.1).n == 6
    for args in [(10, 5, 0.1), (10, 0, 0.1), (10, 2, 0.0)]:
        with pytest.raises(ValueError):
            SamplingSpec(*args)


def test_epsilon_cl_examples():
    expected = 2 * math.exp(-0.01 * 100 * 200 / 202)
    assert epsilon_cl(100, 100, 0.1) == pytest.approx(expected, rel=1e-14)
    assert epsilon_cl(100, 100, 0.1) == pytest.approx(0.74308, abs=1e-5)
    assert epsilon_cl(100, 100, 10.0) == pytest.approx(0.0, abs=1e-300)
    assert epsilon_cl(10, 10, 1e-4) == 1.0


@pytest.mark.parametrize("args", [(0, 5, 0.1), (5, 0, 0.1), (5, 5, 0.0), (5, 5, -1.0)])
def test_epsilon_cl_errors(args):
    with pytest.raises(ValueError):
        epsilon_cl(*args)


def test_delta_for_epsilon_example():
    d = delta_for_epsilon(5000, 5000, 1e-6)
    assert d == pytest.approx(math.sqrt(10002 / (5000 * 10000) * math.log(5e13)), rel=1e-14)
    assert d == pytest.approx(0.0794, abs=1e-4)


@given(st.integers(1, 10**6), st.integers(1, 10**6), st.floats(1e-12, 0.99))
def test_delta_roundtrip(m, n, eps):
    d = delta_for_epsilon(m, n, eps)
    eps_cl = epsilon_cl(m, n, d)
    if eps_cl < 1.0:
        assert security_from_epsilon_cl(eps_cl) == pytest.approx(eps, rel=1e-12)


@pytest.mark.parametrize("eps", [1e-200, 5e-324])
def test_delta_for_tiny_epsilon(eps):
    d = delta_for_epsilon(1000, 3000, eps)
    assert math.isfinite(d) and d > 0
    assert d == pytest.approx(math.sqrt(4002 / (1000 * 4000) * (math.log(50) - 2 * math.log(eps))), rel=1e-14)


def test_delta_decreases_with_size():
    ds = [delta_for_epsilon(k, k, 1e-6) for k in (10, 100, 10**3, 10**4, 10**6)]
    assert all(a > b for a, b in zip(ds, ds[1:]))


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.1, 2.0])
def test_delta_for_epsilon_domain(eps):
    with pytest.raises(ValueError):
        delta_for_epsilon(10, 10, eps)


@pytest.mark.parametrize("eps_cl, sec", [(0.0, 0.0), (1e-14, 5e-7), (0.25, 1.0)])
def test_security_from_epsilon_cl(eps_cl, sec):
    assert security_from_epsilon_cl(eps_cl) == pytest.approx(sec, rel=1e-12)


@given(st.integers(1, 500), st.integers(1, 500), st.floats(0.01, 1.0), st.floats(0.001, 0.5))
def test_epsilon_cl_monotone(m, n, delta, step):
    assert epsilon_cl(m, n, delta + step) <= epsilon_cl(m, n, delta)
    assert epsilon_cl(m + 1, n, delta) <= epsilon_cl(m, n, delta)


def test_epsilon_cl_strictly_decreasing_below_cap():
    vals = [epsilon_cl(200, 600, d) for d in (0.1, 0.12, 0.15, 0.2)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    vals = [epsilon_cl(m, 600, 0.15) for m in (100, 150, 200, 250)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_exhaustive_hand_example():
    est = exhaustive_failure_prob(B("0000"), B("1100"), 2, 0.5)
    assert est.prob == pytest.approx(2 / 6) and est.trials == 6 and est.exhaustive


def test_identical_words_never_fail():
    q = BitString.from_bits(np.arange(40) % 3 == 0)
    assert estimate_failure_prob(q, q, 10, 0.01, 2000, seed=1).prob == 0.0
    assert exhaustive_failure_prob(q.take(range(12)), q.take(range(12)), 3, 0.01).prob == 0.0


@pytest.mark.parametrize("n_total", [8, 16])
@pytest.mark.parametrize("delta", [0.1, 0.25])
def test_exhaustive_below_bound(n_total, delta):
    m = n_total // 4
    bound = epsilon_cl(m, n_total - m, delta)
    for w in range(n_total + 1):
        est = exhaustive_failure_prob(BitString.zeros(n_total), word_with_weight(n_total, w), m, delta)
        assert est.prob <= bound


@pytest.mark.parametrize("w", [0, 6, 12, 20])
def test_monte_carlo_below_bound_n24(w):
    m, delta = 6, 0.25
    est = estimate_failure_prob(BitString.zeros(24), word_with_weight(24, w), m, delta, 20_000, seed=w)
    assert est.prob <= epsilon_cl(m, 18, delta) + 4 * est.stderr


@pytest.mark.slow
@pytest.mark.parametrize("w", [4, 8])
def test_exhaustive_matches_monte_carlo(w):
    qa, qb = BitString.zeros(16), word_with_weight(16, w)
    exact = exhaustive_failure_prob(qa, qb, 4, 0.1).prob
    est = estimate_failure_prob(qa, qb, 4, 0.1, 100_000, seed=11)
    assert abs(est.prob - exact) <= 4 * max(est.stderr, math.sqrt(exact * (1 - exact) / est.trials))


def test_monte_carlo_independent_of_workers():
    qa, qb = BitString.zeros(300), word_with_weight(300, 90)
    a = estimate_failure_prob(qa, qb, 60, 0.05, 3000, seed=5, workers=1)
    b = estimate_failure_prob(qa, qb, 60, 0.05, 3000, seed=5, workers=2)
    assert a == b


def test_exhaustive_size_limit():
    with pytest.raises(ValueError):
        exhaustive_failure_prob(BitString.zeros(21), BitString.zeros(21), 5, 0.1)


@pytest.mark.parametrize("m, trials", [(0, 10), (6, 10), (2, 0)])
def test_estimate_argument_errors(m, trials):
    with pytest.raises(ValueError):
        estimate_failure_prob(BitString.zeros(10), BitString.zeros(10), m, 0.1, trials, seed=0)
