import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from filterkey.b92 import B92Params, acceptance_prob, key_error
from filterkey.sim import SimConfig, estimate_statistics, run_protocol_trace


def test_noiseless_complete_run():
    cfg = SimConfig(100_000, 20_000, B92Params(math.pi / 2, 1.0, 0.0), q_max=0.01, n0_min=80_000, seed=4)
    tr = run_protocol_trace(cfg)
    assert not tr.aborted
    assert tr.test_errors == 0 and tr.errors == 0
    assert tr.accepted == tr.key_rounds == 80_000
    assert tr.d.count(1) == 0


def test_transcript_shapes():
    cfg = SimConfig(50_000, 10_000, B92Params(math.pi / 3, 0.9, 0.03), seed=1)
    tr = run_protocol_trace(cfg)
    assert tr.test_rounds == 10_000 and tr.key_rounds == 40_000
    assert len(tr.raw_key_a) == len(tr.raw_key_b) == tr.d.count(0) == tr.accepted
    assert tr.errors == int((tr.raw_key_a ^ tr.raw_key_b).count(1))
    assert np.all(np.diff(tr.t) > 0)
    assert tr.s_observed == tr.test_errors / cfg.m


def test_same_seed_identical():
    cfg = SimConfig(200_000, 50_000, B92Params(math.pi / 3, 1.0, 0.02), seed=9)
    a, b = run_protocol_trace(cfg), run_protocol_trace(cfg, workers=2)
    assert np.array_equal(a.t, b.t)
    assert (a.d, a.raw_key_a, a.raw_key_b, a.s_observed) == (b.d, b.raw_key_a, b.raw_key_b, b.s_observed)


def test_different_seeds_differ():
    p = B92Params(math.pi / 3, 1.0, 0.02)
    a = run_protocol_trace(SimConfig(20_000, 5_000, p, seed=1))
    b = run_protocol_trace(SimConfig(20_000, 5_000, p, seed=2))
    assert a.d != b.d


def test_heavy_noise_aborts():
    p = B92Params(math.pi / 3, 1.0, 0.25)
    aborts = sum(run_protocol_trace(SimConfig(4_000, 1_000, p, q_max=0.01, seed=s)).aborted for s in range(100))
    assert aborts / 100 > 0.99


@settings(max_examples=30)
@given(st.integers(0, 10**6), st.floats(0.0, 0.5), st.floats(0.0, 0.3), st.integers(0, 3000))
def test_abort_semantics(seed, q_max, q, n0_min):
    cfg = SimConfig(4_000, 1_000, B92Params(math.pi / 3, 1.0, q), q_max=q_max, n0_min=n0_min, seed=seed)
    tr = run_protocol_trace(cfg)
    assert tr.aborted == (tr.s_observed > q_max or tr.accepted < n0_min)


@pytest.mark.parametrize(
    "kwargs",
    [dict(rounds=10, m=5), dict(rounds=10, m=0), dict(delta=0.0), dict(q_max=1.5), dict(n0_min=10**6), dict(seed=-1)],
)
def test_config_validation(kwargs):
    base = dict(rounds=1000, m=100, params=B92Params(1.0))
    base.update(kwargs)
    with pytest.raises(ValueError):
        SimConfig(**base)


def test_perfect_acceptance_exact():
    st_ = estimate_statistics(SimConfig(1_333_334, 333_334, B92Params(math.pi / 2, 1.0, 0.0), seed=2))
    assert st_.p_a.value == 1.0 and st_.q_z.value == 0.0


@pytest.mark.parametrize("label", ["ideal", "practical"])
def test_statistics_within_4_sigma(label):
    params = B92Params.make(math.pi / 3, label, 0.02)
    st_ = estimate_statistics(SimConfig(400_000, 100_000, params, seed=5), repetitions=2)
    for est, expect in ((st_.p_a, acceptance_prob(params)), (st_.q_z, key_error(params)), (st_.x_error, 0.02)):
        sigma = math.sqrt(expect * (1 - expect) / est.count)
        assert abs(est.value - expect) <= 4 * sigma


def test_no_accepted_rounds_raises(monkeypatch):
    import filterkey.sim as sim

    monkeypatch.setattr(sim, "key_outcome_probs", lambda p: np.array([[0, 0, 0.5], [0, 0, 0.5]]))
    with pytest.raises(ValueError):
        estimate_statistics(SimConfig(1000, 100, B92Params(1.0), seed=0))


def test_probabilities_must_sum_to_one(monkeypatch):
    import filterkey.sim as sim

    monkeypatch.setattr(sim, "key_outcome_probs", lambda p: np.array([[0.5, 0, 0], [0, 0.4, 0]]))
    with pytest.raises(AssertionError):
        run_protocol_trace(SimConfig(1000, 100, B92Params(1.0), seed=0))
