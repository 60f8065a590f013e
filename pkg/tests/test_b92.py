import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from filterkey.b92 import (
    B92Params,
    POVMError,
    acceptance_prob,
    acceptance_prob_born,
    channel_state,
    depolarize,
    dual_states,
    filter_ops,
    filter_ops_closed_form,
    key_error,
    key_error_born,
    key_outcome_probs,
    povm,
    resolve_x,
    signal_states,
    source_state,
    x_error_born,
    xbasis_outcome_probs,
)
from filterkey.qubit import I2, KET0, KET1, KET_MINUS, KET_PLUS, X_BASIS, ket_bra, verify_filter_relation

thetas = st.floats(0.01, math.pi / 2)


def grid():
    for theta in np.linspace(0.05, math.pi / 2, 20):
        for x in np.linspace(0.1, 1.0, 10):
            yield float(theta), float(x)


def test_resolve_x():
    assert resolve_x("ideal", 1.0) == 1.0
    assert resolve_x("practical", math.pi / 3) == pytest.approx(0.75)
    assert resolve_x("0.5", 1.0) == 0.5


@pytest.mark.parametrize("kwargs", [dict(theta=0.0), dict(theta=2.0), dict(theta=1.0, x=1.2), dict(theta=1.0, x=0.0), dict(theta=1.0, Q=0.6)])
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        B92Params(**kwargs)


def test_params_derived():
    p = B92Params(math.pi / 3)
    assert p.alpha**2 + p.beta**2 == pytest.approx(1.0)
    assert p.p == pytest.approx(2 / 3)


def test_signal_states():
    phi0, phi1 = signal_states(math.pi / 2)
    assert np.allclose(phi0, KET0) and np.allclose(phi1, KET1)
    phi0, phi1 = signal_states(1e-9)
    assert np.allclose(phi0, KET_PLUS) and np.allclose(phi1, KET_PLUS)


@given(thetas)
def test_signal_overlap_and_duals(theta):
    phi = signal_states(theta)
    bar = dual_states(theta)
    assert np.vdot(phi[0], phi[1]).real == pytest.approx(math.cos(theta), abs=1e-12)
    for j in range(2):
        assert abs(np.vdot(bar[j], phi[j])) <= 1e-12


def test_povm_grid_complete_and_positive():
    count = 0
    for theta, x in grid():
        m0, m1, mq = povm(theta, x)
        assert np.allclose(m0 + m1 + mq, I2, atol=1e-14, rtol=0)
        for op in (m0, m1, mq):
            assert np.linalg.eigvalsh(op).min() >= -1e-10
        count += 1
    assert count >= 200


def test_povm_complete_at_right_angle():
    _, _, mq = povm(math.pi / 2, 1.0)
    assert np.allclose(mq, 0, atol=1e-14)


def test_povm_error_names_eigenvalue():
    with pytest.raises(POVMError, match=r"M\? has negative eigenvalue -0\.44"):
        povm(math.pi / 2, 1.2)


def test_filter_ops_grid():
    for theta, x in grid():
        f0, f1 = filter_ops(theta, x)
        assert np.allclose(f0, filter_ops_closed_form(theta, x), atol=1e-10, rtol=0)
        lam0 = verify_filter_relation(f0, X_BASIS, X_BASIS)
        verify_filter_relation(f1, X_BASIS, X_BASIS)
        assert abs(lam0[1]) ** 2 == pytest.approx(x**2, abs=1e-10)


def test_filter_ops_examples():
    f0, _ = filter_ops(math.pi / 3, 1.0)
    lam = verify_filter_relation(f0, X_BASIS, X_BASIS)
    assert abs(lam[0]) == pytest.approx(1 / math.sqrt(3), abs=1e-10)
    assert abs(lam[1]) == pytest.approx(1.0, abs=1e-10)
    f0, f1 = filter_ops(math.pi / 2, 1.0)
    assert np.allclose(f0, I2, atol=1e-12) and np.allclose(f1, 0, atol=1e-12)


@given(thetas)
def test_source_state(theta):
    rho = source_state(theta)
    phi0, phi1 = signal_states(theta)
    psi = (np.kron(KET0, phi0) + np.kron(KET1, phi1)) / math.sqrt(2)
    assert np.linalg.norm(rho - np.outer(psi, psi.conj())) <= 1e-12
    schmidt = math.cos(theta / 2) * np.kron(KET_PLUS, KET_PLUS) + math.sin(theta / 2) * np.kron(KET_MINUS, KET_MINUS)
    assert abs(abs(np.vdot(schmidt, psi)) - 1.0) <= 1e-12


def test_source_state_max_entangled():
    bell = (np.kron(KET_PLUS, KET_PLUS) + np.kron(KET_MINUS, KET_MINUS)) / math.sqrt(2)
    assert np.allclose(source_state(math.pi / 2), ket_bra(bell), atol=1e-12)


@given(thetas)
def test_source_xbasis_distribution(theta):
    probs = xbasis_outcome_probs(B92Params(theta, 1.0, 0.0))
    assert probs[0, 0] == pytest.approx(math.cos(theta / 2) ** 2, abs=1e-12)
    assert probs[1, 1] == pytest.approx(math.sin(theta / 2) ** 2, abs=1e-12)
    assert probs[0, 1] == pytest.approx(0.0, abs=1e-12) and probs[1, 0] == pytest.approx(0.0, abs=1e-12)


@given(st.floats(0, 0.5), thetas)
def test_depolarize(q, theta):
    plus = ket_bra(KET_PLUS)
    out = depolarize(plus, q)
    assert np.trace(out).real == pytest.approx(1.0, abs=1e-14)
    assert np.vdot(KET_MINUS, out @ KET_MINUS).real == pytest.approx(q, abs=1e-14)
    rho4 = depolarize(source_state(theta), q)
    assert np.trace(rho4).real == pytest.approx(1.0, abs=1e-14)
    assert x_error_born(B92Params(theta, 1.0, q)) == pytest.approx(q, abs=1e-12)


def test_depolarize_limits():
    rho = ket_bra(KET0)
    assert np.allclose(depolarize(rho, 0.0), rho)
    assert np.allclose(depolarize(rho, 0.5), I2 / 2)
    with pytest.raises(ValueError):
        depolarize(rho, 0.6)


@pytest.mark.parametrize("q", [0.0, 0.02, 0.3])
def test_acceptance_examples(q):
    assert acceptance_prob(B92Params(math.pi / 2, 1.0, q)) == pytest.approx(1.0, abs=1e-12)
    assert key_error(B92Params(math.pi / 2, 1.0, q)) == pytest.approx(q, abs=1e-12)


def test_acceptance_pi3():
    assert acceptance_prob(B92Params(math.pi / 3, 1.0, 0.0)) == pytest.approx(0.5, abs=1e-12)
    p = B92Params(math.pi / 3, 1.0, 0.02)
    assert acceptance_prob(p) == pytest.approx(0.5066666666666667, abs=1e-9)
    assert key_error(p) == pytest.approx(0.0263, abs=1e-4)
    assert key_error(B92Params(math.pi / 3, 0.5, 0.0)) == 0.0


def test_born_agreement_grid():
    for theta in np.linspace(0.05, math.pi / 2, 10):
        for x in np.linspace(0.2, 1.0, 5):
            for q in (0.0, 0.01, 0.05, 0.11):
                p = B92Params(float(theta), float(x), q)
                assert abs(acceptance_prob(p, cross_check=False) - acceptance_prob_born(p)) <= 1e-12
                assert abs(key_error(p) - key_error_born(p)) <= 1e-12


@given(thetas, st.floats(0.05, 1.0), st.floats(0, 0.5))
def test_outcome_tables_normalized(theta, x, q):
    p = B92Params(theta, x, q)
    assert key_outcome_probs(p).sum() == pytest.approx(1.0, abs=1e-12)
    assert xbasis_outcome_probs(p).sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(key_outcome_probs(p) >= -1e-15)
    rho = channel_state(p)
    assert np.allclose(rho, rho.conj().T, atol=1e-14)
