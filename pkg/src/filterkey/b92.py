"""Extended B92: signal states, Bob's three-outcome POVM, filter operators,
entanglement-based source and the depolarizing evaluation model.

Key rounds: Alice measures Z, Bob measures ``{M0, M1, M?}`` and drops ``M?``.
Test rounds: both measure X.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .qubit import (
    DERIVED_TOL,
    I2,
    KET0,
    KET1,
    KET_MINUS,
    KET_PLUS,
    X_BASIS,
    Z_BASIS,
    eigvalsh2,
    ket_bra,
    sqrt_psd,
)

BORN_TOL = 1e-12


class POVMError(ValueError):
    pass


def resolve_x(x: Union[float, str], theta: float) -> float:
    """Device quality: ``"ideal"`` is 1, ``"practical"`` is ``cos^2(theta/2)``."""
    if isinstance(x, str):
        key = x.strip().lower()
        if key == "ideal":
            return 1.0
        if key == "practical":
            return math.cos(theta / 2) ** 2
        return float(key)
    return float(x)


def _check_theta(theta: float) -> None:
    if not 0.0 < theta <= math.pi / 2 + 1e-15:
        raise ValueError(f"theta must lie in (0, pi/2], got {theta}")


@dataclass(frozen=True)
class B92Params:
    theta: float
    x: float = 1.0
    Q: float = 0.0

    def __post_init__(self):
        _check_theta(self.theta)
        if not 0.0 < self.x <= 1.0:
            raise ValueError(f"device quality x must lie in (0, 1], got {self.x}")
        if not 0.0 <= self.Q <= 0.5:
            raise ValueError(f"depolarizing parameter must lie in [0, 1/2], got {self.Q}")
        if 2 * self.p * max(self.alpha, self.beta) ** 2 > 1 + BORN_TOL:
            raise POVMError("POVM is not positive for these parameters")

    @classmethod
    def make(cls, theta: float, x: Union[float, str] = "ideal", Q: float = 0.0) -> "B92Params":
        return cls(theta, resolve_x(x, theta), Q)

    @property
    def alpha(self) -> float:
        return math.cos(self.theta / 2)

    @property
    def beta(self) -> float:
        return math.sin(self.theta / 2)

    @property
    def p(self) -> float:
        return self.x**2 / (2 * self.alpha**2)


def signal_states(theta: float) -> tuple[np.ndarray, np.ndarray]:
    _check_theta(theta)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return c * KET_PLUS + s * KET_MINUS, c * KET_PLUS - s * KET_MINUS


def dual_states(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """``|bar phi_j>`` with ``<bar phi_j|phi_j> = 0``."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return s * KET_PLUS - c * KET_MINUS, s * KET_PLUS + c * KET_MINUS


def povm(theta: float, x: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bob's key-round measurement ``(M0, M1, M?)``; outcome j means "not phi_{1-j}"."""
    _check_theta(theta)
    p = x**2 / (2 * math.cos(theta / 2) ** 2)
    phi = signal_states(theta)
    bar = dual_states(theta)
    for j in range(2):
        if abs(np.vdot(bar[j], phi[j])) > BORN_TOL:
            raise POVMError(f"dual state {j} is not orthogonal to its signal")
    m0 = p * ket_bra(bar[1])
    m1 = p * ket_bra(bar[0])
    mq = I2 - m0 - m1
    for name, op in (("M0", m0), ("M1", m1), ("M?", mq)):
        lo = eigvalsh2(op)[0]
        if lo < -DERIVED_TOL:
            raise POVMError(f"{name} has negative eigenvalue {lo:.6g} (theta={theta}, x={x})")
    return m0, m1, mq


def filter_ops_closed_form(theta: float, x: float) -> np.ndarray:
    p = x**2 / (2 * math.cos(theta / 2) ** 2)
    return math.sqrt(2 * p) * (
        math.sin(theta / 2) * ket_bra(KET_PLUS) + math.cos(theta / 2) * ket_bra(KET_MINUS)
    )


def filter_ops(theta: float, x: float) -> tuple[np.ndarray, np.ndarray]:
    """Accept/discard filter ``(F0, F1) = (sqrt(M0 + M1), sqrt(M?))``."""
    m0, m1, mq = povm(theta, x)
    f0, f1 = sqrt_psd(m0 + m1), sqrt_psd(mq)
    if not np.allclose(f0 @ f0 + f1 @ f1, I2, atol=DERIVED_TOL, rtol=0):
        raise POVMError("filter operators are not complete")
    if not np.allclose(f0, filter_ops_closed_form(theta, x), atol=DERIVED_TOL, rtol=0):
        raise POVMError("accept filter disagrees with its closed form")
    return f0, f1


def source_state(theta: float) -> np.ndarray:
    """Density matrix of ``(|0,phi_0> + |1,phi_1>)/sqrt(2)`` on Alice (first) x Bob."""
    phi0, phi1 = signal_states(theta)
    psi = (np.kron(KET0, phi0) + np.kron(KET1, phi1)) / math.sqrt(2)
    return ket_bra(psi)


def partial_trace_b(rho: np.ndarray) -> np.ndarray:
    return np.einsum("ajbj->ab", rho.reshape(2, 2, 2, 2))


def depolarize(rho: np.ndarray, Q: float) -> np.ndarray:
    """``(1-2Q) rho + 2Q I/2`` on a qubit, or on Bob's qubit of a two-qubit state.

    At ``Q`` the X-basis flip probability of ``|+>`` is exactly ``Q``.
    """
    if not 0.0 <= Q <= 0.5:
        raise ValueError(f"Q must lie in [0, 1/2], got {Q}")
    rho = np.asarray(rho, dtype=complex)
    if rho.shape == (2, 2):
        return (1 - 2 * Q) * rho + Q * np.trace(rho) * I2
    if rho.shape == (4, 4):
        return (1 - 2 * Q) * rho + Q * np.kron(partial_trace_b(rho), I2)
    raise ValueError(f"unsupported operator shape {rho.shape}")


def channel_state(params: B92Params) -> np.ndarray:
    return depolarize(source_state(params.theta), params.Q)


def key_outcome_probs(params: B92Params) -> np.ndarray:
    """Born probabilities ``P[a, b]`` for Alice's Z bit ``a`` and Bob's outcome ``b in (0, 1, ?)``."""
    rho = channel_state(params)
    ops = povm(params.theta, params.x)
    probs = np.empty((2, 3))
    for a in range(2):
        for b, op in enumerate(ops):
            probs[a, b] = np.trace(np.kron(Z_BASIS.projector(a), op) @ rho).real
    return probs


def xbasis_outcome_probs(params: B92Params) -> np.ndarray:
    """Born probabilities of the X-basis pair ``(a, b)``, index 0 for ``+`` and 1 for ``-``."""
    rho = channel_state(params)
    probs = np.empty((2, 2))
    for a in range(2):
        for b in range(2):
            probs[a, b] = np.trace(np.kron(X_BASIS.projector(a), X_BASIS.projector(b)) @ rho).real
    return probs


def acceptance_prob_born(params: B92Params) -> float:
    m0, m1, _ = povm(params.theta, params.x)
    return float(np.trace(np.kron(I2, m0 + m1) @ channel_state(params)).real)


def key_error_born(params: B92Params) -> float:
    probs = key_outcome_probs(params)
    accepted = probs[:, :2].sum()
    if accepted <= 0:
        raise ValueError("no accepted rounds")
    return float((probs[0, 1] + probs[1, 0]) / accepted)


def x_error_born(params: B92Params) -> float:
    probs = xbasis_outcome_probs(params)
    return float(probs[0, 1] + probs[1, 0])


def acceptance_prob(params: B92Params, cross_check: bool = True) -> float:
    """``p_a = 4 p alpha^2 beta^2 (1 - 2Q) + 2 p Q``."""
    a2, b2 = params.alpha**2, params.beta**2
    p_a = 4 * params.p * a2 * b2 * (1 - 2 * params.Q) + 2 * params.p * params.Q
    if cross_check:
        born = acceptance_prob_born(params)
        if abs(p_a - born) > BORN_TOL:
            raise AssertionError(f"acceptance formula {p_a!r} disagrees with Born rule {born!r}")
    return p_a


def key_error(params: B92Params) -> float:
    """Raw-key error rate among accepted rounds, ``p Q / p_a``."""
    p_a = acceptance_prob(params, cross_check=False)
    if p_a <= 0:
        raise ValueError("acceptance probability is zero")
    return params.p * params.Q / p_a
