"""Single-qubit linear algebra: bases, operator square roots, filter relations and
Helstrom guessing for binary classical-quantum states.

Vectors are complex arrays of shape ``(2,)``, operators ``(2, 2)`` and
two-qubit states ``(4, 4)`` with Alice's qubit as the first tensor factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

STRUCT_TOL = 1e-12
DERIVED_TOL = 1e-10

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / math.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=complex) / math.sqrt(2)
I2 = np.eye(2, dtype=complex)


class FilterRelationError(ValueError):
    """A filter operator does not map sampling-basis states onto rays of the target basis."""

    def __init__(self, k: int, residual: float, detail: str = "not parallel"):
        super().__init__(f"filter relation fails for basis index k={k}: {detail} (residual {residual:.3e})")
        self.k = k
        self.residual = residual


@dataclass(frozen=True)
class Basis2:
    """Orthonormal qubit basis; ``vectors[i]`` is ``|m_i>``."""

    vectors: tuple[np.ndarray, np.ndarray]

    def __post_init__(self):
        v = tuple(np.asarray(x, dtype=complex).reshape(2) for x in self.vectors)
        object.__setattr__(self, "vectors", v)
        gram = self.matrix.conj().T @ self.matrix
        if not np.allclose(gram, I2, atol=STRUCT_TOL, rtol=0):
            raise ValueError("basis vectors are not orthonormal")

    @property
    def matrix(self) -> np.ndarray:
        """Columns are the basis vectors."""
        return np.column_stack(self.vectors)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.vectors[i]

    def projector(self, i: int) -> np.ndarray:
        return np.outer(self.vectors[i], self.vectors[i].conj())


Z_BASIS = Basis2((KET0, KET1))
X_BASIS = Basis2((KET_PLUS, KET_MINUS))


def rotated_basis(angle: float) -> Basis2:
    """Z basis rotated by ``angle`` about the Y axis of the Bloch sphere."""
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return Basis2((np.array([c, s]), np.array([-s, c])))


def ket_bra(v: np.ndarray) -> np.ndarray:
    return np.outer(v, np.conj(v))


def is_hermitian(a: np.ndarray, tol: float = STRUCT_TOL) -> bool:
    return bool(np.allclose(a, a.conj().T, atol=tol, rtol=0))


def eigvalsh2(a: np.ndarray) -> tuple[float, float]:
    """Eigenvalues (ascending) of a 2x2 Hermitian matrix in closed form."""
    mean = 0.5 * (a[0, 0].real + a[1, 1].real)
    half_gap = math.hypot(0.5 * (a[0, 0].real - a[1, 1].real), abs(a[0, 1]))
    return mean - half_gap, mean + half_gap


def is_psd(a: np.ndarray, tol: float = DERIVED_TOL) -> bool:
    if not is_hermitian(a):
        return False
    lo = eigvalsh2(a)[0] if a.shape == (2, 2) else float(np.linalg.eigvalsh(a)[0])
    return lo >= -tol


def check_density(rho: np.ndarray, tol: float = DERIVED_TOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if not is_psd(rho, tol) or abs(np.trace(rho) - 1) > tol:
        raise ValueError("not a density operator (Hermitian, PSD, unit trace)")
    return rho


def sqrt_psd(a: np.ndarray) -> np.ndarray:
    """Principal square root of a Hermitian PSD matrix by eigendecomposition."""
    a = np.asarray(a, dtype=complex)
    if not is_hermitian(a, DERIVED_TOL):
        raise ValueError("sqrt_psd needs a Hermitian matrix")
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    if w[0] < -DERIVED_TOL:
        raise ValueError(f"matrix has negative eigenvalue {w[0]:.3e}")
    # eigenvalues at rounding level would otherwise turn into sqrt(eps) noise
    w = np.where(w > 8 * np.finfo(float).eps * max(1.0, abs(w[-1])), w, 0.0)
    root = (v * np.sqrt(w)) @ v.conj().T
    return 0.5 * (root + root.conj().T)


def overlap_c_bits(mtilde: Basis2, key: Basis2) -> float:
    """``-log2 max_{i,j} |<mtilde_i|key_j>|^2``: one bit for mutually unbiased bases."""
    overlaps = np.abs(mtilde.matrix.conj().T @ key.matrix) ** 2
    return -math.log2(min(1.0, float(overlaps.max())))


def verify_filter_relation(
    f: np.ndarray, m: Basis2, mtilde: Basis2, tol: float = DERIVED_TOL
) -> np.ndarray:
    """Check ``F|m_k> = lambda_k |mtilde_k>`` for k = 0, 1 and return the ``lambda_k``.

    ``|lambda_k|^2`` is the probability that the filter outcome ``F`` fires on
    ``|m_k>``.  Raises :class:`FilterRelationError` naming the first failing k.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    lams = np.empty(2, dtype=complex)
    for k in range(2):
        image = f @ m[k]
        lam = np.vdot(mtilde[k], image)
        residual = float(np.linalg.norm(image - lam * mtilde[k]))
        if residual > tol:
            raise FilterRelationError(k, residual)
        if abs(lam) ** 2 > 1 + tol:
            raise FilterRelationError(k, residual, f"|lambda|^2 = {abs(lam) ** 2:.6g} exceeds 1")
        lams[k] = lam
    return lams


def trace_norm2(a: np.ndarray) -> float:
    lo, hi = eigvalsh2(a)
    return abs(lo) + abs(hi)


def helstrom_min_entropy(p0: float, rho0: np.ndarray, p1: float, rho1: np.ndarray) -> float:
    """Min-entropy of a bit given a qubit, from the optimal (Helstrom) guess."""
    if p0 < 0 or p1 < 0 or abs(p0 + p1 - 1) > STRUCT_TOL:
        raise ValueError("priors must be nonnegative and sum to 1")
    rho0, rho1 = check_density(rho0), check_density(rho1)
    p_guess = 0.5 * (1 + trace_norm2(p0 * rho0 - p1 * rho1))
    return max(0.0, -math.log2(min(1.0, p_guess)))


@dataclass(frozen=True)
class EntropyCheck:
    lhs: float
    rhs: float
    holds: bool


def entropy_desk_check(
    j_size: int,
    e_states: Sequence[np.ndarray],
    m: Basis2,
    amplitudes: Sequence[complex] | None = None,
    measure: Basis2 = Z_BASIS,
) -> EntropyCheck:
    """One-qubit check of ``H_min(N|E) >= c - log2|J|``.

    Builds ``sum_{a in J} alpha_a |m_a>|E_a>`` with ``J = {0}`` or ``{0, 1}``,
    measures the first qubit in ``measure`` and compares the exact Helstrom
    min-entropy with ``c_bits(measure, m) - log2|J|``.
    """
    if j_size not in (1, 2):
        raise ValueError("only |J| = 1 or 2 is supported by the exact binary evaluation")
    if len(e_states) != j_size:
        raise ValueError("need one environment state per element of J")
    alphas = np.ones(j_size, dtype=complex) if amplitudes is None else np.asarray(amplitudes, dtype=complex)
    psi = sum(alphas[a] * np.kron(m[a], np.asarray(e_states[a], dtype=complex)) for a in range(j_size))
    norm = np.linalg.norm(psi)
    if norm < STRUCT_TOL:
        raise ValueError("state vanishes")
    psi = (psi / norm).reshape(2, 2)

    probs, conds = [], []
    for z in range(2):
        e_vec = measure[z].conj() @ psi
        p = float(np.vdot(e_vec, e_vec).real)
        probs.append(p)
        conds.append(ket_bra(e_vec) / p if p > STRUCT_TOL else I2 / 2)
    total = sum(probs)
    lhs = helstrom_min_entropy(probs[0] / total, conds[0], probs[1] / total, conds[1])
    rhs = overlap_c_bits(measure, m) - math.log2(j_size)
    return EntropyCheck(lhs, rhs, lhs >= rhs - 1e-9)
