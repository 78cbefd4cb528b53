"""Algebra of qubit Pauli maps: mixtures of conjugations X -> s_i X s_i.

A map is stored canonically by its Bloch eigenvalues ``(l1, l2, l3)``,
the factors it applies to the s1, s2, s3 components of its input. Mixture
weights over the four conjugations are an equivalent representation
related by the extended sign matrix, which squares to four times the
identity and is therefore its own inverse up to that factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import kron, purify

SIGMA = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

DEFAULT_TOL = 1e-10


def pauli_sign(k: int, i: int) -> int:
    """Sign in s_i s_k s_i = sign * s_k, for axis k in 1..3 and label i in 0..3."""
    if k not in (1, 2, 3):
        raise ValueError(f"axis k must be 1..3, got {k}")
    if i not in (0, 1, 2, 3):
        raise ValueError(f"label i must be 0..3, got {i}")
    return 1 if i in (0, k) else -1


def ext_sign_matrix() -> np.ndarray:
    """4x4 extended sign matrix S with S[k, i] = pauli_sign(k, i) and S[0, :] = 1.

    Symmetric, and S @ S = 4 * I, so it converts weights to Bloch
    eigenvalues and back.
    """
    S = np.ones((4, 4))
    for k in (1, 2, 3):
        for i in range(4):
            S[k, i] = pauli_sign(k, i)
    return S


def eigenvalues_from_weights(q) -> np.ndarray:
    """Bloch eigenvalues l_k = sum_i q_i s(k, i) of the mixture q."""
    q = np.asarray(q, dtype=float).ravel()
    if q.shape != (4,):
        raise ValueError(f"expected 4 weights, got shape {q.shape}")
    if abs(q.sum() - 1.0) > 1e-12:
        raise ValueError(f"weights must sum to 1, got {q.sum():.15g}")
    return ext_sign_matrix()[1:] @ q


def weights_from_eigenvalues(bloch) -> np.ndarray:
    """Mixture weights of the Pauli map with the given Bloch eigenvalues."""
    bloch = np.asarray(bloch, dtype=float).ravel()
    if bloch.shape != (3,):
        raise ValueError(f"expected 3 eigenvalues, got shape {bloch.shape}")
    lam_ext = np.concatenate(([1.0], bloch))
    return ext_sign_matrix() @ lam_ext / 4.0


@dataclass(frozen=True)
class PauliMap:
    """Unital qubit map diagonal in the Pauli basis."""

    bloch: tuple[float, float, float]

    @staticmethod
    def from_bloch(bloch) -> "PauliMap":
        b = np.asarray(bloch, dtype=float).ravel()
        if b.shape != (3,):
            raise ValueError(f"expected 3 Bloch eigenvalues, got shape {b.shape}")
        return PauliMap(bloch=(float(b[0]), float(b[1]), float(b[2])))

    @staticmethod
    def from_weights(q) -> "PauliMap":
        return PauliMap.from_bloch(eigenvalues_from_weights(q))

    @staticmethod
    def identity() -> "PauliMap":
        return PauliMap(bloch=(1.0, 1.0, 1.0))

    @property
    def weights(self) -> np.ndarray:
        return weights_from_eigenvalues(self.bloch)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Apply the map to a 2x2 matrix via its Pauli decomposition."""
        X = np.asarray(X, dtype=complex)
        if X.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {X.shape}")
        out = 0.5 * X.trace() * SIGMA[0]
        for k in (1, 2, 3):
            coeff = 0.5 * (SIGMA[k] @ X).trace()
            out = out + self.bloch[k - 1] * coeff * SIGMA[k]
        return out

    def compose(self, other: "PauliMap") -> "PauliMap":
        """self after other; Bloch eigenvalues multiply componentwise."""
        return PauliMap.from_bloch(np.asarray(self.bloch) * np.asarray(other.bloch))

    def choi(self) -> np.ndarray:
        """Choi matrix (map x id)[|psi+><psi+|]; PSD iff the map is CP."""
        psi = purify(np.eye(2, dtype=complex) / 2)
        bell = np.outer(psi, psi.conj())
        C = np.zeros((4, 4), dtype=complex)
        for i, w in enumerate(self.weights):
            K = kron(SIGMA[i], SIGMA[0])
            C += w * (K @ bell @ K.conj().T)
        return C

    def cp_margin(self) -> float:
        """Smallest mixture weight; nonnegative iff the map is CP."""
        return float(self.weights.min())

    def positivity_margin(self) -> float:
        """1 - max |Bloch eigenvalue|; nonnegative iff the map is positive."""
        return float(1.0 - np.abs(self.bloch).max())


def compose(A: PauliMap, B: PauliMap) -> PauliMap:
    return A.compose(B)


def apply_map(pm: PauliMap, X: np.ndarray) -> np.ndarray:
    return pm.apply(X)


def choi(pm: PauliMap) -> np.ndarray:
    return pm.choi()


def is_cp(pm: PauliMap, tol: float = DEFAULT_TOL) -> bool:
    return pm.cp_margin() >= -tol


def is_positive(pm: PauliMap, tol: float = DEFAULT_TOL) -> bool:
    return pm.positivity_margin() >= -tol


def is_marginal(margin: float, tol: float = DEFAULT_TOL) -> bool:
    """True when a verdict margin sits inside the tolerance band around 0."""
    return abs(margin) <= tol
