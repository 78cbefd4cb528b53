"""Dense complex linear algebra used everywhere else: Hermitian
eigendecompositions, entropies, trace norms, tensor products, partial
traces and purifications.

All functions are pure and operate on plain ``numpy`` arrays. Density
matrices are validated, not repaired: eigenvalues in the roundoff window
``[-PSD_WINDOW, 0]`` are clamped to zero, anything more negative raises
:class:`InvariantViolation` so construction bugs do not get silently
smoothed over.
"""

from __future__ import annotations

import numpy as np

# Clamping window for eigenvalue roundoff of nominally PSD matrices.
PSD_WINDOW = 1e-9

LN2 = np.log(2.0)


class InvariantViolation(ValueError):
    """A matrix that should be a (coarse-grained) density matrix is not."""


def _as_square(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    return M


def is_hermitian(M: np.ndarray, tol: float = 1e-10) -> bool:
    M = _as_square(M)
    return bool(np.abs(M - M.conj().T).max() <= tol)


def is_psd(M: np.ndarray, tol: float = PSD_WINDOW) -> bool:
    M = _as_square(M)
    if not is_hermitian(M, max(tol, 1e-10)):
        return False
    return bool(np.linalg.eigvalsh(M).min() >= -tol)


def is_unit_trace(M: np.ndarray, tol: float = 1e-9) -> bool:
    M = _as_square(M)
    return bool(abs(M.trace() - 1.0) <= tol)


def hermitian_eig(M: np.ndarray, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(e, V)`` with eigenvalues ``e`` sorted descending and the
    matching unitary ``V`` (eigenvectors in columns), so that
    ``M = V @ diag(e) @ V.conj().T``. Rejects non-Hermitian input with a
    diagnostic of the asymmetry norm.
    """
    M = _as_square(M)
    asym = np.abs(M - M.conj().T).max()
    if asym > tol:
        raise ValueError(f"matrix is not Hermitian: max |M - M^dag| = {asym:.3e} > {tol:.1e}")
    e, V = np.linalg.eigh(M)
    return e[::-1].copy(), V[:, ::-1].copy()


def eta(x: float) -> float:
    """-x log x with eta(0) = 0."""
    return 0.0 if x <= 0.0 else -x * np.log(x)


def shannon_entropy(p, log_base: str | int = "e") -> float:
    """Shannon entropy of a probability vector (eta(0) = 0 convention)."""
    p = np.asarray(p, dtype=float).ravel()
    pos = p[p > 0.0]
    h = float(-(pos * np.log(pos)).sum())
    return _in_base(h, log_base)


def _in_base(nats: float, log_base: str | int) -> float:
    if log_base in ("e", None):
        return float(nats)
    if log_base in ("2", 2):
        return float(nats / LN2)
    raise ValueError(f"log_base must be 'e' or 2, got {log_base!r}")


def entropy_of_spectrum(eigs: np.ndarray, log_base: str | int = "e",
                        window: float = PSD_WINDOW) -> float:
    """Von Neumann / Shannon entropy from a spectrum of a density matrix.

    Eigenvalues in ``[-window, 0]`` are treated as roundoff zeros; anything
    below raises :class:`InvariantViolation`.
    """
    eigs = np.asarray(eigs, dtype=float).ravel()
    low = eigs.min() if eigs.size else 0.0
    if low < -window:
        raise InvariantViolation(
            f"spectrum has negative eigenvalue {low:.3e} below -{window:.1e}")
    return shannon_entropy(np.clip(eigs, 0.0, None), log_base)


def von_neumann_entropy(rho: np.ndarray, log_base: str | int = "e",
                        trace_tol: float = 1e-9) -> float:
    """S(rho) = -Tr rho log rho for a PSD, unit-trace matrix."""
    rho = _as_square(rho)
    tr = rho.trace()
    if abs(tr - 1.0) > trace_tol:
        raise InvariantViolation(f"trace is {tr:.12g}, not 1 within {trace_tol:.1e}")
    e, _ = hermitian_eig(rho)
    return entropy_of_spectrum(e, log_base)


def trace_norm(M: np.ndarray) -> float:
    """||M||_1, the sum of singular values."""
    M = _as_square(M)
    return float(np.linalg.svd(M, compute_uv=False).sum())


def kron(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(A, dtype=complex), np.asarray(B, dtype=complex))


def partial_trace(M: np.ndarray, dims, keep) -> np.ndarray:
    """Trace out all tensor factors not listed in ``keep``.

    ``dims`` are the factor dimensions of ``M`` (their product must equal
    the matrix dimension); ``keep`` is an iterable of factor indices to
    retain, in their original order.
    """
    M = _as_square(M)
    dims = [int(d) for d in dims]
    if int(np.prod(dims)) != M.shape[0]:
        raise ValueError(f"dims {dims} do not multiply to matrix dim {M.shape[0]}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValueError(f"keep indices {keep} out of range for {len(dims)} factors")
    n = len(dims)
    tensor = M.reshape(dims + dims)
    # Trace the dropped factors one by one, highest index first so the
    # remaining axis numbering stays valid.
    for idx in sorted(set(range(n)) - set(keep), reverse=True):
        tensor = np.trace(tensor, axis1=idx, axis2=idx + tensor.ndim // 2)
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return tensor.reshape(d_keep, d_keep)


def purify(rho: np.ndarray, tol: float = PSD_WINDOW) -> np.ndarray:
    """Standard purification sum_a sqrt(r_a) |r_a> x |r_a> of a density matrix.

    The reduced state of the first factor reproduces ``rho`` exactly; the
    second factor carries its transpose in the eigenbasis.
    """
    rho = _as_square(rho)
    e, V = hermitian_eig(rho)
    if e.min() < -tol:
        raise InvariantViolation(f"not PSD: min eigenvalue {e.min():.3e}")
    if abs(e.sum() - 1.0) > 1e-9:
        raise InvariantViolation(f"not unit trace: {e.sum():.12g}")
    w = np.sqrt(np.clip(e, 0.0, None))
    d = rho.shape[0]
    psi = np.zeros(d * d, dtype=complex)
    for a in range(d):
        psi += w[a] * np.kron(V[:, a], V[:, a])
    return psi
