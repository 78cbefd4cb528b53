"""Collisional dynamics of a qubit coupled to the classical chain.

One collision conjugates the system by the Pauli matrix selected by the
current environment symbol, after which the chain shifts. What is
observable are words of POVM outcomes; their correlation matrices (the
coarse-grained density matrices) are built here two independent ways:

* ``cgdm_bruteforce`` sums Heisenberg operator words over all environment
  words, weighting by the chain block probabilities -- no structure
  assumed beyond the classical mixture;
* ``cgdm_closed_form`` assembles the known product form for the
  eigenbasis POVM of the maximally mixed state, whose spectrum is the
  block distribution scaled by 1/4 with fourfold degeneracy.

Agreement of the two spectra is the central cross-check of the package.

Word indexing is big-endian throughout: a word ``a_0 .. a_n`` maps to the
integer ``sum a_k * m**(n-k)``, matching :func:`dynent.envchain.word_index`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import pauli
from .envchain import MarkovEnv, block_distribution, index_word, word_index
from .linalg import entropy_of_spectrum, hermitian_eig, is_hermitian, kron
from .pauli import SIGMA, PauliMap

DEFAULT_DIM_CAP = 4096

PAULI_INTERACTION = "pauli"
TRIVIAL_INTERACTION = "trivial"


class POVM:
    """A finite POVM given by its measurement operators on the qubit."""

    def __init__(self, elements, label: str = "", tol: float = 1e-10):
        els = [np.asarray(E, dtype=complex) for E in elements]
        if not els or any(E.shape != (2, 2) for E in els):
            raise ValueError("POVM elements must be 2x2 matrices")
        total = sum(E.conj().T @ E for E in els)
        err = np.abs(total - np.eye(2)).max()
        if err > tol:
            raise ValueError(f"completeness sum X^dag X = 1 violated by {err:.3e}")
        self.elements = tuple(els)
        self.label = label

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def stack(self) -> np.ndarray:
        return np.stack(self.elements)


def reference_povm(rho_S: np.ndarray, tol: float = 1e-10) -> POVM:
    """The d^2-element POVM sqrt(r_a) |r_a><r_a'| built from the eigenbasis of rho_S.

    Measuring it leaves ``rho_S`` invariant, which is what makes the
    closed-form coarse-grained matrix available. Requires full rank.
    """
    e, V = hermitian_eig(np.asarray(rho_S, dtype=complex))
    if e.min() <= tol:
        raise ValueError(f"rho_S must be full rank, min eigenvalue {e.min():.3e}")
    els = []
    for a in range(len(e)):
        for ap in range(len(e)):
            els.append(np.sqrt(e[a]) * np.outer(V[:, a], V[:, ap].conj()))
    return POVM(els, label="reference")


def random_povm(rng: np.random.Generator, n_elements: int = 4) -> POVM:
    """Haar-style random POVM: blocks of a random isometry C^2 -> C^(2K)."""
    if n_elements < 1:
        raise ValueError("need at least one element")
    G = rng.standard_normal((2 * n_elements, 2)) + 1j * rng.standard_normal((2 * n_elements, 2))
    Q, R = np.linalg.qr(G)
    Q = Q * (np.diagonal(R) / np.abs(np.diagonal(R)))
    return POVM([Q[2 * a:2 * a + 2, :] for a in range(n_elements)], label="random")


@dataclass(frozen=True)
class CollisionModel:
    """System state plus environment; the coupling is the controlled-Pauli
    collision unless ``interaction`` selects the trivial (identity) one."""

    env: MarkovEnv
    rho_S: np.ndarray = field(default_factory=lambda: np.eye(2, dtype=complex) / 2)
    interaction: str = PAULI_INTERACTION

    def __post_init__(self):
        rho = np.asarray(self.rho_S, dtype=complex)
        if rho.shape != (2, 2):
            raise ValueError("rho_S must be a 2x2 matrix")
        e, _ = hermitian_eig(rho)
        if abs(e.sum() - 1.0) > 1e-9 or e.min() <= 1e-10:
            raise ValueError("rho_S must be a full-rank unit-trace density matrix")
        if self.interaction not in (PAULI_INTERACTION, TRIVIAL_INTERACTION):
            raise ValueError(f"unknown interaction {self.interaction!r}")
        object.__setattr__(self, "rho_S", rho)

    @property
    def is_maximally_mixed(self) -> bool:
        return bool(np.abs(self.rho_S - np.eye(2) / 2).max() <= 1e-12)

    def sqrt_rho(self) -> np.ndarray:
        e, V = hermitian_eig(self.rho_S)
        return (V * np.sqrt(np.clip(e, 0, None))) @ V.conj().T


@dataclass(frozen=True)
class CoarseGrainedDM:
    """Correlation matrix of measurement words: positive with unit trace."""

    matrix: np.ndarray
    n_slots: int
    povm_size: int

    def __post_init__(self):
        dim = self.povm_size ** self.n_slots
        if self.matrix.shape != (dim, dim):
            raise ValueError(f"matrix shape {self.matrix.shape} != ({dim}, {dim})")
        if not is_hermitian(self.matrix, 1e-10):
            raise ValueError("coarse-grained matrix is not Hermitian within 1e-10")
        if abs(self.matrix.trace() - 1.0) > 1e-9:
            raise ValueError(f"trace {self.matrix.trace():.12g} != 1 within 1e-9")

    def word_to_index(self, word) -> int:
        word = tuple(word)
        if len(word) != self.n_slots:
            raise ValueError(f"word length {len(word)} != {self.n_slots} slots")
        return word_index(word, self.povm_size)

    def index_to_word(self, idx: int) -> tuple[int, ...]:
        return index_word(idx, self.n_slots, self.povm_size)

    def spectrum(self) -> np.ndarray:
        e, _ = hermitian_eig(self.matrix)
        return e

    def entropy(self, log_base: str | int = "e") -> float:
        return entropy_of_spectrum(self.spectrum(), log_base)


def _env_words(model: CollisionModel, n: int):
    """Yield (conjugator word, probability); the trivial interaction has a
    single effective word of weight one."""
    if n == 0 or model.interaction == TRIVIAL_INTERACTION:
        yield (), 1.0
        return
    probs = block_distribution(model.env, n)
    for flat, word in enumerate(itertools.product(range(4), repeat=n)):
        pr = probs[flat]
        if pr > 0.0:
            yield word, float(pr)


def _cumulative_conjugators(i_word) -> list[np.ndarray]:
    """C_k = s_{i_1} ... s_{i_k} for k = 1..n; conjugation by C_k applies
    the first k collisions to a slot-k measurement operator."""
    out = []
    C = np.eye(2, dtype=complex)
    for i in i_word:
        C = C @ SIGMA[i]
        out.append(C)
    return out


def heisenberg_word(model: CollisionModel, povm: POVM, a_word, i_word) -> np.ndarray:
    """Ordered operator product for measurement word ``a_0..a_n`` under
    environment word ``i_1..i_n`` (latest measurement leftmost)."""
    a_word = tuple(int(a) for a in a_word)
    i_word = tuple(int(i) for i in i_word)
    if len(a_word) != len(i_word) + 1:
        raise ValueError(
            f"need n+1 measurement labels for n environment symbols, "
            f"got {len(a_word)} and {len(i_word)}")
    if any(not 0 <= a < len(povm) for a in a_word):
        raise ValueError("measurement label out of range")
    els = povm.elements
    X = els[a_word[0]]
    if model.interaction == TRIVIAL_INTERACTION:
        conjs = [np.eye(2, dtype=complex)] * len(i_word)
    else:
        conjs = _cumulative_conjugators(i_word)
    for k, C in enumerate(conjs, start=1):
        X = (C @ els[a_word[k]] @ C.conj().T) @ X
    return X


def _word_stack(povm: POVM, conjs, sqrt_rho: np.ndarray) -> np.ndarray:
    """All products X^a sqrt(rho) stacked big-endian over measurement words."""
    V = povm.stack() @ sqrt_rho
    for C in conjs:
        Y = np.einsum("ij,ajk,kl->ail", C, povm.stack(), C.conj().T)
        V = np.einsum("aij,wjk->waik", Y, V).reshape(-1, 2, 2)
    return V


def cgdm_bruteforce(model: CollisionModel, povm: POVM, n: int,
                    cap: int = DEFAULT_DIM_CAP) -> CoarseGrainedDM:
    """Coarse-grained density matrix after ``n`` collisions (``n + 1``
    measurement slots), summed directly over environment words."""
    if n < 0:
        raise ValueError("n must be >= 0")
    m = len(povm)
    dim = m ** (n + 1)
    if dim > cap:
        raise ValueError(
            f"matrix dimension {dim} exceeds cap {cap}; "
            f"use the closed-form path for the reference POVM")
    sq = model.sqrt_rho()
    G = np.zeros((dim, dim), dtype=complex)
    for i_word, pr in _env_words(model, n):
        if model.interaction == TRIVIAL_INTERACTION:
            conjs = [np.eye(2, dtype=complex)] * n
        else:
            conjs = _cumulative_conjugators(i_word)
        Vb = _word_stack(povm, conjs, sq).reshape(dim, 4)
        G += pr * (Vb @ Vb.conj().T)
    G = (G + G.conj().T) / 2
    return CoarseGrainedDM(matrix=G, n_slots=n + 1, povm_size=m)


def cgdm_nonzero_spectrum(model: CollisionModel, povm: POVM, n: int,
                          gram_cap: int = DEFAULT_DIM_CAP) -> np.ndarray:
    """Nonzero spectrum of the brute-force coarse-grained matrix.

    The matrix is a sum of Gram factors V_i V_i^dag with V_i of width 4,
    so its nonzero eigenvalues equal those of the small cross Gram matrix
    W^dag W built from the stacked factors. Useful when the matrix itself
    would not fit the dimension cap (e.g. the trivial interaction, which
    contributes a single factor at any n).
    """
    m = len(povm)
    dim = m ** (n + 1)
    sq = model.sqrt_rho()
    blocks = []
    for i_word, pr in _env_words(model, n):
        if model.interaction == TRIVIAL_INTERACTION:
            conjs = [np.eye(2, dtype=complex)] * n
        else:
            conjs = _cumulative_conjugators(i_word)
        Vb = _word_stack(povm, conjs, sq).reshape(dim, 4)
        blocks.append(np.sqrt(pr) * Vb)
    W = np.concatenate(blocks, axis=1)
    if W.shape[1] > gram_cap:
        raise ValueError(f"cross Gram dimension {W.shape[1]} exceeds cap {gram_cap}")
    small = W.conj().T @ W
    e, _ = hermitian_eig((small + small.conj().T) / 2)
    # pad with the exact zeros that complete the full spectrum
    return np.concatenate([e, np.zeros(max(dim - e.size, 0))])


@dataclass(frozen=True)
class TnChannel:
    """The n-qubit mixture of collision words: (weight, word) pairs.

    The weight of word ``i_1..i_n`` is its chain block probability; the
    word itself encodes which Pauli conjugation acts on each copy. Stored
    symbolically -- the mixture is diagonal in every tensor-Pauli basis,
    so a dense matrix is never needed.
    """

    weights: np.ndarray
    n: int

    def words(self):
        for flat in range(self.weights.size):
            yield index_word(flat, self.n), float(self.weights[flat])

    def weight_of(self, word) -> float:
        return float(self.weights[word_index(word)])

    def one_step_marginal(self) -> np.ndarray:
        """Weights of the single-collision mixture (the stationary vector)."""
        J = self.weights.reshape((4,) * self.n) if self.n else self.weights
        if self.n == 0:
            raise ValueError("no marginal for n = 0")
        axes = tuple(range(1, self.n))
        return J.sum(axis=axes) if axes else J.copy()

    def product_weights(self) -> np.ndarray:
        """Weights of the fully factorized mixture built from the marginal."""
        marg = self.one_step_marginal()
        out = np.ones(1)
        for _ in range(self.n):
            out = np.multiply.outer(out, marg).reshape(-1)
        return out


def tn_channel(env: MarkovEnv, n: int, cap: int = DEFAULT_DIM_CAP) -> TnChannel:
    """Symbolic n-collision channel; refuses word counts beyond the cap."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if 4 ** n > cap:
        raise ValueError(f"4^{n} words exceed cap {cap}")
    return TnChannel(weights=block_distribution(env, n), n=n)


def closed_form_spectrum(env: MarkovEnv, n: int) -> np.ndarray:
    """Spectrum of the closed-form coarse-grained matrix after n collisions:
    every block probability appears four times, scaled by 1/4."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return np.repeat(block_distribution(env, n) / 4.0, 4)


def cgdm_closed_form(model: CollisionModel, n: int,
                     cap: int = DEFAULT_DIM_CAP) -> CoarseGrainedDM:
    """Closed-form coarse-grained matrix for the reference POVM.

    Only available for the maximally mixed system state, where the
    reference POVM leaves the state invariant and the matrix factorizes
    into (I/4) x sum_i p_i |psi_i><psi_i| over shifted maximally
    entangled vectors.
    """
    if model.interaction != PAULI_INTERACTION:
        raise ValueError("closed form requires the controlled-Pauli interaction")
    if not model.is_maximally_mixed:
        raise ValueError("closed form requires rho_S = I/2")
    if n < 0:
        raise ValueError("n must be >= 0")
    dim = 4 ** (n + 1)
    if dim > cap:
        raise ValueError(f"matrix dimension {dim} exceeds cap {cap}")
    probs = block_distribution(model.env, n)
    half_dim = 2 ** n
    M = np.zeros((half_dim * half_dim, half_dim * half_dim), dtype=complex)
    for flat, word in enumerate(itertools.product(range(4), repeat=n)):
        pr = probs[flat]
        if pr == 0.0:
            continue
        U = np.ones((1, 1), dtype=complex)
        for i in word:
            U = np.kron(U, SIGMA[i])
        psi = U.reshape(-1) / np.sqrt(half_dim)
        M += pr * np.outer(psi, psi.conj())
    G = kron(np.eye(4) / 4.0, M)
    return CoarseGrainedDM(matrix=G, n_slots=n + 1, povm_size=4)


def _axis_sign_diag(k: int) -> np.ndarray:
    return np.diag([float(pauli.pauli_sign(k, i)) for i in range(4)])


def bloch_eigenvalues(env: MarkovEnv, n: int) -> np.ndarray:
    """Bloch eigenvalues of the n-step reduced dynamics via signed
    transfer matrices: l_k(n) = 1^T (D_k T)^(n-1) D_k p."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return np.ones(3)
    out = np.empty(3)
    for k in (1, 2, 3):
        D = _axis_sign_diag(k)
        v = D @ env.stationary
        M = D @ env.T
        for _ in range(n - 1):
            v = M @ v
        out[k - 1] = v.sum()
    return out


def bloch_sequence(env: MarkovEnv, n_max: int) -> np.ndarray:
    """Bloch eigenvalues for all steps 0..n_max, shape (n_max + 1, 3)."""
    seq = np.empty((n_max + 1, 3))
    seq[0] = 1.0
    vs = []
    Ms = []
    for k in (1, 2, 3):
        D = _axis_sign_diag(k)
        vs.append(D @ env.stationary)
        Ms.append(D @ env.T)
    for n in range(1, n_max + 1):
        for j in range(3):
            seq[n, j] = vs[j].sum()
            vs[j] = Ms[j] @ vs[j]
    return seq


def reduced_dynamics(env: MarkovEnv, n: int) -> PauliMap:
    """The n-step reduced dynamics as a Pauli map (transfer-matrix route)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return PauliMap.from_bloch(bloch_eigenvalues(env, n))


def reduced_dynamics_bruteforce(env: MarkovEnv, n: int) -> PauliMap:
    """Same map by the direct sum over all 4**n environment words.

    Deliberately avoids the sign table: each word conjugates the Pauli
    matrices by actual matrix products, so this route is independent of
    the transfer-matrix one.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > 8:
        raise ValueError("brute-force route limited to n <= 8")
    probs = block_distribution(env, n)
    sig = np.stack(SIGMA)
    lam = np.zeros(3)
    for k in (1, 2, 3):
        M = SIGMA[k][None, :, :]
        for _ in range(n):
            # prepend a collision symbol: word (i, w) acts as s_i M(w) s_i
            M = np.einsum("iab,wbc,icd->iwad", sig, M, sig).reshape(-1, 2, 2)
        overlaps = np.einsum("ab,wba->w", SIGMA[k], M).real / 2.0
        lam[k - 1] = float(probs @ overlaps)
    return PauliMap.from_bloch(lam)
