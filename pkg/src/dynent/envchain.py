"""The 4-symbol stationary Markov environment.

The transition matrix is COLUMN-stochastic: ``T[i, j]`` is the probability
of emitting symbol ``i`` given that the previous symbol was ``j``, and
every column sums to one. Most textbooks use the row convention; the
column one is kept throughout this package, so stationarity reads
``T @ p = p``.

The family is parametrized by ``(p, r, delta)`` with ``p0 = 1 - 2p - r``:

    T = [[p0, p0,      p0,      p0],
         [p,  p+delta, p-delta, p ],
         [p,  p-delta, p+delta, p ],
         [r,  r,       r,       r ]]

with stationary vector ``(p0, p, p, r)`` for every admissible
``0 <= delta <= p <= 1/2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import _in_base, eta, shannon_entropy

N_SYMBOLS = 4


@dataclass(frozen=True)
class MarkovEnv:
    """Stationary 4-symbol Markov chain with its defining parameters."""

    T: np.ndarray
    stationary: np.ndarray
    p: float
    r: float
    delta: float

    @property
    def p0(self) -> float:
        return 1.0 - 2.0 * self.p - self.r

    def __post_init__(self):
        T = self.T
        pvec = self.stationary
        if T.shape != (4, 4) or pvec.shape != (4,):
            raise ValueError("environment needs a 4x4 matrix and a 4-vector")
        if np.abs(T.sum(axis=0) - 1.0).max() > 1e-12:
            raise ValueError("columns of T must sum to 1")
        if np.abs(T @ pvec - pvec).max() > 1e-12:
            raise ValueError("stationarity T p = p violated")
        if T.min() < -1e-15 or T.max() > 1 + 1e-15:
            raise ValueError("T entries must lie in [0, 1]")


def build_env(p: float, r: float, delta: float) -> MarkovEnv:
    """Construct the environment, rejecting out-of-range parameters by name."""
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"need 0 <= p <= 1/2, got p = {p}")
    if not 0.0 <= delta <= p:
        raise ValueError(f"need 0 <= delta <= p, got delta = {delta}, p = {p}")
    if r < 0.0:
        raise ValueError(f"need r >= 0, got r = {r}")
    p0 = 1.0 - 2.0 * p - r
    if p0 < -1e-15:
        raise ValueError(f"need p0 = 1 - 2p - r >= 0, got p0 = {p0}")
    p0 = max(p0, 0.0)
    T = np.array([
        [p0, p0, p0, p0],
        [p, p + delta, p - delta, p],
        [p, p - delta, p + delta, p],
        [r, r, r, r],
    ])
    pvec = np.array([p0, p, p, r])
    return MarkovEnv(T=T, stationary=pvec, p=p, r=r, delta=delta)


def word_index(word, alphabet: int = N_SYMBOLS) -> int:
    """Big-endian integer encoding of a symbol word (first symbol most significant)."""
    idx = 0
    for a in word:
        if not 0 <= a < alphabet:
            raise ValueError(f"symbol {a} outside alphabet of size {alphabet}")
        idx = idx * alphabet + int(a)
    return idx


def index_word(idx: int, length: int, alphabet: int = N_SYMBOLS) -> tuple[int, ...]:
    """Inverse of :func:`word_index` for words of a known length."""
    if idx < 0 or idx >= alphabet ** length:
        raise ValueError(f"index {idx} out of range for length-{length} words")
    word = []
    for _ in range(length):
        word.append(idx % alphabet)
        idx //= alphabet
    return tuple(reversed(word))


def block_probability(env: MarkovEnv, word) -> float:
    """Probability of a symbol word under the stationary chain."""
    word = tuple(int(a) for a in word)
    if len(word) < 1:
        raise ValueError("word must have at least one symbol")
    pr = env.stationary[word[0]]
    for k in range(1, len(word)):
        pr *= env.T[word[k], word[k - 1]]
    return float(pr)


def block_distribution(env: MarkovEnv, n: int) -> np.ndarray:
    """All 4**n word probabilities, indexed big-endian (see :func:`word_index`).

    ``n = 0`` returns the single empty word with probability one.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return np.ones(1)
    J = env.stationary.copy()
    TT = env.T.T  # TT[prev, next]
    for _ in range(n - 1):
        J = J[..., :, None] * TT
    return J.reshape(-1)


def block_entropy(env: MarkovEnv, n: int, log_base: str | int = "e") -> float:
    """Shannon entropy of the length-n block distribution."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return shannon_entropy(block_distribution(env, n), log_base)


def entropy_rate(env: MarkovEnv, log_base: str | int = "e") -> float:
    """Two-site conditional entropy -sum_j p_j T_ij log T_ij of the chain."""
    rate = 0.0
    for j in range(N_SYMBOLS):
        col = env.T[:, j]
        rate += env.stationary[j] * sum(eta(x) for x in col)
    return _in_base(float(rate), log_base)


def mutual_information(env: MarkovEnv, log_base: str | int = "e") -> float:
    """Mutual information between two consecutive chain symbols.

    Closed form 4 p^2 (log 2 - h(1/2 + delta/2p)) with h the binary
    entropy; returns 0 at p = 0 where symbols 1 and 2 never occur.
    """
    p, d = env.p, env.delta
    if p == 0.0:
        return 0.0
    x = 0.5 + d / (2.0 * p)
    h = eta(x) + eta(1.0 - x)
    return _in_base(float(4.0 * p * p * (np.log(2.0) - h)), log_base)
