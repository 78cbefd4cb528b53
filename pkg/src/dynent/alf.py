"""Dynamical entropy rates of the collision model.

The ALF (Alicki-Lindblad-Fannes) entropy of the open system is the
asymptotic growth rate of the von Neumann entropy of coarse-grained
density matrices, optimized over POVMs. For this model the optimum is
known in closed form and is attained by the reference POVM; this module
provides

* finite-length entropy sequences (closed-form or brute-force),
* rate estimators on those sequences,
* the closed-form rate, the chain-rate upper bound and the
  quantum-regression lower bound,
* a randomized POVM search standing in for the supremum over POVMs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .collision import (
    PAULI_INTERACTION,
    POVM,
    CollisionModel,
    cgdm_bruteforce,
    closed_form_spectrum,
    random_povm,
    reduced_dynamics,
    reference_povm,
)
from .envchain import MarkovEnv, block_entropy, entropy_rate
from .linalg import (
    _in_base,
    entropy_of_spectrum,
    eta,
    kron,
    purify,
    shannon_entropy,
    von_neumann_entropy,
)
from .pauli import SIGMA


@dataclass(frozen=True)
class EntropySequence:
    """Entropies S_k of the k-slot coarse-grained matrices, k = 1..n_max."""

    values: np.ndarray
    povm_label: str
    params: tuple[float, float, float]
    log_base: str | int = "e"

    def __len__(self) -> int:
        return len(self.values)


def entropy_sequence(model: CollisionModel, n_max: int, povm: POVM | None = None,
                     method: str = "auto", log_base: str | int = "e",
                     cap: int = 4096) -> EntropySequence:
    """Entropy of the coarse-grained matrix for 1..n_max measurement slots.

    With no POVM given, the reference POVM is used through its closed-form
    spectrum (fast, any length). Passing a POVM forces the brute-force
    construction; ``method`` can override ("closed", "brute", "auto").
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if method not in ("auto", "closed", "brute"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        method = "closed" if povm is None else "brute"
    env = model.env
    params = (env.p, env.r, env.delta)
    if method == "closed":
        if povm is not None and povm.label != "reference":
            raise ValueError("closed-form path is only valid for the reference POVM")
        if model.interaction != PAULI_INTERACTION or not model.is_maximally_mixed:
            raise ValueError("closed-form path needs rho_S = I/2 and the Pauli interaction")
        if n_max > 11:
            raise ValueError(
                "closed-form path enumerates 4**(n_max - 1) words; n_max <= 11")
        vals = [entropy_of_spectrum(closed_form_spectrum(env, k - 1), log_base)
                for k in range(1, n_max + 1)]
        return EntropySequence(np.array(vals), "reference", params, log_base)
    if povm is None:
        povm = reference_povm(model.rho_S)
    vals = [cgdm_bruteforce(model, povm, k - 1, cap=cap).entropy(log_base)
            for k in range(1, n_max + 1)]
    return EntropySequence(np.array(vals), povm.label or "custom", params, log_base)


def rate_estimate(seq: EntropySequence, method: str = "difference") -> float:
    """Entropy rate from a finite sequence.

    ``difference`` is the last first-difference (exact for the Markov
    model once the sequence is three slots long); ``slope`` is the
    least-squares slope over all slots.
    """
    v = np.asarray(seq.values, dtype=float)
    if v.size < 3:
        raise ValueError("sequence too short: need at least 3 values")
    if method == "difference":
        return float(v[-1] - v[-2])
    if method == "slope":
        k = np.arange(1, v.size + 1, dtype=float)
        return float(np.polyfit(k, v, 1)[0])
    raise ValueError(f"unknown method {method!r}")


def alf_closed_form(p: float, r: float, delta: float,
                    log_base: str | int = "e") -> float:
    """Closed-form open-system ALF entropy of the model,
    H(pi_1) + 2p [eta(p + delta) + eta(p - delta) - 2 eta(p)]."""
    p0 = 1.0 - 2.0 * p - r
    if p0 < -1e-15 or not 0.0 <= delta <= p <= 0.5:
        raise ValueError("inadmissible parameters")
    h1 = shannon_entropy([max(p0, 0.0), p, p, r])
    nats = h1 + 2.0 * p * (eta(p + delta) + eta(p - delta) - 2.0 * eta(p))
    return _in_base(float(nats), log_base)


def qr_lower_bound(env: MarkovEnv, log_base: str | int = "e") -> float:
    """Entropy of the one-step dynamics applied to half of a maximally
    entangled pair; equals the rate exactly in the semigroup case and
    over-estimates it otherwise."""
    lam = reduced_dynamics(env, 1)
    psi = purify(np.eye(2, dtype=complex) / 2)
    bell = np.outer(psi, psi.conj())
    state = np.zeros((4, 4), dtype=complex)
    for i, w in enumerate(lam.weights):
        K = kron(SIGMA[i], SIGMA[0])
        state += w * (K @ bell @ K.conj().T)
    return von_neumann_entropy(state, log_base)


def finite_size_bound(env: MarkovEnv, n_collisions: int,
                      log_base: str | int = "e") -> float:
    """Upper bound H(pi_[1,n]) + 2 log 2 on the entropy of any
    (n+1)-slot coarse-grained matrix, any POVM."""
    h = block_entropy(env, n_collisions) if n_collisions >= 1 else 0.0
    return _in_base(h + 2.0 * np.log(2.0), log_base)


@dataclass(frozen=True)
class PovmSearchResult:
    """Outcome of the randomized search over POVMs at fixed length."""

    rates: np.ndarray
    best_rate: float
    best_index: int
    reference_rate: float
    chain_rate: float
    max_bound_excess: float
    n_collisions: int
    trials: int
    seed: int

    @property
    def reference_is_best(self) -> bool:
        return self.best_index == 0


def povm_search(model: CollisionModel, n: int, trials: int, seed: int = 0,
                n_elements: int = 4, cap: int = 4096,
                log_base: str | int = "e") -> PovmSearchResult:
    """Randomized stand-in for the supremum over POVMs.

    Trial 0 is always the reference POVM; the remaining trials draw
    Haar-style random POVMs. Each trial is scored by the difference rate
    of its (n+1)-slot entropy sequence, all computed by brute force. The
    result also records the worst violation of the finite-size entropy
    bound across all trials and slots (none is expected).
    """
    if trials < 0:
        raise ValueError("trials must be >= 0")
    rng = np.random.default_rng(seed)
    povms = [reference_povm(model.rho_S)]
    povms += [random_povm(rng, n_elements) for _ in range(trials)]
    bounds = np.array([finite_size_bound(model.env, k - 1, log_base)
                       for k in range(1, n + 2)])
    rates = np.empty(len(povms))
    max_excess = -np.inf
    for t, povm in enumerate(povms):
        seq = entropy_sequence(model, n + 1, povm=povm, method="brute",
                               log_base=log_base, cap=cap)
        rates[t] = rate_estimate(seq, "difference")
        max_excess = max(max_excess, float((seq.values - bounds).max()))
    best = int(np.argmax(rates))  # ties resolve to the lowest index
    return PovmSearchResult(
        rates=rates, best_rate=float(rates[best]), best_index=best,
        reference_rate=float(rates[0]),
        chain_rate=entropy_rate(model.env, log_base),
        max_bound_excess=max_excess, n_collisions=n, trials=trials, seed=seed)
