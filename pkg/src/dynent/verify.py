"""Named cross-checks tying the independent constructions together.

Every closed-form object in the package has a brute-force counterpart;
each check below compares one such pair at a pinned tolerance and is
reported as a single pass/fail line by the CLI ``verify`` command and by
the acceptance test module. Checks that sample randomness take the seed
explicitly; everything else is bit-reproducible regardless of the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import collision, divisibility
from .alf import (
    alf_closed_form,
    entropy_sequence,
    povm_search,
    qr_lower_bound,
    rate_estimate,
)
from .collision import (
    CollisionModel,
    TRIVIAL_INTERACTION,
    cgdm_bruteforce,
    cgdm_closed_form,
    cgdm_nonzero_spectrum,
    closed_form_spectrum,
    random_povm,
    reduced_dynamics,
    reduced_dynamics_bruteforce,
    tn_channel,
)
from .divisibility import classify, extreme_dynamics_check, trace_distance_trajectory
from .envchain import build_env, block_entropy, entropy_rate, mutual_information
from .linalg import entropy_of_spectrum
from .pauli import SIGMA

FIG_P = 0.25
FIG_R = 0.1

TWO_LOG_TWO = float(2.0 * np.log(2.0))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _result(name: str, passed: bool, detail: str) -> CheckResult:
    return CheckResult(name=name, passed=bool(passed), detail=detail)


def check_spectral_equality(seed: int = 0) -> CheckResult:
    """Brute-force vs closed-form spectra of the reference-POVM matrices."""
    worst = 0.0
    for delta in (0.0, 0.1, 0.25):
        model = CollisionModel(env=build_env(FIG_P, FIG_R, delta))
        for n in range(0, 4):
            brute = np.sort(cgdm_bruteforce(model, collision.reference_povm(model.rho_S), n).spectrum())
            closed = np.sort(cgdm_closed_form(model, n).spectrum())
            weights = np.sort(closed_form_spectrum(model.env, n))
            worst = max(worst,
                        float(np.abs(brute - closed).max()),
                        float(np.abs(closed - weights).max()))
    return _result("spectral_equality", worst <= 1e-9,
                   f"max spectral deviation {worst!r} (tol 1e-09, n <= 3)")


def check_entropy_identity(seed: int = 0) -> CheckResult:
    """S of the (n+1)-slot reference matrix vs 2 log 2 + H(block), n <= 5."""
    worst = 0.0
    worst_rate = 0.0
    for delta in (0.0, 0.1, 0.25):
        env = build_env(FIG_P, FIG_R, delta)
        model = CollisionModel(env=env)
        for n in range(0, 6):
            if n <= 3:
                s = cgdm_bruteforce(model, collision.reference_povm(model.rho_S), n).entropy()
            else:
                s = entropy_of_spectrum(closed_form_spectrum(env, n))
            h = block_entropy(env, n) if n >= 1 else 0.0
            worst = max(worst, float(abs(s - (TWO_LOG_TWO + h))))
        seq = entropy_sequence(model, n_max=6)
        worst_rate = max(worst_rate, float(abs(rate_estimate(seq, "difference") - entropy_rate(env))))
    return _result("entropy_identity", worst <= 1e-9 and worst_rate <= 1e-9,
                   f"max identity deviation {worst!r}, max rate deviation {worst_rate!r}")


def _admissible_grid(points_per_pair: int = 25):
    for (p, r) in ((0.25, 0.1), (0.4, 0.05), (0.1, 0.3), (0.5, 0.0)):
        for delta in np.linspace(0.0, p, points_per_pair):
            yield p, r, float(delta)


def check_rate_identity(seed: int = 0) -> CheckResult:
    """Closed-form rate vs conditional entropy vs H(pi1) - I, 100 points."""
    worst_cond = 0.0
    worst_mi = 0.0
    for p, r, delta in _admissible_grid():
        env = build_env(p, r, delta)
        closed = alf_closed_form(p, r, delta)
        worst_cond = max(worst_cond, float(abs(closed - entropy_rate(env))))
        h1 = block_entropy(env, 1)
        worst_mi = max(worst_mi, float(abs(closed - (h1 - mutual_information(env)))))
    return _result("rate_identity", worst_cond <= 1e-12 and worst_mi <= 1e-10,
                   f"max |closed - conditional| {worst_cond!r}, "
                   f"max |closed - (H1 - I)| {worst_mi!r}")


def check_zero_entropy_extreme(seed: int = 0) -> CheckResult:
    """At p = delta = 1/2 the rate vanishes and the sequence freezes."""
    env = build_env(0.5, 0.0, 0.5)
    rate = float(alf_closed_form(0.5, 0.0, 0.5))
    seq = entropy_sequence(CollisionModel(env=env), n_max=6)
    plateau = float(np.abs(seq.values[1:] - seq.values[1]).max())
    return _result("zero_entropy_extreme", abs(rate) <= 1e-12 and plateau <= 1e-12,
                   f"rate {rate!r}, sequence plateau deviation {plateau!r}")


def divisibility_grid(seed: int = 0, steps: int = 200, horizon: int = 50,
                      restarts: int = 32):
    """Classification reports over the Fig.-style delta/p grid at (0.25, 0.1)."""
    ratios = np.linspace(0.0, 1.0, steps)
    reports = []
    for ratio in ratios:
        env = build_env(FIG_P, FIG_R, float(ratio) * FIG_P)
        reports.append(classify(env, horizon=horizon, restarts=restarts, seed=seed))
    return ratios, reports


def _boundary_bracket(ratios, flags):
    """(last True ratio, first False ratio) of a monotone True->False column."""
    flags = np.asarray(flags, dtype=bool)
    if flags.all():
        return float(ratios[-1]), None
    if not flags.any():
        return None, float(ratios[0])
    first_false = int(np.argmin(flags))
    if flags[first_false:].any():
        raise AssertionError("verdict column is not monotone in delta")
    return float(ratios[first_false - 1]), float(ratios[first_false])


def check_thresholds(grid=None, seed: int = 0) -> CheckResult:
    """Numeric region boundaries vs the three analytic thresholds."""
    ratios, reports = grid if grid is not None else divisibility_grid(seed)
    step = float(ratios[1] - ratios[0])
    analytic = divisibility.analytic_thresholds(FIG_P, FIG_R)
    targets = {
        "cp": analytic["ratio_cp"],
        "tensor_p": analytic["ratio_tensor"],
        "p": analytic["ratio_p"],
    }
    details = []
    ok = True
    for name, target in targets.items():
        flags = [getattr(rep, {"cp": "cp_divisible", "tensor_p": "tensor_p_divisible",
                               "p": "p_divisible"}[name]) for rep in reports]
        lo, hi = _boundary_bracket(ratios, flags)
        near = (lo is not None and abs(lo - target) <= step + 1e-12) or \
               (hi is not None and abs(hi - target) <= step + 1e-12)
        ok = ok and near
        details.append(f"{name}: flip in ({lo}, {hi}) vs analytic {target!r}")
    for rep in reports:
        if rep.cp_divisible and not rep.tensor_p_divisible:
            ok = False
            details.append("nesting violated: CP without tensor-P")
        if rep.tensor_p_divisible and not rep.p_divisible:
            ok = False
            details.append("nesting violated: tensor-P without P")
    return _result("divisibility_thresholds", ok, "; ".join(details))


def check_gns_equivalence(grid=None, seed: int = 0) -> CheckResult:
    """CP-divisibility iff P-divisibility of the ancilla-extended steps."""
    _, reports = grid if grid is not None else divisibility_grid(seed)
    mismatches = [i for i, rep in enumerate(reports)
                  if rep.cp_divisible != rep.gns_p_divisible]
    return _result("gns_equivalence", not mismatches,
                   f"{len(mismatches)} mismatching grid points" +
                   (f" at indices {mismatches[:5]}" if mismatches else ""))


def check_revival_formulas(seed: int = 0) -> CheckResult:
    """Measured trace-norm differences of the extreme dynamics at x = (1,1,1)."""
    odd, even = extreme_dynamics_check((1.0, 1.0, 1.0))
    target = 2.0 * (np.sqrt(3.0) - 1.0)
    dev = float(max(abs(odd + target), abs(even - target)))
    env = build_env(0.5, 0.0, 0.5)
    X = SIGMA[1] + SIGMA[2] + SIGMA[3]
    rho1 = (np.eye(2, dtype=complex) + X / (2.0 * np.sqrt(3.0))) / 2
    rho2 = (np.eye(2, dtype=complex) - X / (2.0 * np.sqrt(3.0))) / 2
    traj = trace_distance_trajectory(env, rho1, rho2, 10)
    alternation_ok = traj.revival_steps == tuple(range(2, 11, 2))
    return _result("revival_formulas", dev <= 1e-12 and alternation_ok,
                   f"max deviation from +-2(sqrt(3)-1): {dev!r}; "
                   f"revival steps {traj.revival_steps}")


def check_closed_system_bound(seed: int = 0) -> CheckResult:
    """Identity collisions: entropy stays under 2 log 2 for any POVM."""
    env = build_env(FIG_P, FIG_R, 0.1)
    model = CollisionModel(env=env, interaction=TRIVIAL_INTERACTION)
    rng = np.random.default_rng(seed)
    worst = -np.inf
    last_diffs = []
    for _ in range(10):
        povm = random_povm(rng)
        entropies = [entropy_of_spectrum(cgdm_nonzero_spectrum(model, povm, n))
                     for n in range(0, 7)]
        worst = max(worst, float(max(entropies) - TWO_LOG_TWO))
        last_diffs.append(entropies[-1] - entropies[-2])
    tail = float(np.abs(last_diffs).max())
    return _result("closed_system_bound", worst <= 1e-9 and tail <= 0.05,
                   f"max excess over 2 log 2: {worst!r}; max tail difference {tail!r}")


def check_povm_sandwich(seed: int = 0) -> CheckResult:
    """Random POVMs never beat the chain bound; the reference one attains it."""
    env = build_env(FIG_P, FIG_R, 0.1)
    model = CollisionModel(env=env)
    res = povm_search(model, n=3, trials=100, seed=seed)
    ref_dev = float(abs(res.reference_rate - res.chain_rate))
    ok = (res.max_bound_excess <= 1e-9
          and ref_dev <= 1e-9
          and res.best_rate <= res.chain_rate + 1e-9)
    return _result("povm_sandwich", ok,
                   f"max finite-size bound excess {res.max_bound_excess!r}; "
                   f"reference rate deviation {ref_dev!r}; "
                   f"best random rate {res.best_rate!r} vs chain rate {res.chain_rate!r}")


def check_qr_factorization(seed: int = 0) -> CheckResult:
    """At delta = 0 the collision mixture factorizes and the QR bound is exact."""
    env = build_env(FIG_P, FIG_R, 0.0)
    worst = 0.0
    for n in range(1, 6):
        ch = tn_channel(env, n)
        worst = max(worst, float(np.abs(ch.weights - ch.product_weights()).max()))
    model = CollisionModel(env=env)
    seq = entropy_sequence(model, n_max=4, povm=collision.reference_povm(model.rho_S),
                           method="brute")
    rate_dev = float(abs(qr_lower_bound(env) - rate_estimate(seq, "difference")))
    return _result("qr_factorization", worst <= 1e-15 and rate_dev <= 1e-9,
                   f"max weight factorization error {worst!r}; "
                   f"QR bound vs measured rate deviation {rate_dev!r}")


def check_reduced_dynamics_routes(seed: int = 0) -> CheckResult:
    """Transfer-matrix vs word-sum Bloch eigenvalues, n <= 8."""
    worst = 0.0
    for delta in (0.0, 0.1, 0.17, 0.25):
        env = build_env(FIG_P, FIG_R, delta)
        for n in range(1, 9):
            a = np.asarray(reduced_dynamics(env, n).bloch)
            b = np.asarray(reduced_dynamics_bruteforce(env, n).bloch)
            worst = max(worst, float(np.abs(a - b).max()))
    return _result("reduced_dynamics_routes", worst <= 1e-12,
                   f"max two-route deviation {worst!r}")


def check_markov_identities(seed: int = 0) -> CheckResult:
    """Chain identities: rate = H1 - I, block linearity, monotone I."""
    worst = 0.0
    mi_prev = -np.inf
    monotone = True
    for delta in np.linspace(0.0, FIG_P, 50):
        env = build_env(FIG_P, FIG_R, float(delta))
        h1 = block_entropy(env, 1)
        mi = mutual_information(env)
        worst = max(worst, abs(entropy_rate(env) - (h1 - mi)))
        monotone = monotone and mi >= mi_prev - 1e-12
        mi_prev = mi
    env = build_env(FIG_P, FIG_R, 0.2)
    lin = float(abs((block_entropy(env, 3) - block_entropy(env, 2))
                    - (block_entropy(env, 2) - block_entropy(env, 1))))
    ok = worst <= 1e-10 and lin <= 1e-12 and monotone
    return _result("markov_identities", ok,
                   f"max |rate - (H1 - I)| {worst!r}; block linearity {lin!r}; "
                   f"mutual information monotone: {monotone}")


def run_all(seed: int = 0, grid_steps: int = 200, horizon: int = 50,
            restarts: int = 32) -> list[CheckResult]:
    """Run every named check; the divisibility grid is computed once."""
    grid = divisibility_grid(seed, steps=grid_steps, horizon=horizon,
                             restarts=restarts)
    return [
        check_spectral_equality(seed),
        check_entropy_identity(seed),
        check_rate_identity(seed),
        check_zero_entropy_extreme(seed),
        check_thresholds(grid, seed),
        check_gns_equivalence(grid, seed),
        check_revival_formulas(seed),
        check_closed_system_bound(seed),
        check_povm_sandwich(seed),
        check_qr_factorization(seed),
        check_reduced_dynamics_routes(seed),
        check_markov_identities(seed),
    ]
