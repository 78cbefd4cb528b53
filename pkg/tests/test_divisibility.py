import numpy as np
import pytest

from dynent.collision import bloch_eigenvalues
from dynent.divisibility import (
    NonInvertible,
    analytic_thresholds,
    block_positivity_min,
    classify,
    extreme_dynamics_check,
    one_step_intertwiner,
    pauli_extension_apply,
    pauli_tensor_apply,
    propagator,
    tensor_square_margins,
    trace_distance_trajectory,
)
from dynent.envchain import build_env
from dynent.pauli import SIGMA, PauliMap


def qubit_states_from_bloch(v):
    X = sum(v[k - 1] * SIGMA[k] for k in (1, 2, 3))
    return (np.eye(2, dtype=complex) + X) / 2, (np.eye(2, dtype=complex) - X) / 2


class TestPropagator:
    def test_semigroup_one_step(self):
        # delta = 0 at generic (p, r): every one-step propagator is the map itself
        env = build_env(0.2, 0.1, 0.0)
        lam1 = bloch_eigenvalues(env, 1)
        for m in range(1, 5):
            prop = propagator(env, m, m + 1)
            assert isinstance(prop, PauliMap)
            assert np.allclose(prop.bloch, lam1, atol=1e-12)

    def test_noninvertible_third_axis_at_quarter(self):
        prop = propagator(build_env(0.25, 0.1, 0.1), 1, 2)
        assert isinstance(prop, NonInvertible)
        assert prop.zero_pattern == (False, False, True)

    def test_noninvertible_extreme_odd_steps(self):
        prop = propagator(build_env(0.5, 0.0, 0.5), 1, 2)
        assert isinstance(prop, NonInvertible)
        assert prop.zero_pattern == (True, True, False)

    def test_cocycle_identity(self):
        env = build_env(0.2, 0.1, 0.15)
        for (m, n, q) in [(1, 2, 3), (1, 3, 5), (2, 4, 6)]:
            a = propagator(env, m, n)
            b = propagator(env, n, q)
            c = propagator(env, m, q)
            assert np.abs(np.asarray(a.bloch) * np.asarray(b.bloch)
                          - np.asarray(c.bloch)).max() < 1e-12

    def test_bad_indices(self):
        with pytest.raises(ValueError):
            propagator(build_env(0.2, 0.1, 0.1), 2, 2)


class TestOneStepIntertwiner:
    def test_removable_third_axis(self):
        env = build_env(0.25, 0.1, 0.1)
        for n in (2, 3, 4):
            pm = one_step_intertwiner(env, n)
            assert pm is not None
            assert abs(pm.bloch[2]) < 1e-12  # canonical value 1 - 4p = 0

    def test_second_step_ratio_closed_form(self):
        # mu(2) = A + 4 p delta / A with A = 1 - 2(p + r)
        p, r, d = 0.25, 0.1, 0.12
        pm = one_step_intertwiner(build_env(p, r, d), 2)
        A = 1 - 2 * (p + r)
        assert pm.bloch[0] == pytest.approx(A + 4 * p * d / A, abs=1e-12)

    def test_genuine_noninvertibility(self):
        env = build_env(0.5, 0.0, 0.5)
        assert one_step_intertwiner(env, 2) is None

    def test_semigroup_with_vanishing_transverse(self):
        # A = 0 and delta = 0: l_1(n) = 0 identically, removable
        env = build_env(0.3, 0.2, 0.0)
        pm = one_step_intertwiner(env, 2)
        assert pm is not None
        assert np.allclose(pm.bloch, bloch_eigenvalues(env, 1), atol=1e-12)


class TestBlockPositivityMin:
    def test_identity_map(self):
        val = block_positivity_min(lambda M: M, restarts=8, seed=0)
        assert abs(val) < 1e-9

    def test_transposition_witness(self):
        def pt(M):
            return np.asarray(M).reshape(2, 2, 2, 2).transpose(2, 1, 0, 3).reshape(4, 4)

        val = block_positivity_min(pt, restarts=16, seed=1)
        assert val == pytest.approx(-0.5, abs=1e-9)

    def test_cp_map_nonnegative(self):
        pm = PauliMap.from_weights([0.4, 0.3, 0.2, 0.1])
        val = block_positivity_min(pauli_extension_apply(pm), restarts=16, seed=2)
        assert val >= -1e-9

    def test_choi_eigenvalue_recovered(self):
        # for map x id the minimum at a maximally entangled input is the
        # smallest mixture weight
        pm = PauliMap.from_bloch([0.8, 0.8, 0.0])
        expected = float(pm.weights.min())
        assert expected < 0
        val = block_positivity_min(pauli_extension_apply(pm), restarts=16, seed=3)
        assert val <= expected + 1e-9


class TestTensorCriterion:
    def test_margins_match_bell_eigenvalues(self):
        rng = np.random.default_rng(97)
        psi = np.zeros(4, dtype=complex)
        psi[0] = psi[3] = 1 / np.sqrt(2)
        for _ in range(10):
            pm = PauliMap.from_bloch(rng.uniform(-1, 1, size=3))
            apply_tt = pauli_tensor_apply(pm, pm)
            expected = tensor_square_margins(pm).min() / 4
            # every maximally entangled input realizes the smallest margin
            for k in range(4):
                vec = np.kron(SIGMA[k], SIGMA[0]) @ psi
                low = np.linalg.eigvalsh(apply_tt(np.outer(vec, vec.conj()))).min()
                assert low == pytest.approx(expected, abs=1e-10)

    def test_criterion_agrees_with_optimizer(self):
        for ratio in (0.3, 0.45, 0.55, 0.7, 0.95):
            env = build_env(0.25, 0.1, ratio * 0.25)
            pm = one_step_intertwiner(env, 2)
            exact = min(float(tensor_square_margins(pm).min()),
                        pm.positivity_margin())
            numeric = block_positivity_min(pauli_tensor_apply(pm, pm),
                                           restarts=24, seed=5)
            if exact < -1e-9:
                assert numeric < -1e-10
                assert numeric <= exact / 4 + 1e-9
            else:
                assert numeric >= -1e-9


class TestAnalyticThresholds:
    def test_fig_parameters(self):
        th = analytic_thresholds(0.25, 0.1)
        assert th["delta_cp"] == pytest.approx(0.06, abs=1e-15)
        assert th["delta_p"] == pytest.approx(0.21, abs=1e-15)
        expected_tensor = 0.3 * (1.4 - (1 - np.sqrt(0.5)) / 0.5) / 2
        assert th["delta_tensor"] == pytest.approx(expected_tensor, abs=1e-15)
        assert th["ratio_cp"] == pytest.approx(0.24, abs=1e-14)
        assert th["ratio_p"] == pytest.approx(0.84, abs=1e-14)
        assert th["ratio_tensor"] == pytest.approx(0.4885281374238570, abs=1e-12)

    def test_p_zero(self):
        th = analytic_thresholds(0.0, 0.3)
        assert th["delta_cp"] is None


class TestClassify:
    def test_iid_all_divisible(self):
        rep = classify(build_env(0.25, 0.1, 0.0), horizon=30)
        assert rep.cp_divisible and rep.tensor_p_divisible and rep.p_divisible
        assert rep.gns_p_divisible
        assert rep.region == "CP-div"
        assert all(v is None for v in rep.first_failure_step.values())

    def test_region_progression(self):
        regions = {}
        for ratio in (0.1, 0.35, 0.6, 0.95):
            rep = classify(build_env(0.25, 0.1, ratio * 0.25), horizon=50)
            regions[ratio] = rep.region
        assert regions == {0.1: "CP-div", 0.35: "P⊗P-div",
                           0.6: "P-div", 0.95: "non-P-div"}

    def test_first_failure_is_second_step(self):
        rep = classify(build_env(0.25, 0.1, 0.25), horizon=50)
        assert rep.first_failure_step["cp"] == 2
        assert rep.first_failure_step["p"] == 2
        assert rep.first_failure_step["gns_p"] == 2

    def test_gns_matches_cp_numerically(self):
        for ratio in (0.1, 0.3, 0.55, 0.8, 1.0):
            rep = classify(build_env(0.25, 0.1, ratio * 0.25), horizon=50)
            assert rep.cp_divisible == rep.gns_p_divisible
            if not rep.cp_divisible:
                # numeric witness reproduces the worst mixture weight
                assert rep.gns_min_eigenvalue == pytest.approx(
                    rep.margins["cp"], abs=1e-9)

    def test_fallback_on_extreme_point(self):
        rep = classify(build_env(0.5, 0.0, 0.5), horizon=20)
        assert rep.fallback_revival
        assert rep.noninvertible_step == 2
        assert not rep.p_divisible and not rep.cp_divisible
        assert len(rep.revival_steps) > 0

    def test_report_roundtrip(self):
        rep = classify(build_env(0.25, 0.1, 0.2), horizon=30)
        d = rep.to_dict()
        assert d["region"] == rep.region
        assert isinstance(d["first_failure_step"], dict)


class TestTraceDistance:
    def test_semigroup_contractive(self):
        env = build_env(0.25, 0.1, 0.0)
        rng = np.random.default_rng(101)
        for _ in range(10):
            v = rng.uniform(-1, 1, size=3)
            v *= 0.9 / np.linalg.norm(v)
            traj = trace_distance_trajectory(env, *qubit_states_from_bloch(v), 20)
            assert not traj.has_revivals

    def test_extreme_point_alternation(self):
        env = build_env(0.5, 0.0, 0.5)
        v = np.array([0.5, 0.4, 0.5])
        traj = trace_distance_trajectory(env, *qubit_states_from_bloch(v), 8)
        assert traj.revival_steps == (2, 4, 6, 8)
        norm = np.linalg.norm(v)
        # distances alternate between ||x|| and |x_3|
        assert np.allclose(traj.values[::2], norm, atol=1e-12)
        assert np.allclose(traj.values[1::2], abs(v[2]), atol=1e-12)

    def test_p_divisible_no_revivals(self):
        # delta/p = 0.7 sits in the P-divisible band
        env = build_env(0.25, 0.1, 0.7 * 0.25)
        rng = np.random.default_rng(103)
        for _ in range(50):
            v = rng.uniform(-1, 1, size=3)
            v *= rng.uniform(0.1, 0.95) / np.linalg.norm(v)
            traj = trace_distance_trajectory(env, *qubit_states_from_bloch(v), 40)
            assert not traj.has_revivals

    def test_non_p_divisible_shows_revivals(self):
        env = build_env(0.25, 0.1, 0.99 * 0.25)
        v = np.array([0.6, 0.6, 0.3])
        traj = trace_distance_trajectory(env, *qubit_states_from_bloch(v), 40)
        assert traj.has_revivals


class TestExtremeDynamics:
    def test_rejects_zero_component(self):
        with pytest.raises(ValueError, match="nonzero"):
            extreme_dynamics_check((1.0, 0.0, 1.0))

    def test_unit_diagonal(self):
        odd, even = extreme_dynamics_check((1.0, 1.0, 1.0))
        target = 2 * (np.sqrt(3) - 1)
        assert odd == pytest.approx(-target, abs=1e-12)
        assert even == pytest.approx(target, abs=1e-12)

    def test_matches_norm_formula_random(self):
        rng = np.random.default_rng(107)
        for _ in range(10):
            x = rng.uniform(0.2, 1.5, size=3) * rng.choice([-1, 1], size=3)
            odd, even = extreme_dynamics_check(x)
            target = 2 * (np.linalg.norm(x) - abs(x[2]))
            assert odd == pytest.approx(-target, abs=1e-11)
            assert even == pytest.approx(target, abs=1e-11)

    def test_z_aligned_limit(self):
        odd, even = extreme_dynamics_check((1e-8, 1e-8, 1.0))
        assert abs(odd) < 1e-9 and abs(even) < 1e-9


class TestMarginalFlags:
    def test_zero_weight_boundary_is_marginal(self):
        # with r = 0 and delta = 0 the one-step map has a vanishing weight:
        # CP margin sits exactly on the boundary
        rep = classify(build_env(0.25, 0.0, 0.0), horizon=20)
        assert rep.cp_divisible
        assert rep.marginal["cp"]
        assert abs(rep.margins["cp"]) <= 1e-10

    def test_interior_point_not_marginal(self):
        rep = classify(build_env(0.25, 0.1, 0.02), horizon=20)
        assert rep.cp_divisible and not rep.marginal["cp"]
