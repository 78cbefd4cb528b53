import numpy as np
import pytest

from dynent.alf import (
    EntropySequence,
    alf_closed_form,
    entropy_sequence,
    finite_size_bound,
    povm_search,
    qr_lower_bound,
    rate_estimate,
)
from dynent.collision import (
    TRIVIAL_INTERACTION,
    CollisionModel,
    random_povm,
    reference_povm,
)
from dynent.envchain import block_entropy, build_env, entropy_rate, mutual_information

TWO_LOG_TWO = 2 * np.log(2)


def fig_model(delta):
    return CollisionModel(env=build_env(0.25, 0.1, delta))


class TestEntropySequence:
    def test_closed_form_values(self):
        model = fig_model(0.0)
        seq = entropy_sequence(model, n_max=4)
        for k, s in enumerate(seq.values, start=1):
            h = block_entropy(model.env, k - 1) if k > 1 else 0.0
            assert s == pytest.approx(TWO_LOG_TWO + h, abs=1e-12)

    def test_closed_and_brute_paths_agree(self):
        model = fig_model(0.13)
        closed = entropy_sequence(model, n_max=4)
        brute = entropy_sequence(model, n_max=4, povm=reference_povm(model.rho_S),
                                 method="brute")
        assert np.abs(closed.values - brute.values).max() < 1e-9

    def test_trivial_interaction_bounded(self):
        model = CollisionModel(env=build_env(0.25, 0.1, 0.1),
                               interaction=TRIVIAL_INTERACTION)
        seq = entropy_sequence(model, n_max=5, povm=random_povm(np.random.default_rng(2)),
                               method="brute")
        assert seq.values.max() <= TWO_LOG_TWO + 1e-9

    def test_extreme_point_plateau(self):
        seq = entropy_sequence(CollisionModel(env=build_env(0.5, 0.0, 0.5)), n_max=6)
        assert seq.values[0] == pytest.approx(TWO_LOG_TWO, abs=1e-12)
        assert np.allclose(seq.values[1:], TWO_LOG_TWO + np.log(2), atol=1e-12)

    def test_first_differences_constant_from_three(self):
        seq = entropy_sequence(fig_model(0.2), n_max=6)
        diffs = np.diff(seq.values)
        assert np.abs(diffs[1:] - diffs[1]).max() < 1e-12

    def test_closed_path_needs_maximally_mixed(self):
        model = CollisionModel(env=build_env(0.25, 0.1, 0.1),
                               rho_S=np.diag([0.6, 0.4]).astype(complex))
        with pytest.raises(ValueError, match="I/2"):
            entropy_sequence(model, n_max=3)


class TestRateEstimate:
    def _seq(self, values):
        return EntropySequence(np.asarray(values, dtype=float), "test", (0, 0, 0))

    def test_constant(self):
        seq = self._seq([1.0, 1.0, 1.0, 1.0])
        assert rate_estimate(seq, "difference") == 0.0
        assert rate_estimate(seq, "slope") == pytest.approx(0.0, abs=1e-12)

    def test_affine(self):
        h = 0.37
        seq = self._seq([2 + h * k for k in range(1, 6)])
        assert rate_estimate(seq, "difference") == pytest.approx(h, abs=1e-12)
        assert rate_estimate(seq, "slope") == pytest.approx(h, abs=1e-12)

    def test_too_short(self):
        with pytest.raises(ValueError, match="too short"):
            rate_estimate(self._seq([1.0, 2.0]))

    def test_reference_rate_matches_closed_form(self):
        model = fig_model(0.1)
        seq = entropy_sequence(model, n_max=5)
        assert rate_estimate(seq, "difference") == pytest.approx(
            alf_closed_form(0.25, 0.1, 0.1), abs=1e-9)

    def test_estimators_agree_on_reference_sequences(self):
        for d in (0.0, 0.12, 0.25):
            seq = entropy_sequence(fig_model(d), n_max=4)
            diff = rate_estimate(seq, "difference")
            # drop the k=1 offset point: the sequence is affine only from k >= 2
            tail = EntropySequence(seq.values[1:], seq.povm_label, seq.params)
            slope = rate_estimate(tail, "slope")
            assert abs(diff - slope) < 1e-9


class TestClosedFormRate:
    def test_iid_value(self):
        env = build_env(0.25, 0.1, 0.0)
        assert alf_closed_form(0.25, 0.1, 0.0) == pytest.approx(
            block_entropy(env, 1), abs=1e-13)

    def test_extreme_point_zero(self):
        assert alf_closed_form(0.5, 0.0, 0.5) == pytest.approx(0.0, abs=1e-15)

    def test_maximal_correlation(self):
        env = build_env(0.25, 0.1, 0.25)
        expected = block_entropy(env, 1) - 0.25 * np.log(2)
        assert alf_closed_form(0.25, 0.1, 0.25) == pytest.approx(expected, abs=1e-12)

    def test_identity_with_conditional_entropy_grid(self):
        for (p, r) in ((0.25, 0.1), (0.4, 0.05), (0.1, 0.3), (0.5, 0.0)):
            for d in np.linspace(0.0, p, 25):
                env = build_env(p, r, float(d))
                assert abs(alf_closed_form(p, r, float(d)) - entropy_rate(env)) < 1e-12

    def test_identity_with_mutual_information(self):
        for d in np.linspace(0.0, 0.25, 20):
            env = build_env(0.25, 0.1, float(d))
            expected = block_entropy(env, 1) - mutual_information(env)
            assert abs(alf_closed_form(0.25, 0.1, float(d)) - expected) < 1e-10

    def test_monotone_decreasing_in_delta(self):
        vals = [alf_closed_form(0.25, 0.1, float(d)) for d in np.linspace(0, 0.25, 40)]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))

    def test_rejects_inadmissible(self):
        with pytest.raises(ValueError):
            alf_closed_form(0.25, 0.1, 0.3)


class TestQrLowerBound:
    def test_identity_dynamics(self):
        # p = r = 0 keeps only the identity collision: pure output, zero entropy
        assert qr_lower_bound(build_env(0.0, 0.0, 0.0)) == pytest.approx(0.0, abs=1e-12)

    def test_iid_equals_rate(self):
        env = build_env(0.25, 0.1, 0.0)
        assert qr_lower_bound(env) == pytest.approx(entropy_rate(env), abs=1e-12)

    def test_strict_gap_with_correlations(self):
        env = build_env(0.25, 0.1, 0.25)
        assert qr_lower_bound(env) > alf_closed_form(0.25, 0.1, 0.25) + 0.1

    def test_equals_marginal_entropy(self):
        for d in (0.0, 0.1, 0.25):
            env = build_env(0.25, 0.1, d)
            assert qr_lower_bound(env) == pytest.approx(block_entropy(env, 1), abs=1e-12)


class TestPovmSearch:
    def test_reference_attains_chain_rate(self):
        res = povm_search(fig_model(0.1), n=3, trials=5, seed=11)
        assert res.reference_rate == pytest.approx(res.chain_rate, abs=1e-9)
        assert res.max_bound_excess <= 1e-9

    def test_seed_reproducibility(self):
        a = povm_search(fig_model(0.15), n=2, trials=6, seed=42)
        b = povm_search(fig_model(0.15), n=2, trials=6, seed=42)
        assert np.array_equal(a.rates, b.rates)
        assert a.best_index == b.best_index

    def test_random_povms_stay_below_bound(self):
        res = povm_search(fig_model(0.2), n=2, trials=10, seed=3)
        assert res.max_bound_excess <= 1e-9
        assert res.best_rate <= res.chain_rate + 1e-9


class TestFiniteSizeBound:
    def test_formula(self):
        env = build_env(0.25, 0.1, 0.12)
        for n in range(0, 5):
            h = block_entropy(env, n) if n else 0.0
            assert finite_size_bound(env, n) == pytest.approx(h + TWO_LOG_TWO, abs=1e-13)

    def test_bounds_random_povm_sequences(self):
        model = fig_model(0.12)
        rng = np.random.default_rng(31)
        for _ in range(3):
            seq = entropy_sequence(model, n_max=3, povm=random_povm(rng), method="brute")
            for k, s in enumerate(seq.values, start=1):
                assert s <= finite_size_bound(model.env, k - 1) + 1e-9


def test_closed_path_word_cap():
    with pytest.raises(ValueError, match="n_max"):
        entropy_sequence(fig_model(0.1), n_max=12)
