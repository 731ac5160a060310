import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mgv.bandit import (BanditState, LvocWeights, WeightPosterior, control_grid,
                        lvoc_select, lvoc_value, observe, posterior_update,
                        run_bandit_episodes, sample_vocs, thompson_select,
                        update_gamma, voc_estimate)
from mgv.envs import StationaryBanditEnvironment
from mgv.errors import DimensionMismatch


def oracle_update(mean, cov, noise, f, y):
    """Independent conjugate update in precision form (needs invertible cov)."""
    prec = np.linalg.inv(cov)
    prec_new = prec + np.outer(f, f) / noise
    cov_new = np.linalg.inv(prec_new)
    mean_new = cov_new @ (prec @ mean + np.asarray(f) * y / noise)
    return mean_new, cov_new


# --- conjugate update -------------------------------------------------------

def test_worked_scalar_update():
    post = posterior_update(WeightPosterior.standard(1), [1.0], 1.0)
    assert post.mean[0] == pytest.approx(0.5, abs=1e-12)
    assert post.covariance[0, 0] == pytest.approx(0.5, abs=1e-12)


def test_update_matches_precision_form_oracle():
    rng = np.random.default_rng(0)
    for _ in range(100):
        d = int(rng.integers(1, 5))
        post = WeightPosterior.standard(d, prior_variance=float(rng.uniform(0.5, 2.0)),
                                        noise_variance=float(rng.uniform(0.5, 2.0)))
        mean, cov = post.mean.copy(), post.covariance.copy()
        for _ in range(int(rng.integers(1, 6))):
            f = rng.normal(size=d)
            y = float(rng.normal())
            post = posterior_update(post, f, y)
            mean, cov = oracle_update(mean, cov, post.noise_variance, f, y)
        assert np.allclose(post.mean, mean, atol=1e-9)
        assert np.allclose(post.covariance, cov, atol=1e-9)


def test_zero_features_leave_posterior_unchanged():
    post = WeightPosterior.standard(3)
    out = posterior_update(post, [0.0, 0.0, 0.0], 5.0)
    assert np.array_equal(out.mean, post.mean)
    assert np.array_equal(out.covariance, post.covariance)


def test_variance_never_increases_along_any_direction():
    rng = np.random.default_rng(1)
    for _ in range(100):
        d = int(rng.integers(1, 4))
        post = WeightPosterior.standard(d)
        for _ in range(int(rng.integers(1, 8))):
            before = post.covariance.copy()
            post = posterior_update(post, rng.normal(size=d), float(rng.normal()))
            for _ in range(5):
                v = rng.normal(size=d)
                assert v @ post.covariance @ v <= v @ before @ v + 1e-12


def test_update_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        posterior_update(WeightPosterior.standard(2), [1.0], 0.0)


def test_posterior_validation():
    with pytest.raises(ValueError):
        WeightPosterior(np.zeros(2), np.array([[1.0, 0.5], [0.4, 1.0]]))
    with pytest.raises(ValueError):
        WeightPosterior(np.zeros(1), np.eye(1), noise_variance=0.0)


def test_collapsed_posterior_samples_its_mean():
    post = WeightPosterior(np.array([1.5, -2.0]), np.zeros((2, 2)))
    samples = {tuple(post.sample(np.random.default_rng(s))) for s in range(5)}
    assert samples == {(1.5, -2.0)}


# --- value of computation ---------------------------------------------------

def test_voc_estimate_formula():
    voc = voc_estimate([1.0, 2.0], [0.5, 0.5], [1.0, 1.0], gamma=2.0)
    assert voc == pytest.approx(3.0 - 2.0 * 1.0)


def test_voc_estimate_zero_gamma_is_pure_utility():
    assert voc_estimate([0.7], [9.9], [1.0], 0.0) == pytest.approx(0.7)


def test_voc_estimate_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        voc_estimate([1.0, 2.0], [0.5], [1.0], 1.0)


# --- opportunity cost -------------------------------------------------------

def test_gamma_prior_smoothing_before_data():
    state = BanditState.create(2, 1, gamma_prior=(1.0, 2.0))
    assert state.gamma == pytest.approx(0.5)


def test_update_gamma_accumulates():
    state = BanditState.create(1, 1)
    g = update_gamma(state, reward=3.0, elapsed=2.0)
    assert g == pytest.approx(3.0 / 3.0)  # (3 + 0) / (2 + 1)
    g = update_gamma(state, reward=1.0, elapsed=1.0)
    assert g == pytest.approx(4.0 / 4.0)


def test_update_gamma_rejects_nonpositive_time():
    with pytest.raises(ValueError):
        update_gamma(BanditState.create(1, 1), 1.0, 0.0)


# --- Thompson selection -----------------------------------------------------

def test_zero_covariance_reduces_to_greedy_argmax():
    rng_out = np.random.default_rng(42)
    for trial in range(200):
        k, d = int(rng_out.integers(2, 6)), int(rng_out.integers(1, 4))
        state = BanditState.create(k, d)
        feats = rng_out.normal(size=d)
        for arm in range(k):
            state.utility[arm] = WeightPosterior(rng_out.normal(size=d),
                                                 np.zeros((d, d)))
            state.time[arm] = WeightPosterior(rng_out.normal(size=d),
                                              np.zeros((d, d)))
        gamma = float(rng_out.uniform(0, 2))
        greedy = int(np.argmax([
            voc_estimate(state.utility[a].mean, state.time[a].mean, feats, gamma)
            for a in range(k)]))
        chosen = thompson_select(state, feats, gamma, np.random.default_rng(trial))
        assert chosen == greedy


def test_sampled_vocs_vary_under_uncertainty():
    state = BanditState.create(2, 1)
    draws = {tuple(sample_vocs(state, np.ones(1), 0.0, np.random.default_rng(s)))
             for s in range(5)}
    assert len(draws) == 5


def test_observe_updates_both_posteriors_and_gamma():
    state = BanditState.create(2, 1)
    g = observe(state, 0, np.ones(1), utility=1.0, elapsed=2.0)
    assert state.utility[0].mean[0] == pytest.approx(0.5)
    assert state.time[0].mean[0] == pytest.approx(1.0)
    assert state.utility[1].mean[0] == 0.0
    assert g == pytest.approx((1.0 + 0.0) / (2.0 + 1.0))


def test_two_arm_learning_prefers_the_better_arm():
    env = StationaryBanditEnvironment(utilities=[0.8, 0.2], times=[1.0, 1.0],
                                      reward_noise=0.1)
    state = BanditState.create(2, 1)
    records = run_bandit_episodes(env, state, 500, np.random.default_rng(0))
    last = [r["chosen"] for r in records[-100:]]
    assert last.count(0) > 80


def test_episode_records_expose_regret_terms():
    env = StationaryBanditEnvironment(utilities=[1.0, 0.0], times=[1.0, 1.0])
    state = BanditState.create(2, 1)
    (rec,) = run_bandit_episodes(env, state, 1, np.random.default_rng(0))
    assert rec["true_voc_best"] >= rec["true_voc_chosen"]
    assert set(rec) >= {"episode", "chosen", "reward", "elapsed", "gamma",
                        "sampled_vocs", "true_voc_chosen", "true_voc_best"}


# --- learned value of control ----------------------------------------------

def weights_for_test():
    return LvocWeights(bias=0.5,
                       state_weights=np.array([1.0, -1.0]),
                       control_weights=np.array([2.0]),
                       interaction_weights=np.array([[0.5], [0.25]]),
                       time_weight=0.1)


def test_lvoc_value_matches_manual_expansion():
    w = weights_for_test()
    f = np.array([0.2, 0.4])
    c = np.array([0.8])
    manual = (0.5 + (1.0 * 0.2 - 1.0 * 0.4) + 2.0 * 0.8
              + (0.2 * 0.5 + 0.4 * 0.25) * 0.8 - 0.3 - 0.1 * 2.0)
    assert lvoc_value(w, f, c, effort_cost=0.3, elapsed=2.0) == pytest.approx(manual)


def test_lvoc_value_dimension_checks():
    w = weights_for_test()
    with pytest.raises(DimensionMismatch):
        lvoc_value(w, [0.1], [0.5])
    with pytest.raises(DimensionMismatch):
        lvoc_value(w, [0.1, 0.2], [0.5, 0.6])
    with pytest.raises(DimensionMismatch):
        LvocWeights(0.0, np.ones(2), np.ones(2), np.ones((2, 3)))


def test_control_grid_shape_and_range():
    grid = control_grid(2, 3)
    assert grid.shape == (9, 2)
    assert grid.min() == 0.0 and grid.max() == 1.0


def test_lvoc_select_picks_the_best_candidate():
    w = LvocWeights(0.0, np.zeros(1), np.array([1.0]), np.zeros((1, 1)))
    grid = control_grid(1, 5)
    idx, val = lvoc_select(w, np.zeros(1), grid)
    assert np.array_equal(grid[idx], [1.0])
    assert val == pytest.approx(1.0)


def test_lvoc_select_effort_cost_moderates_control():
    w = LvocWeights(0.0, np.zeros(1), np.array([1.0]), np.zeros((1, 1)))
    grid = control_grid(1, 11)
    idx, _ = lvoc_select(w, np.zeros(1), grid,
                         effort_cost_fn=lambda c: 2.0 * float(c @ c))
    # d/dc (c - 2 c^2) = 0 at c = 0.25
    assert grid[idx][0] == pytest.approx(0.3, abs=0.1001)


@given(st.integers(0, 10_000))
@settings(max_examples=20, deadline=None)
def test_thompson_select_index_in_range(seed):
    state = BanditState.create(3, 2)
    idx = thompson_select(state, np.ones(2), 0.5, np.random.default_rng(seed))
    assert 0 <= idx < 3
