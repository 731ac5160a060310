"""Strategy selection by value of computation.

Each strategy carries Gaussian posteriors over the weights mapping task
features to payoff and to time cost.  The value of computation nets payoff
against time charged at the opportunity cost -- average reward per unit time
so far.  Selection is posterior sampling: draw weights, score every strategy,
play the argmax.  A learned value-of-control model with feature-control
interactions is included for the control-selection variant.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch


@dataclass
class WeightPosterior:
    """Gaussian belief over a linear weight vector under known noise."""

    mean: np.ndarray
    covariance: np.ndarray
    noise_variance: float = 1.0

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float)
        self.covariance = np.asarray(self.covariance, dtype=float)
        if self.mean.ndim != 1:
            raise ValueError("mean must be a vector")
        if self.covariance.shape != (self.mean.size, self.mean.size):
            raise DimensionMismatch(
                f"covariance {self.covariance.shape} does not fit mean of size {self.mean.size}")
        if not np.allclose(self.covariance, self.covariance.T, atol=1e-9):
            raise ValueError("covariance must be symmetric")
        if self.noise_variance <= 0:
            raise ValueError("noise_variance must be positive")

    @property
    def dim(self) -> int:
        return self.mean.size

    @classmethod
    def standard(cls, dim: int, prior_variance: float = 1.0,
                 noise_variance: float = 1.0) -> "WeightPosterior":
        return cls(np.zeros(dim), np.eye(dim) * prior_variance, noise_variance)

    def sample(self, rng) -> np.ndarray:
        # svd handles rank-deficient covariance; a collapsed posterior
        # returns its mean exactly.
        return rng.multivariate_normal(self.mean, self.covariance,
                                       check_valid="ignore", method="svd")


def posterior_update(posterior: WeightPosterior, features: np.ndarray,
                     observation: float) -> WeightPosterior:
    """Condition the weight belief on one observed (features, value) pair.

    Rank-one update: no matrix inversion, so collapsed or flat directions are
    handled exactly.  Zero features leave the belief unchanged.
    """
    f = np.asarray(features, dtype=float)
    if f.shape != posterior.mean.shape:
        raise DimensionMismatch(
            f"features shape {f.shape} does not match weight dim {posterior.mean.shape}")
    sf = posterior.covariance @ f
    denom = posterior.noise_variance + f @ sf
    gain = sf / denom
    mean = posterior.mean + gain * (observation - f @ posterior.mean)
    cov = posterior.covariance - np.outer(gain, sf)
    cov = (cov + cov.T) / 2.0
    return WeightPosterior(mean, cov, posterior.noise_variance)


def voc_estimate(utility_weights: np.ndarray, time_weights: np.ndarray,
                 features: np.ndarray, gamma: float) -> float:
    """Expected payoff minus time cost charged at the opportunity rate."""
    u = np.asarray(utility_weights, dtype=float)
    t = np.asarray(time_weights, dtype=float)
    f = np.asarray(features, dtype=float)
    if u.shape != f.shape or t.shape != f.shape:
        raise DimensionMismatch("weights and features must share a shape")
    return float(u @ f - gamma * (t @ f))


@dataclass
class BanditState:
    """Per-strategy payoff and time beliefs plus the running opportunity cost."""

    utility: list[WeightPosterior]
    time: list[WeightPosterior]
    cumulative_reward: float = 0.0
    cumulative_time: float = 0.0
    gamma_prior: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if len(self.utility) != len(self.time):
            raise ValueError("utility and time posterior lists must align")
        if self.cumulative_time < 0:
            raise ValueError("cumulative_time must be nonnegative")
        if self.gamma_prior[1] <= 0:
            raise ValueError("gamma pseudo-time must be positive")

    @classmethod
    def create(cls, num_strategies: int, feature_dim: int, prior_variance: float = 1.0,
               noise_variance: float = 1.0,
               gamma_prior: tuple[float, float] = (0.0, 1.0)) -> "BanditState":
        make = lambda: WeightPosterior.standard(feature_dim, prior_variance, noise_variance)
        return cls(utility=[make() for _ in range(num_strategies)],
                   time=[make() for _ in range(num_strategies)],
                   gamma_prior=gamma_prior)

    @property
    def num_strategies(self) -> int:
        return len(self.utility)

    @property
    def gamma(self) -> float:
        """Opportunity cost: average reward per unit time, prior-smoothed so
        it is defined before the first observation."""
        pr, pt = self.gamma_prior
        return (self.cumulative_reward + pr) / (self.cumulative_time + pt)


def update_gamma(state: BanditState, reward: float, elapsed: float) -> float:
    if elapsed <= 0:
        raise ValueError("elapsed must be positive")
    state.cumulative_reward += reward
    state.cumulative_time += elapsed
    return state.gamma


def observe(state: BanditState, strategy: int, features: np.ndarray,
            utility: float, elapsed: float) -> float:
    """Fold one play's outcome into the strategy's beliefs and the
    opportunity cost.  Returns the refreshed gamma."""
    state.utility[strategy] = posterior_update(state.utility[strategy], features, utility)
    state.time[strategy] = posterior_update(state.time[strategy], features, elapsed)
    return update_gamma(state, utility, elapsed)


def sample_vocs(state: BanditState, features: np.ndarray, gamma: float,
                rng) -> np.ndarray:
    """One posterior sample of the value of computation for every strategy."""
    vocs = np.empty(state.num_strategies)
    for i in range(state.num_strategies):
        wu = state.utility[i].sample(rng)
        wt = state.time[i].sample(rng)
        vocs[i] = voc_estimate(wu, wt, features, gamma)
    return vocs


def thompson_select(state: BanditState, features: np.ndarray, gamma: float,
                    rng) -> int:
    """Posterior-sampling choice: argmax of one sampled value-of-computation
    vector, first index winning ties."""
    return int(np.argmax(sample_vocs(state, features, gamma, rng)))


def run_bandit_episodes(env, state: BanditState, episodes: int, rng) -> list[dict]:
    """Play the environment for a number of episodes, learning as we go.

    Each record carries the sampled scores, the chosen strategy, the observed
    payoff and duration, the refreshed gamma, and the true net values of the
    chosen and best strategies (under the pre-choice gamma) so regret can be
    read straight off the trace.
    """
    records = []
    for episode in range(episodes):
        feats = env.features(rng)
        gamma = state.gamma
        vocs = sample_vocs(state, feats, gamma, rng)
        chosen = int(np.argmax(vocs))
        reward, elapsed = env.pull(chosen, feats, rng)
        true_vocs = [env.true_voc(a, feats, gamma) for a in range(state.num_strategies)]
        gamma_after = observe(state, chosen, feats, reward, elapsed)
        records.append({
            "episode": episode,
            "features": [float(x) for x in np.atleast_1d(feats)],
            "sampled_vocs": [float(v) for v in vocs],
            "chosen": chosen,
            "reward": float(reward),
            "elapsed": float(elapsed),
            "gamma": float(gamma_after),
            "true_voc_chosen": float(true_vocs[chosen]),
            "true_voc_best": float(max(true_vocs)),
        })
    return records


@dataclass
class LvocWeights:
    """Learned value-of-control model: linear in state features and control
    signals with a bilinear interaction, less effort and time costs."""

    bias: float
    state_weights: np.ndarray
    control_weights: np.ndarray
    interaction_weights: np.ndarray
    time_weight: float = 0.0

    def __post_init__(self):
        self.state_weights = np.asarray(self.state_weights, dtype=float)
        self.control_weights = np.asarray(self.control_weights, dtype=float)
        self.interaction_weights = np.asarray(self.interaction_weights, dtype=float)
        expected = (self.state_weights.size, self.control_weights.size)
        if self.interaction_weights.shape != expected:
            raise DimensionMismatch(
                f"interaction weights {self.interaction_weights.shape}, expected {expected}")


def lvoc_value(weights: LvocWeights, state_features: np.ndarray, control: np.ndarray,
               effort_cost: float = 0.0, elapsed: float = 0.0) -> float:
    f = np.asarray(state_features, dtype=float)
    c = np.asarray(control, dtype=float)
    if f.shape != weights.state_weights.shape:
        raise DimensionMismatch(f"state features shape {f.shape}")
    if c.shape != weights.control_weights.shape:
        raise DimensionMismatch(f"control shape {c.shape}")
    return float(weights.bias + weights.state_weights @ f + weights.control_weights @ c
                 + f @ weights.interaction_weights @ c
                 - effort_cost - weights.time_weight * elapsed)


def control_grid(dim: int, resolution: int) -> np.ndarray:
    """All control vectors on a uniform [0, 1] lattice, row per candidate."""
    if dim < 1 or resolution < 2:
        raise ValueError("need dim >= 1 and resolution >= 2")
    axis = np.linspace(0.0, 1.0, resolution)
    return np.array(list(itertools.product(axis, repeat=dim)))


def lvoc_select(weights: LvocWeights, state_features: np.ndarray,
                candidates: np.ndarray, effort_cost_fn=None,
                elapsed: float = 0.0) -> tuple[int, float]:
    """Best control among candidates by learned value; first-row tie break."""
    best_idx, best_val = 0, -np.inf
    for idx, control in enumerate(candidates):
        effort = effort_cost_fn(control) if effort_cost_fn is not None else 0.0
        val = lvoc_value(weights, state_features, control, effort, elapsed)
        if val > best_val:
            best_idx, best_val = idx, val
    return best_idx, best_val
