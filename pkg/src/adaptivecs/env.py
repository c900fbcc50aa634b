"""Compression environment: one step = compress a datum, recover, score.

The agent's state is the datum itself; the action is the compression
ratio. The reward is the compression score of the chosen ratio and the
round-trip RMSE, so higher is better and the best ratio depends on how
compressible each datum is.
"""

import time

import numpy as np

from ._validation import check_rng
from .codec import CsCodec, ScoreParams, compression_score, rmse
from .data import Dataset


class StepResult:
    """Outcome of compressing one datum at one ratio."""

    __slots__ = ("ratio", "m", "error", "reward")

    def __init__(self, ratio, m, error, reward):
        self.ratio = float(ratio)
        self.m = int(m)
        self.error = float(error)
        self.reward = float(reward)

    def __repr__(self):
        return (
            f"StepResult(ratio={self.ratio:.3f}, m={self.m}, "
            f"error={self.error:.4f}, reward={self.reward:.4f})"
        )


class CompressionEnv:
    """Draw data, compress at an agent-chosen ratio, reward the choice.

    Parameters
    ----------
    dataset : Dataset
        Source of signals; rows are the agent states.
    codec : CsCodec or None
        Compressor; a default one is built for the dataset width.
    score_params : ScoreParams
        Coefficients of the reward score.
    random_state : int, Generator or None
        Drives the sampling order only; the codec has its own seed.
    """

    def __init__(self, dataset, codec=None, score_params=None, random_state=None):
        if not isinstance(dataset, Dataset):
            dataset = Dataset(np.asarray(dataset))
        self.dataset = dataset
        self.codec = CsCodec(n=dataset.n_features) if codec is None else codec
        if self.codec.n != dataset.n_features:
            raise ValueError(
                f"codec is sized for n={self.codec.n}, dataset has "
                f"{dataset.n_features} features"
            )
        self.score_params = ScoreParams() if score_params is None else score_params
        self._rng = check_rng(random_state)

    @property
    def n_features(self):
        return self.dataset.n_features

    def draw(self):
        """One random datum: (row index, signal)."""
        i = int(self._rng.integers(self.dataset.n_samples))
        return i, self.dataset.X[i]

    def draw_indices(self, count):
        """A batch of random row indices from the sampling stream."""
        return self._rng.integers(self.dataset.n_samples, size=int(count))

    def timed_step(self, x, ratio):
        """Like ``step`` but also returns compress and recover wall times."""
        t0 = time.perf_counter()
        compressed = self.codec.compress(x, ratio)
        t1 = time.perf_counter()
        x_hat = self.codec.recover(compressed)
        t2 = time.perf_counter()
        err = rmse(x, x_hat)
        reward = compression_score(ratio, err, self.score_params)
        return StepResult(ratio, compressed.m, err, reward), t1 - t0, t2 - t1

    def step(self, x, ratio):
        """Compress ``x`` at ``ratio``, recover, and score the round trip."""
        return self.timed_step(x, ratio)[0]

    def policy_results(self, states, ratios):
        """StepResult of applying ``ratios[i]`` to ``states[i]``, per row."""
        states = np.atleast_2d(np.asarray(states, dtype=np.float64))
        ratios = np.atleast_1d(np.asarray(ratios, dtype=np.float64))
        if ratios.size != states.shape[0]:
            raise ValueError(f"{states.shape[0]} states but {ratios.size} ratios")
        return [self.step(x, float(c)) for x, c in zip(states, ratios)]

    def policy_rewards(self, states, ratios):
        """Reward of applying ``ratios[i]`` to ``states[i]``, per row."""
        return np.array([r.reward for r in self.policy_results(states, ratios)])

    def evaluate_policy(self, agent):
        """Mean reward of the agent's greedy ratios over the whole dataset.

        Deterministic given the agent parameters and the codec seed; no
        exploration and no sampling stream involved.
        """
        states = self.dataset.X
        rewards = self.policy_rewards(states, agent.predict(states))
        return float(np.mean(rewards))
