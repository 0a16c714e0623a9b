"""The two base learners the switch controller arbitrates between.

``IndependentQ`` is per-agent tabular Q-learning on local observations:
each agent keeps its own table and receives the undifferentiated team
reward. ``MonotonicJointQ`` is a centralized learner over the global state
whose joint value is a nonnegative-weighted sum of per-agent utilities,

    Q_tot(s, a) = bias(s) + sum_i weight(s, i) * utility_i(s, a_i),

the minimal function class in which the greedy joint action decomposes
into per-agent utility argmaxes (and which therefore cannot represent
payoffs that reward strictly joint deviations). Both learners are
off-policy and train from arbitrary replayed transitions.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .tables import KeyIndex, Table2D, Table3D


@dataclass(frozen=True)
class Schedule:
    """Linear decay from ``start`` to ``end`` over ``decay_steps``."""

    start: float
    end: float
    decay_steps: int

    def value(self, t):
        if t >= self.decay_steps or self.decay_steps <= 0:
            return self.end
        return self.start + (self.end - self.start) * (t / self.decay_steps)


def argmax_lowest(row, n=None):
    """Index of the largest entry, lowest index on ties."""
    if n is not None:
        row = row[:n]
    return int(row.argmax())


def mix(utilities, weights, bias):
    """Monotonic combination: bias + sum_i weights[i] * utilities[i]."""
    if len(utilities) != len(weights):
        raise ValueError("utilities and weights must have equal length")
    total = bias
    for u, w in zip(utilities, weights):
        if w < 0:
            raise ValueError("mixing weights must be non-negative")
        total = total + w * u
    return total


class IndependentQ:
    """Per-agent tabular Q-learning on local observation keys."""

    def __init__(self, action_counts, lr):
        self.action_counts = tuple(action_counts)
        self.lr = lr
        self.obs_index = [KeyIndex() for _ in action_counts]
        self.tables = [Table2D(n) for n in action_counts]

    def intern_obs(self, observations):
        """Intern one local observation per agent; returns index list."""
        keys = []
        for i, obs in enumerate(observations):
            k = self.obs_index[i].intern(obs)
            self.tables[i].ensure(k + 1)
            keys.append(k)
        return keys

    def act(self, obs_keys, epsilon, rng):
        """Independent epsilon-greedy action per agent, ties to lowest index."""
        joint = []
        for i, k in enumerate(obs_keys):
            n = self.action_counts[i]
            if epsilon > 0.0 and rng.random() < epsilon:
                joint.append(int(rng.integers(n)))
            else:
                joint.append(argmax_lowest(self.tables[i].row(k)))
        return tuple(joint)

    def update(self, batch, gamma):
        """Apply one Q-learning step per record, per agent.

        Every agent trains on the team reward of the record. The batch's
        per-agent columns are agent-major (see ReplayBuffer.sample).
        """
        for i in range(len(self.action_counts)):
            kernels.td_update(self.tables[i].data, batch["obs_keys"][i],
                              batch["actions"][i], batch["rewards"],
                              batch["next_obs_keys"][i],
                              batch["terminals"], self.lr, gamma)


class MonotonicJointQ:
    """Centralized learner with a per-state nonnegative-linear mixer.

    Utilities and bias start at zero and mixing weights at one, a symmetric
    point inside the representable class. Updates are normalized gradient
    steps: the step is scaled by the inverse squared gradient norm so the
    joint value itself moves by lr * (target - value) per record, which
    keeps the bilinear weight/utility coupling from diverging under
    bootstrapped targets. Weights are clamped at zero after every step.
    """

    def __init__(self, action_counts, lr, value_bounds=(-1e300, 1e300)):
        self.action_counts = tuple(action_counts)
        self.n_agents = len(self.action_counts)
        self.lr = lr
        self.value_bounds = value_bounds
        self.state_index = KeyIndex()
        self.utilities = Table3D(self.n_agents, max(self.action_counts))
        self.weights = Table2D(self.n_agents, fill=1.0)
        self.bias = Table2D(1)
        self._counts = np.asarray(self.action_counts, dtype=np.int64)

    def intern_state(self, state):
        k = self.state_index.intern(state)
        self.utilities.ensure(k + 1)
        self.weights.ensure(k + 1)
        self.bias.ensure(k + 1)
        return k

    def act(self, state_key, epsilon, rng):
        """Epsilon-greedy around the decomposed greedy joint action.

        With nonnegative weights the greedy joint action of Q_tot is the
        tuple of per-agent utility argmaxes, so each agent's coordinate is
        chosen from its own utility row (ties to lowest index).
        """
        joint = []
        for i, n in enumerate(self.action_counts):
            if epsilon > 0.0 and rng.random() < epsilon:
                joint.append(int(rng.integers(n)))
            else:
                joint.append(argmax_lowest(self.utilities.data[i, state_key], n))
        return tuple(joint)

    def greedy_action(self, state_key):
        return tuple(argmax_lowest(self.utilities.data[i, state_key], n)
                     for i, n in enumerate(self.action_counts))

    def q_tot(self, state_key, joint_action):
        """Mixed joint value of one (state, joint action) pair."""
        utilities = [self.utilities.data[i, state_key, a]
                     for i, a in enumerate(joint_action)]
        return float(mix(utilities, self.weights.row(state_key),
                         self.bias.row(state_key)[0]))

    def update(self, batch, gamma):
        kernels.mix_update(self.utilities.data, self._counts,
                           self.weights.data, self.bias.data[:, 0],
                           batch["state_keys"], batch["actions"],
                           batch["rewards"], batch["next_state_keys"],
                           batch["terminals"], self.lr, gamma,
                           self.value_bounds[0], self.value_bounds[1])
