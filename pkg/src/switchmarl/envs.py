"""Environment contract and 2x2 matrix-game environments.

Every environment in this package is a seeded, episodic, fully cooperative
multi-agent decision process: all agents act simultaneously on a shared
global state, receive one common team reward, and each agent additionally
gets a local observation. Global state and local observations are hashable
keys so tabular learners can index on them directly.

The matrix games are one-state, one-step coordination games whose payoff is
an entrywise blend of a coupled game (agents' rewards depend on each other)
and a decoupled game (they do not), controlled by a coupling knob
``alpha`` in [0, 1]: ``alpha = 0`` is the fully coupled game, ``alpha = 1``
the fully decoupled one.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class EnvSpec:
    """Static description of an environment.

    Attributes:
        name: identifier for configs and reports.
        n_agents: number of agents (>= 2).
        action_counts: per-agent action-set sizes (each >= 2).
        state_count: number of global states, or -1 if not enumerated.
        episode_limit: hard cap on steps per episode.
        discount: discount factor in [0, 1).
    """

    name: str
    n_agents: int
    action_counts: tuple
    state_count: int
    episode_limit: int
    discount: float

    def __post_init__(self):
        if self.n_agents < 2:
            raise ValueError("need at least 2 agents")
        if any(c < 2 for c in self.action_counts):
            raise ValueError("every agent needs at least 2 actions")
        if len(self.action_counts) != self.n_agents:
            raise ValueError("action_counts length must equal n_agents")
        if not 0.0 <= self.discount < 1.0:
            raise ValueError("discount must lie in [0, 1)")
        if self.episode_limit < 1:
            raise ValueError("episode_limit must be positive")


@dataclass(frozen=True)
class StepOutcome:
    """Result of one environment step."""

    team_reward: float
    next_state: object
    observations: tuple
    terminal: bool


class Env:
    """Base class fixing the environment protocol.

    Subclasses implement ``_reset`` and ``_step``; this class enforces the
    shared contract (reset before step, no stepping a terminal episode,
    action ranges, observation arity, episode limit).
    """

    spec: EnvSpec

    def __init__(self, spec):
        self.spec = spec
        self._state = None
        self._steps = 0
        self._terminal = True

    def reset(self, seed):
        """Start a new episode, deterministically in ``seed``.

        Returns (state, observations).
        """
        state, obs = self._reset(seed)
        if len(obs) != self.spec.n_agents:
            raise AssertionError("observation count != n_agents")
        self._state = state
        self._steps = 0
        self._terminal = False
        return state, obs

    def step(self, joint_action):
        """Apply one joint action; returns a StepOutcome."""
        if self._terminal:
            raise RuntimeError("step() on a terminal episode; call reset()")
        if len(joint_action) != self.spec.n_agents:
            raise ValueError("joint action must have one entry per agent")
        for a, n in zip(joint_action, self.spec.action_counts):
            if not 0 <= a < n:
                raise ValueError(f"action {a} out of range [0, {n})")
        outcome = self._step(tuple(joint_action))
        self._steps += 1
        if self._steps >= self.spec.episode_limit and not outcome.terminal:
            outcome = StepOutcome(outcome.team_reward, outcome.next_state,
                                  outcome.observations, True)
        if len(outcome.observations) != self.spec.n_agents:
            raise AssertionError("observation count != n_agents")
        self._state = outcome.next_state
        self._terminal = outcome.terminal
        return outcome

    @property
    def state(self):
        return self._state

    @property
    def terminal(self):
        return self._terminal

    def focal_coords(self, state):
        """(x, y) cell used to key activation heatmaps; (0, 0) by default."""
        return (0, 0)

    def max_return(self):
        """Best achievable episode return, used to normalize scores."""
        raise NotImplementedError

    def value_bounds(self):
        """(low, high) bounds on any state's discounted value.

        Loose bounds are fine; they anchor bootstrapped targets for the
        centralized learner (see MonotonicJointQ.update).
        """
        raise NotImplementedError

    def _reset(self, seed):
        """Place the environment at a seed-determined initial state.

        Environments with stochastic spawns build their generator with
        ``np.random.default_rng(seed)``; deterministic ones may ignore it.
        """
        raise NotImplementedError

    def _step(self, joint_action):
        raise NotImplementedError


class PayoffMatrix:
    """2x2 grid of team rewards; row = agent 1's action, column = agent 2's."""

    def __init__(self, entries):
        arr = np.asarray(entries, dtype=float)
        if arr.shape != (2, 2):
            raise ValueError("payoff matrix must be 2x2")
        self.entries = arr

    def __getitem__(self, idx):
        return self.entries[idx]

    def __eq__(self, other):
        return isinstance(other, PayoffMatrix) and np.array_equal(self.entries, other.entries)

    def __repr__(self):
        return f"PayoffMatrix({self.entries.tolist()})"


def compose_matrix_game(coupled, decoupled, alpha):
    """Blend two payoff matrices entrywise.

    result[i][j] = alpha * decoupled[i][j] + (1 - alpha) * coupled[i][j]
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if coupled.entries.shape != decoupled.entries.shape:
        raise ValueError("payoff shape mismatch")
    return PayoffMatrix(alpha * decoupled.entries + (1.0 - alpha) * coupled.entries)


@dataclass(frozen=True)
class AlphaGameSpec:
    """A 2x2 team game family parameterized by the coupling knob alpha."""

    kind: str
    alpha: float
    coupled: PayoffMatrix = field(compare=False)
    decoupled: PayoffMatrix = field(compare=False)

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")

    def payoff(self):
        return compose_matrix_game(self.coupled, self.decoupled, self.alpha)


class MatrixGameEnv(Env):
    """One-state, one-step, 2-agent team game.

    Episodes have horizon 1: both agents pick an action, the team receives
    the payoff entry, and the episode terminates, so episode return equals
    payoff. Agents have no private information; each local observation is a
    constant null token. Rewards are deterministic by default; a zero-mean
    Gaussian noise hook exists for stochastic-reward experiments.
    """

    STATE = 0
    NULL_OBS = 0

    def __init__(self, name, payoff, discount=0.99, reward_noise=0.0):
        super().__init__(EnvSpec(name=name, n_agents=2, action_counts=(2, 2),
                                 state_count=1, episode_limit=1, discount=discount))
        self.payoff = payoff
        self.reward_noise = reward_noise
        self._rng = None

    def _reset(self, seed):
        if self.reward_noise > 0.0:
            self._rng = np.random.default_rng(seed)
        return self.STATE, (self.NULL_OBS, self.NULL_OBS)

    def _step(self, joint_action):
        r = float(self.payoff[joint_action[0], joint_action[1]])
        if self.reward_noise > 0.0:
            r += self.reward_noise * float(self._rng.standard_normal())
        return StepOutcome(r, self.STATE, (self.NULL_OBS, self.NULL_OBS), True)

    def max_return(self):
        return float(self.payoff.entries.max())

    def value_bounds(self):
        spread = 4.0 * self.reward_noise
        return (float(self.payoff.entries.min()) - spread,
                float(self.payoff.entries.max()) + spread)


# The coupled/decoupled components of the coordination game family. The
# blend at alpha recovers [[5(1+a), 10a], [10a, 12a-2]].
ASSURANCE_COUPLED = PayoffMatrix([[5.0, 0.0], [0.0, -2.0]])
ASSURANCE_DECOUPLED = PayoffMatrix([[10.0, 10.0], [10.0, 10.0]])

# Team game family [[2a, 1], [1, 8]]: the blend scales only the first
# diagonal entry, which tunes how badly an additive (per-agent) value
# decomposition misfits the payoff.
NONMONOTONIC_COUPLED = PayoffMatrix([[0.0, 1.0], [1.0, 8.0]])
NONMONOTONIC_DECOUPLED = PayoffMatrix([[2.0, 1.0], [1.0, 8.0]])


def build_assurance_game(alpha, discount=0.99):
    """Coordination game with payoff [[5(1+a), 10a], [10a, 12a-2]]."""
    spec = AlphaGameSpec("assurance", alpha, ASSURANCE_COUPLED, ASSURANCE_DECOUPLED)
    return MatrixGameEnv(f"assurance[alpha={alpha:g}]", spec.payoff(), discount)


def build_nonmonotonic_game(alpha, discount=0.99):
    """Team game with payoff [[2a, 1], [1, 8]]."""
    spec = AlphaGameSpec("nonmonotonic", alpha, NONMONOTONIC_COUPLED, NONMONOTONIC_DECOUPLED)
    return MatrixGameEnv(f"nonmonotonic[alpha={alpha:g}]", spec.payoff(), discount)
