"""Training loop, replay buffer and greedy evaluation.

One training run is strictly sequential and fully determined by
(config, seed): the seed spawns independent generator streams for episode
resets, exploration, batch sampling and evaluation, so re-running a config
with the same seed reproduces every transition, table and metric bit for
bit. Each step the switch controller picks g, exactly one of the two base
learners chooses the joint action, the transition is stored, and all three
learners train off-policy from one shared batch per update cycle regardless
of who acted.
"""

from dataclasses import dataclass, field

import numpy as np

from .controller import BudgetState, GlobalQ, budget_tick
from .learners import IndependentQ, MonotonicJointQ


class BudgetViolation(RuntimeError):
    """Raised when a run activates more often than its budget allows."""


class ReplayBuffer:
    """FIFO transition store with seeded uniform sampling (with replacement).

    Per-agent columns (observation keys, actions) are stored agent-major so
    a sampled batch hands each learner contiguous per-agent rows without
    further copies. Budget columns record the remaining count before and
    after the stored decision (-1 outside budget mode).
    """

    def __init__(self, capacity, n_agents):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._size = 0
        self._pos = 0
        self._state_keys = np.zeros(capacity, dtype=np.int64)
        self._g_keys = np.zeros(capacity, dtype=np.int64)
        self._obs_keys = np.zeros((n_agents, capacity), dtype=np.int64)
        self._actions = np.zeros((n_agents, capacity), dtype=np.int64)
        self._gs = np.zeros(capacity, dtype=np.int64)
        self._rewards = np.zeros(capacity, dtype=np.float64)
        self._next_state_keys = np.zeros(capacity, dtype=np.int64)
        self._next_g_keys = np.zeros(capacity, dtype=np.int64)
        self._next_obs_keys = np.zeros((n_agents, capacity), dtype=np.int64)
        self._terminals = np.zeros(capacity, dtype=np.uint8)
        self._next_allow = np.zeros(capacity, dtype=np.uint8)
        self._budget_before = np.zeros(capacity, dtype=np.int64)
        self._budget_after = np.zeros(capacity, dtype=np.int64)

    def __len__(self):
        return self._size

    def add(self, state_key, g_key, obs_keys, actions, g, reward,
            next_state_key, next_g_key, next_obs_keys, terminal, next_allow,
            budget_before=-1, budget_after=-1):
        p = self._pos
        self._state_keys[p] = state_key
        self._g_keys[p] = g_key
        self._obs_keys[:, p] = obs_keys
        self._actions[:, p] = actions
        self._gs[p] = g
        self._rewards[p] = reward
        self._next_state_keys[p] = next_state_key
        self._next_g_keys[p] = next_g_key
        self._next_obs_keys[:, p] = next_obs_keys
        self._terminals[p] = terminal
        self._next_allow[p] = next_allow
        self._budget_before[p] = budget_before
        self._budget_after[p] = budget_after
        self._pos = (p + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size, rng):
        """Batch of transitions; 2D entries are (n_agents, batch_size)."""
        idx = rng.integers(0, self._size, size=batch_size)
        return {
            "state_keys": self._state_keys[idx],
            "g_keys": self._g_keys[idx],
            "obs_keys": self._obs_keys.take(idx, axis=1),
            "actions": self._actions.take(idx, axis=1),
            "gs": self._gs[idx],
            "rewards": self._rewards[idx],
            "next_state_keys": self._next_state_keys[idx],
            "next_g_keys": self._next_g_keys[idx],
            "next_obs_keys": self._next_obs_keys.take(idx, axis=1),
            "terminals": self._terminals[idx],
            "next_allow": self._next_allow[idx],
            "budget_before": self._budget_before[idx],
            "budget_after": self._budget_after[idx],
        }


@dataclass
class PolicyBundle:
    """Everything evaluation needs to act greedily."""

    iql: IndependentQ
    central: MonotonicJointQ
    global_q: GlobalQ
    mode: str
    budget_total: int = 0
    budget_remaining: int = 0


@dataclass
class RunArtifacts:
    """Everything a finished training run produced."""

    config: object
    seed: int
    mode: str
    metrics: list                 # rows matching the metrics CSV columns
    g_history: np.ndarray         # uint8 per training step
    visit_counts: dict            # raw state -> training visits
    activation_counts: dict       # raw state -> activated visits
    focal: dict                   # raw state -> (x, y)
    iql: IndependentQ
    central: MonotonicJointQ
    global_q: GlobalQ
    budget: object                # BudgetState or None
    episodes: int
    max_return: float
    extra: dict = field(default_factory=dict)

    @property
    def total_cl_calls(self):
        return int(self.g_history.sum())

    @property
    def cl_call_pct(self):
        return 100.0 * self.total_cl_calls / len(self.g_history)

    @property
    def final_return(self):
        return self.metrics[-1][3]

    @property
    def normalized_final_return(self):
        return self.final_return / self.max_return


def _eval_greedy_g(bundle, global_key, remaining, rng):
    budget_mode = bundle.global_q.budget_mode
    allow = (not budget_mode) or remaining > 0
    if bundle.mode == "never":
        return 0
    if bundle.mode == "always":
        return 1 if allow else 0
    if bundle.mode == "random":
        if not allow:
            return 0
        return 1 if rng.random() < 0.5 else 0
    return bundle.global_q.greedy(global_key, allow)


def evaluate(bundle, env, episodes, seed):
    """Greedy evaluation episodes; returns (mean return, per-episode list).

    Base learners act greedily (epsilon 0) and the learned switch activates
    only on a strict Q advantage; a run in ``random`` mode keeps its coin at
    evaluation time since the coin is its switch policy. In budget mode the
    remaining count seeds a simulated budget so decisions stay on the
    learned (state, remaining) manifold; evaluation never consumes the
    training budget. Deterministic in ``seed``.
    """
    rng = np.random.default_rng(seed)
    returns = []
    for _ in range(episodes):
        state, obs = env.reset(int(rng.integers(2**63)))
        remaining = bundle.budget_remaining
        total = 0.0
        while True:
            budget = BudgetState(bundle.budget_total, remaining) \
                if bundle.global_q.budget_mode else None
            gkey = bundle.global_q.intern_key(state, budget)
            g = _eval_greedy_g(bundle, gkey, remaining, rng)
            if g:
                skey = bundle.central.intern_state(state)
                actions = bundle.central.act(skey, 0.0, rng)
                if bundle.global_q.budget_mode:
                    remaining -= 1
            else:
                okeys = bundle.iql.intern_obs(obs)
                actions = bundle.iql.act(okeys, 0.0, rng)
            out = env.step(actions)
            total += out.team_reward
            state, obs = out.next_state, out.observations
            if out.terminal:
                break
        returns.append(total)
    return sum(returns) / len(returns), returns


def train(config, seed, mode=None):
    """Run one training run; returns RunArtifacts. Raises BudgetViolation."""
    mode = mode or config.mode
    env = config.build_env()
    eval_env = config.build_env()
    gamma = env.spec.discount
    n_agents = env.spec.n_agents

    iql = IndependentQ(env.spec.action_counts, config.iql_lr)
    central = MonotonicJointQ(env.spec.action_counts, config.central_lr,
                              env.value_bounds())
    budget_mode = config.budget_n is not None
    global_q = GlobalQ(config.switching_cost, config.global_lr,
                       config.temperature, budget_mode,
                       config.budget_buckets)
    budget = BudgetState(config.budget_n, config.budget_n) if budget_mode else None

    streams = np.random.SeedSequence(seed).spawn(4)
    reset_rng = np.random.default_rng(streams[0])
    act_rng = np.random.default_rng(streams[1])
    buf_rng = np.random.default_rng(streams[2])
    eval_rng = np.random.default_rng(streams[3])

    buffer = ReplayBuffer(config.buffer_capacity, n_agents)
    metrics = []
    g_history = np.zeros(config.total_steps, dtype=np.uint8)
    visits, activations, focal = {}, {}, {}
    cl_cum = 0
    episodes = 0
    state = obs = None
    terminal = True

    for t in range(config.total_steps):
        if terminal:
            state, obs = env.reset(int(reset_rng.integers(2**63)))
            terminal = False
            episodes += 1
        state_key = central.intern_state(state)
        obs_keys = iql.intern_obs(obs)
        g_key = global_q.intern_key(state, budget)
        allow = (not budget_mode) or budget.remaining > 0
        epsilon = config.epsilon.value(t)

        if mode == "learned":
            g = global_q.act(g_key, config.temperature.value(t), act_rng, allow)
        elif mode == "random":
            g = (1 if act_rng.random() < 0.5 else 0) if allow else 0
        elif mode == "never":
            g = 0
        else:  # always
            g = 1 if allow else 0

        if g:
            actions = central.act(state_key, epsilon, act_rng)
        else:
            actions = iql.act(obs_keys, epsilon, act_rng)
        out = env.step(actions)

        if budget_mode:
            budget = budget_tick(budget, g)
        cl_cum += g
        if budget_mode and cl_cum > config.budget_n:
            raise BudgetViolation(f"{cl_cum} activations exceed budget "
                                  f"{config.budget_n} at step {t}")
        g_history[t] = g
        visits[state] = visits.get(state, 0) + 1
        if g:
            activations[state] = activations.get(state, 0) + 1
        if state not in focal:
            focal[state] = env.focal_coords(state)

        next_state_key = central.intern_state(out.next_state)
        next_obs_keys = iql.intern_obs(out.observations)
        next_g_key = global_q.intern_key(out.next_state, budget)
        next_allow = (not budget_mode) or budget.remaining > 0
        buffer.add(state_key, g_key, obs_keys, actions, g, out.team_reward,
                   next_state_key, next_g_key, next_obs_keys,
                   int(out.terminal), int(next_allow),
                   budget.remaining + g if budget_mode else -1,
                   budget.remaining if budget_mode else -1)
        state, obs, terminal = out.next_state, out.observations, out.terminal

        if (t + 1 > config.warmup_steps and len(buffer) >= config.batch_size
                and (t + 1) % config.update_period == 0):
            batch = buffer.sample(config.batch_size, buf_rng)
            iql.update(batch, gamma)
            central.update(batch, gamma)
            global_q.update(batch, gamma)

        if (t + 1) % config.eval_period == 0:
            bundle = PolicyBundle(iql, central, global_q, mode,
                                  budget.total if budget_mode else 0,
                                  budget.remaining if budget_mode else 0)
            mean, _ = evaluate(bundle, eval_env, config.eval_episodes,
                               int(eval_rng.integers(2**63)))
            metrics.append((
                t + 1, episodes, seed, mean, cl_cum,
                100.0 * cl_cum / (t + 1),
                budget.remaining if budget_mode else "",
                config.epsilon.value(t + 1),
                config.temperature.value(t + 1),
            ))

    return RunArtifacts(config=config, seed=seed, mode=mode, metrics=metrics,
                        g_history=g_history, visit_counts=visits,
                        activation_counts=activations, focal=focal,
                        iql=iql, central=central, global_q=global_q,
                        budget=budget, episodes=episodes,
                        max_return=env.max_return())


def random_switch_baseline(config, seed):
    """Train with the switch replaced by a fair coin (budget mask intact)."""
    return train(config, seed, mode="random")
