"""Exact dynamic programming for the switch-augmented control problem.

Given a small finite MDP over joint actions, a fixed centralized policy
``central_policy`` (one joint action per state) and an activation cost
``c``, the controller's backup operator at each non-terminal state is

    backup(s) = max( Q(s, central_policy(s)) - c,  max_a Q(s, a) )

with Q(s, a) = R(s, a) + gamma * sum_s' P(s'|s, a) v(s'). The first branch
is the value of handing control to the centralized policy at cost c, the
second the best direct joint action. The operator is a gamma-contraction,
so value iteration converges; an independent brute-force oracle enumerates
every deterministic stationary policy of the augmented MDP and evaluates it
exactly through the linear policy-evaluation system, providing ground truth
for the fixed point.

Note that the second branch maximizes over all joint actions, which
includes ``central_policy(s)`` itself, so for c > 0 the activation branch
is never strictly optimal at this exact-planning level: the activation set
of the converged solution is empty (and the tests pin that down). The
benefit of activations in the learning system comes from the two learners'
value estimates differing during training, not from exact planning.

MDP fixtures load from JSON with keys ``discount``, ``rewards`` (S x A),
``transitions`` (S x A x S), optional ``terminal`` (S bools, default all
false) and optional ``central_policy`` (S action indices, default: the
per-state argmax of immediate reward).
"""

import itertools
import json
from dataclasses import dataclass

import numpy as np

_ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class FiniteMDP:
    transitions: np.ndarray  # (S, A, S) probabilities
    rewards: np.ndarray      # (S, A) expected team reward
    discount: float
    terminal: np.ndarray     # (S,) bool

    def __post_init__(self):
        P, R = self.transitions, self.rewards
        S, A = R.shape
        if P.shape != (S, A, S):
            raise ValueError("transition tensor shape mismatch")
        if not np.all(np.isfinite(R)):
            raise ValueError("rewards must be finite")
        if np.abs(P.sum(axis=2) - 1.0).max() > _ROW_SUM_TOL:
            raise ValueError("transition rows must sum to 1")
        if np.any(P < 0):
            raise ValueError("negative transition probability")
        if not 0.0 <= self.discount < 1.0:
            raise ValueError("discount must lie in [0, 1)")

    @property
    def state_count(self):
        return self.rewards.shape[0]

    @property
    def action_count(self):
        return self.rewards.shape[1]


@dataclass
class SwitchSolution:
    """Converged solution of the switch-augmented problem.

    For the unbudgeted solver: ``values`` has shape (S,), ``q_values``
    (S, A+1) with the activation value in the last column, and
    ``activation_set`` (S,) bools. For the budgeted solver every array
    carries a trailing budget axis of size n+1 before the action axis:
    ``values`` is (S, n+1), ``q_values`` (S, n+1, A+1), ``activation_set``
    (S, n+1), indexed by remaining budget x.
    """

    values: np.ndarray
    q_values: np.ndarray
    activation_set: np.ndarray
    iterations: int
    residual: float


def load_mdp(path):
    """Read a FiniteMDP (and its central policy) from a JSON fixture."""
    with open(path) as fh:
        raw = json.load(fh)
    known = {"discount", "rewards", "transitions", "terminal", "central_policy"}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown fixture keys: {sorted(unknown)}")
    rewards = np.asarray(raw["rewards"], dtype=float)
    transitions = np.asarray(raw["transitions"], dtype=float)
    terminal = np.asarray(raw.get("terminal", [False] * rewards.shape[0]), dtype=bool)
    mdp = FiniteMDP(transitions, rewards, float(raw["discount"]), terminal)
    if "central_policy" in raw:
        central = np.asarray(raw["central_policy"], dtype=np.int64)
        if central.shape != (mdp.state_count,) or central.min() < 0 \
                or central.max() >= mdp.action_count:
            raise ValueError("central_policy must give one valid action per state")
    else:
        central = np.argmax(rewards, axis=1).astype(np.int64)
    return mdp, central


def action_values(values, mdp):
    """Q(s, a) = R(s, a) + gamma * E[v(s')] for all pairs."""
    return mdp.rewards + mdp.discount * (mdp.transitions @ values)


def intervention_value(q_values, central_policy, c, s):
    """Value of activating the centralized policy at s: Q(s, pi_c(s)) - c."""
    return q_values[s, central_policy[s]] - c


def bellman_backup(values, mdp, central_policy, c):
    """One application of the switch-augmented Bellman operator."""
    q = action_values(values, mdp)
    direct = q.max(axis=1)
    activate = q[np.arange(mdp.state_count), central_policy] - c
    out = np.maximum(direct, activate)
    out[mdp.terminal] = 0.0
    return out


def heaviside_policy(q_values, central_policy, c):
    """Activation set from converged q_values: activate on strict advantage.

    ``q_values`` is the (S, A+1) augmented matrix of a SwitchSolution; the
    activation value is recomputed from the direct columns. Ties resolve to
    no activation, so with c > 0 an available central action never triggers.
    """
    direct = q_values[:, :-1]
    best_direct = direct.max(axis=1)
    activate = direct[np.arange(direct.shape[0]), central_policy] - c
    return activate - best_direct > 0


def solve_switching(mdp, central_policy, c, tolerance=1e-9, max_iterations=1_000_000):
    """Value-iterate the switch-augmented operator from v = 0.

    Stops when the sup-norm residual is at most tolerance*(1-gamma)/gamma,
    which bounds the final sup-norm error by ``tolerance``.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    gamma = mdp.discount
    threshold = tolerance * (1.0 - gamma) / gamma if gamma > 0 else tolerance
    v = np.zeros(mdp.state_count)
    for it in range(1, max_iterations + 1):
        v_next = bellman_backup(v, mdp, central_policy, c)
        residual = float(np.abs(v_next - v).max())
        v = v_next
        if residual <= threshold:
            break
    else:
        raise RuntimeError("value iteration failed to converge (operator bug?)")
    q = action_values(v, mdp)
    activate_col = (q[np.arange(mdp.state_count), central_policy] - c)[:, None]
    q_aug = np.concatenate([q, activate_col], axis=1)
    activation = heaviside_policy(q_aug, central_policy, c)
    return SwitchSolution(v, q_aug, activation, it, residual)


def _augmented_model(mdp, central_policy, c):
    """Per-state choices 0..A-1 = direct joint actions, choice A = activate."""
    S = mdp.state_count
    idx = np.arange(S)
    r_aug = np.concatenate(
        [mdp.rewards, (mdp.rewards[idx, central_policy] - c)[:, None]], axis=1)
    p_aug = np.concatenate(
        [mdp.transitions, mdp.transitions[idx, central_policy][:, None, :]], axis=1)
    # Terminal states contribute value 0: zero reward, no outflow.
    r_aug[mdp.terminal] = 0.0
    p_aug[mdp.terminal] = 0.0
    return r_aug, p_aug


def brute_force_switching(mdp, central_policy, c, policy_cap=1_000_000,
                          chunk=4096):
    """Ground truth by enumerating deterministic stationary policies.

    Each augmented policy (one choice from {direct actions} + {activate}
    per non-terminal state) is evaluated exactly by solving the linear
    policy-evaluation system; the optimum is the per-state maximum. Returns
    (values, policy) where policy[s] in [0, A] and A means activate;
    terminal states report choice 0. Ties prefer direct actions, matching
    the Heaviside rule.
    """
    S, A = mdp.state_count, mdp.action_count
    r_aug, p_aug = _augmented_model(mdp, central_policy, c)
    active = np.flatnonzero(~mdp.terminal)
    n_choices = A + 1
    n_policies = n_choices ** len(active)
    if n_policies > policy_cap:
        raise ValueError(f"{n_policies} policies exceed the enumeration cap")

    gamma = mdp.discount
    eye = np.eye(S)
    best = np.full(S, -np.inf)
    policies = itertools.product(range(n_choices), repeat=len(active))
    while True:
        block = list(itertools.islice(policies, chunk))
        if not block:
            break
        choice = np.zeros((len(block), S), dtype=np.int64)
        choice[:, active] = np.asarray(block, dtype=np.int64)
        r_pi = r_aug[np.arange(S), choice]           # (B, S)
        p_pi = p_aug[np.arange(S), choice]           # (B, S, S)
        v = np.linalg.solve(eye - gamma * p_pi, r_pi[..., None])[..., 0]
        best = np.maximum(best, v.max(axis=0))

    # Greedy augmented policy w.r.t. the enumerated optimum; argmax takes
    # the first maximizer, so the activate column (last) never wins a tie.
    q_aug = r_aug + gamma * (p_aug @ best)
    policy = np.argmax(q_aug, axis=1)
    policy[mdp.terminal] = 0
    return best, policy


def solve_budgeted(mdp, central_policy, c, n, tolerance=1e-9,
                   max_iterations=1_000_000):
    """Value iteration on the budget-augmented state space (s, x).

    Activating at (s, x) with x > 0 moves the budget to x - 1; at x = 0 the
    activation branch is unavailable. Values are returned as an (S, n+1)
    array indexed by remaining budget.
    """
    if n < 0:
        raise ValueError("budget must be non-negative")
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    S = mdp.state_count
    gamma = mdp.discount
    threshold = tolerance * (1.0 - gamma) / gamma if gamma > 0 else tolerance
    idx = np.arange(S)
    r_c = mdp.rewards[idx, central_policy]
    p_c = mdp.transitions[idx, central_policy]
    v = np.zeros((S, n + 1))
    for it in range(1, max_iterations + 1):
        # direct[s, x] backs up within the same budget level.
        direct = (mdp.rewards[:, :, None]
                  + gamma * np.einsum("sap,px->sax", mdp.transitions, v)).max(axis=1)
        v_next = direct.copy()
        if n > 0:
            activate = (r_c[:, None] - c) + gamma * (p_c @ v[:, :-1])
            v_next[:, 1:] = np.maximum(direct[:, 1:], activate)
        v_next[mdp.terminal] = 0.0
        residual = float(np.abs(v_next - v).max())
        v = v_next
        if residual <= threshold:
            break
    else:
        raise RuntimeError("budgeted value iteration failed to converge")

    q_direct = (mdp.rewards[:, :, None]
                + gamma * np.einsum("sap,px->sax", mdp.transitions, v))
    activate_q = np.full((S, n + 1), -np.inf)
    if n > 0:
        activate_q[:, 1:] = (r_c[:, None] - c) + gamma * (p_c @ v[:, :-1])
    activation = activate_q - q_direct.max(axis=1) > 0
    q_aug = np.concatenate([q_direct.transpose(0, 2, 1),
                            activate_q[:, :, None]], axis=2)
    return SwitchSolution(v, q_aug, activation, it, residual)


def optimal_values(mdp, tolerance=1e-9, max_iterations=1_000_000):
    """Plain optimal values of the MDP itself (no activation branch)."""
    gamma = mdp.discount
    threshold = tolerance * (1.0 - gamma) / gamma if gamma > 0 else tolerance
    v = np.zeros(mdp.state_count)
    for _ in range(max_iterations):
        v_next = action_values(v, mdp).max(axis=1)
        v_next[mdp.terminal] = 0.0
        residual = float(np.abs(v_next - v).max())
        v = v_next
        if residual <= threshold:
            return v
    raise RuntimeError("value iteration failed to converge")


def simulate_budgeted_activations(mdp, central_policy, solution, n, n_rollouts,
                                  horizon, rng):
    """Roll out the budgeted greedy policy; returns activations per rollout.

    All rollouts run in parallel from uniformly random start states. At
    each step a rollout activates exactly when the solution's activation
    set says so at its current (state, remaining) pair, which can only hold
    for remaining > 0; the returned counts therefore demonstrate budget
    feasibility rather than assume it.
    """
    S = mdp.state_count
    idx = np.arange(S)
    p_direct_cum = mdp.transitions.cumsum(axis=2)
    p_central_cum = p_direct_cum[idx, central_policy]
    greedy_direct = np.zeros((S, n + 1), dtype=np.int64)
    for x in range(n + 1):
        greedy_direct[:, x] = np.argmax(solution.q_values[:, x, :-1], axis=1)

    states = rng.integers(0, S, size=n_rollouts)
    remaining = np.full(n_rollouts, n, dtype=np.int64)
    used = np.zeros(n_rollouts, dtype=np.int64)
    alive = ~mdp.terminal[states]
    for _ in range(horizon):
        if not alive.any():
            break
        act = solution.activation_set[states, remaining] & alive
        used += act
        remaining -= act
        choice = greedy_direct[states, remaining]
        rows = np.where(act[:, None], p_central_cum[states],
                        p_direct_cum[states, choice])
        u = rng.random(n_rollouts)
        nxt = (u[:, None] > rows).sum(axis=1)
        states = np.where(alive, nxt, states)
        alive &= ~mdp.terminal[states]
    return used


def random_mdp(rng, n_states, n_actions, discount, terminal_states=0):
    """Random dense MDP: Dirichlet transition rows, uniform [-1, 1] rewards."""
    P = rng.dirichlet(np.ones(n_states), size=(n_states, n_actions))
    R = rng.uniform(-1.0, 1.0, size=(n_states, n_actions))
    terminal = np.zeros(n_states, dtype=bool)
    if terminal_states:
        terminal[rng.choice(n_states, size=terminal_states, replace=False)] = True
    return FiniteMDP(P, R, discount, terminal)
