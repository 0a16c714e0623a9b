"""The switch controller: a Q-learner over the binary activate decision.

At every step the controller observes the global state and decides
g in {0, 1}: use the centralized learner for this step (g = 1, at a fixed
per-activation cost) or leave the independent learners in control (g = 0).
Exploration is Boltzmann over the two Q-values with a decaying temperature.

In budget mode the number of activations over a whole training run is
capped: the remaining count is appended to the state key (so the policy can
condition on it), activation is hard-masked once the budget hits zero, and
bootstrap targets exclude the activate action wherever the successor's
budget is exhausted, keeping the targets consistent with the masked action
space.
"""

import math
from dataclasses import dataclass

from . import kernels
from .tables import KeyIndex, Table2D


@dataclass(frozen=True)
class BudgetState:
    """Remaining activation allowance of a training run."""

    total: int
    remaining: int

    def __post_init__(self):
        if not 0 <= self.remaining <= self.total:
            raise ValueError("remaining must lie in [0, total]")


def budget_tick(budget, g):
    """Consume one activation when g = 1; the counter spans the whole run."""
    if g not in (0, 1):
        raise ValueError("g must be 0 or 1")
    if g == 0:
        return budget
    if budget.remaining == 0:
        raise RuntimeError("activation with exhausted budget (mask failure)")
    return BudgetState(budget.total, budget.remaining - 1)


def augment_state(state, budget, budget_mode, buckets=None):
    """Key the controller's table by (state, remaining) in budget mode.

    With ``buckets`` set, the remaining count is coarsened to
    ceil(remaining / ceil(total / buckets)) so that large budgets do not
    shatter the table into one-visit keys (each exact remaining value is
    visited only transiently); budgets of at most ``buckets`` keep exact
    keys. Zero remaining always maps to its own key. Exhaustion masking is
    enforced on the exact count regardless of the key granularity.
    """
    if not budget_mode:
        return state
    if buckets is None or budget.total <= buckets:
        return (state, budget.remaining)
    size = -(-budget.total // buckets)
    return (state, -(-budget.remaining // size))


def boltzmann_activate_prob(q0, q1, temperature):
    """P(g = 1) under a two-action softmax at the given temperature."""
    d = (q1 - q0) / temperature
    if d >= 0.0:
        return 1.0 / (1.0 + math.exp(-d))
    e = math.exp(d)
    return e / (1.0 + e)


class GlobalQ:
    """Tabular Q-function over (augmented state, g)."""

    def __init__(self, switching_cost, lr, temperature, budget_mode=False,
                 budget_buckets=None):
        if switching_cost <= 0:
            raise ValueError("switching cost must be positive")
        self.switching_cost = switching_cost
        self.lr = lr
        self.temperature = temperature  # Schedule
        self.budget_mode = budget_mode
        self.budget_buckets = budget_buckets
        self.key_index = KeyIndex()
        self.table = Table2D(2)

    def intern_key(self, state, budget):
        k = self.key_index.intern(augment_state(state, budget, self.budget_mode,
                                                self.budget_buckets))
        self.table.ensure(k + 1)
        return k

    def act(self, key, temperature, rng, allow_activate=True):
        """Sample g from the Boltzmann distribution over the two Q-values.

        A masked decision (budget exhausted) returns 0 without drawing from
        the RNG, so budgeted and activation-free runs consume identical
        random streams.
        """
        if not allow_activate:
            return 0
        if temperature <= 0:
            raise ValueError("temperature must be positive")
        row = self.table.row(key)
        p1 = boltzmann_activate_prob(row[0], row[1], temperature)
        return 1 if rng.random() < p1 else 0

    def greedy(self, key, allow_activate=True):
        """Deterministic decision: activate only on a strict Q advantage."""
        if not allow_activate:
            return 0
        row = self.table.row(key)
        return 1 if row[1] > row[0] else 0

    def update(self, batch, gamma):
        kernels.switch_update(self.table.data, batch["g_keys"], batch["gs"],
                              batch["rewards"], batch["next_g_keys"],
                              batch["next_allow"], batch["terminals"],
                              self.lr, gamma, self.switching_cost)


def discounted_switch_return(rewards, gs, cost, gamma):
    """The controller's objective on one rollout: sum gamma^t (r_t - c*g_t)."""
    total = 0.0
    factor = 1.0
    for r, g in zip(rewards, gs):
        total += factor * (r - cost * g)
        factor *= gamma
    return total
