"""Tabular multi-agent RL with a learned switch between independent and
centralized learning.

A controller observes the global state each step and decides, at a fixed
per-activation cost, whether the joint action comes from a centralized
monotonic-mixing learner or from per-agent independent Q-learners; all
three train off-policy from a shared replay buffer. A budgeted variant caps
total activations per run by folding the remaining allowance into the
controller's state. An exact dynamic-programming oracle for the augmented
control problem (with a brute-force policy-enumeration cross-check) backs
the operator-level tests.
"""

from .controller import BudgetState, GlobalQ, augment_state, budget_tick
from .envs import (AlphaGameSpec, EnvSpec, MatrixGameEnv, PayoffMatrix,
                   StepOutcome, build_assurance_game, build_nonmonotonic_game,
                   compose_matrix_game)
from .gridworlds import ForagingEnv, JunctionConfig, JunctionEnv, LbfConfig
from .harness import (BudgetViolation, PolicyBundle, ReplayBuffer,
                      RunArtifacts, evaluate, random_switch_baseline, train)
from .learners import IndependentQ, MonotonicJointQ, Schedule, mix
from .oracle import (FiniteMDP, SwitchSolution, bellman_backup,
                     brute_force_switching, heaviside_policy,
                     intervention_value, solve_budgeted, solve_switching)

__version__ = "0.1.0"
