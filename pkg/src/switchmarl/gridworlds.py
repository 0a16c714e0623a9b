"""Gridworld environments: level-based foraging and a traffic junction.

Both are small, fully enumerable testbeds whose global state is a plain
tuple (hashable, stable within a run) and whose local observations are
deliberately limited, so that coordination failures of purely local
learners are reproducible.

Foraging rules
--------------
Players and foods spawn on distinct cells with integer levels. Each step
every player picks one of {up, down, left, right, load, noop}. Movement is
resolved first: a move into a wall, a food, or a cell currently occupied by
another player is cancelled, and when several players target the same empty
cell all of them stay put (no priority order). A food is then collected
when the summed level of the players orthogonally adjacent to it that chose
``load`` this step reaches the food's level; all foods are checked against
the same loader set, so one loader can contribute to several foods at once.
The team reward each step is (sum of levels just collected) divided by the
total level of all foods at spawn, so an episode's return is at most 1.
In ``coop`` mode food levels always exceed the strongest single player,
forcing at least two simultaneous loaders.

Junction rules
--------------
Two one-cell-wide roads cross at a single intersection cell. Each agent
drives down its own road from position 0 to position 2*arm_length, moving
one cell per ``gas`` and holding per ``brake``; the intersection sits at
position arm_length. If both agents occupy the intersection on the same
step the episode ends with a collision penalty. Reaching the far end pays
an arrival reward once per agent, and every step costs a small penalty.
Each agent observes only its own signed offset to the intersection, so
avoiding the collision requires information an individual agent never sees.
"""

from dataclasses import dataclass

import numpy as np

from .envs import Env, EnvSpec, StepOutcome

LBF_ACTIONS = ("up", "down", "left", "right", "load", "noop")
_MOVES = {0: (0, -1), 1: (0, 1), 2: (-1, 0), 3: (1, 0)}  # action -> (dx, dy)
LOAD, NOOP = 4, 5

GAS, BRAKE = 0, 1

# Observation cell classes.
CELL_EMPTY, CELL_PLAYER, CELL_FOOD, CELL_WALL = 0, 1, 2, 3


@dataclass(frozen=True)
class LbfConfig:
    width: int = 8
    height: int = 8
    n_players: int = 2
    n_foods: int = 2
    max_player_level: int = 2
    coop: bool = False
    sight: int = 2
    episode_limit: int = 50
    discount: float = 0.99

    def __post_init__(self):
        if self.n_players < 2:
            raise ValueError("need at least 2 players")
        if self.n_foods < 1 or self.max_player_level < 1 or self.sight < 0:
            raise ValueError("bad foraging config")
        if self.n_players + self.n_foods > self.width * self.height:
            raise ValueError("more entities than grid cells")


class ForagingEnv(Env):
    """Level-based foraging on a width x height grid.

    Global state key: (player cells..., player levels..., food cells...,
    food levels..., collected flags...), with cells flattened to
    x + y * width. Collected foods keep their spawn cell in the key but are
    invisible and non-blocking.
    """

    def __init__(self, config):
        self.config = config
        n = config.n_players
        super().__init__(EnvSpec(
            name=f"foraging-{config.width}x{config.height}-{n}p-{config.n_foods}f"
                 + ("-coop" if config.coop else ""),
            n_agents=n,
            action_counts=(len(LBF_ACTIONS),) * n,
            state_count=-1,
            episode_limit=config.episode_limit,
            discount=config.discount,
        ))
        self._players = None   # list of [x, y, level]
        self._foods = None     # list of [x, y, level, collected]
        self._total_food_level = 0

    def _reset(self, seed):
        cfg = self.config
        rng = np.random.default_rng(seed)
        cells = rng.choice(cfg.width * cfg.height, size=cfg.n_players + cfg.n_foods,
                           replace=False)
        levels = rng.integers(1, cfg.max_player_level + 1, size=cfg.n_players)
        self._players = [[int(c) % cfg.width, int(c) // cfg.width, int(lv)]
                         for c, lv in zip(cells[:cfg.n_players], levels)]
        self._foods = []
        strongest = max(p[2] for p in self._players)
        total = sum(p[2] for p in self._players)
        for c in cells[cfg.n_players:]:
            if cfg.coop:
                # More than any single player can lift, but never more than
                # the whole team: at least two loaders, never unsolvable.
                lv = int(rng.integers(strongest + 1, total + 1))
            else:
                lv = int(rng.integers(1, cfg.max_player_level + 1))
            self._foods.append([int(c) % cfg.width, int(c) // cfg.width, lv, False])
        self._total_food_level = sum(f[2] for f in self._foods)
        return self._state_key(), self._observations()

    def load_layout(self, players, foods):
        """Start an episode from an explicit layout (rule tests, debugging).

        ``players`` is a list of (x, y, level), ``foods`` of (x, y, level);
        all foods start uncollected. Returns (state, observations) like
        ``reset``.
        """
        cells = [(x, y) for x, y, _ in players] + [(x, y) for x, y, _ in foods]
        if len(set(cells)) != len(cells):
            raise ValueError("layout entities overlap")
        if len(players) != self.config.n_players or len(foods) != self.config.n_foods:
            raise ValueError("layout does not match config entity counts")
        self._players = [[x, y, lv] for x, y, lv in players]
        self._foods = [[x, y, lv, False] for x, y, lv in foods]
        self._total_food_level = sum(f[2] for f in self._foods)
        self._state = self._state_key()
        self._steps = 0
        self._terminal = False
        return self._state, self._observations()

    def _state_key(self):
        w = self.config.width
        return (tuple(p[0] + p[1] * w for p in self._players)
                + tuple(p[2] for p in self._players)
                + tuple(f[0] + f[1] * w for f in self._foods)
                + tuple(f[2] for f in self._foods)
                + tuple(int(f[3]) for f in self._foods))

    def _occupied(self):
        cells = {(p[0], p[1]) for p in self._players}
        cells |= {(f[0], f[1]) for f in self._foods if not f[3]}
        return cells

    def _step(self, joint_action):
        cfg = self.config
        current = [(p[0], p[1]) for p in self._players]
        blocked = self._occupied()

        # Propose moves; cancel walls and cells occupied right now.
        proposals = []
        for (x, y), action in zip(current, joint_action):
            if action in _MOVES:
                dx, dy = _MOVES[action]
                nx, ny = x + dx, y + dy
                if (0 <= nx < cfg.width and 0 <= ny < cfg.height
                        and (nx, ny) not in blocked):
                    proposals.append((nx, ny))
                    continue
            proposals.append((x, y))

        # Several movers into one empty cell: all of them stay.
        counts = {}
        for cell in proposals:
            counts[cell] = counts.get(cell, 0) + 1
        for i, cell in enumerate(proposals):
            if counts[cell] > 1:
                proposals[i] = current[i]
        for p, (x, y) in zip(self._players, proposals):
            p[0], p[1] = x, y

        # Collection: one shared loader set, each food checked independently.
        loaders = [(p[0], p[1], p[2]) for p, a in zip(self._players, joint_action)
                   if a == LOAD]
        gained = 0
        for food in self._foods:
            if food[3]:
                continue
            strength = sum(lv for x, y, lv in loaders
                           if abs(x - food[0]) + abs(y - food[1]) == 1)
            if strength >= food[2]:
                food[3] = True
                gained += food[2]

        reward = gained / self._total_food_level
        terminal = all(f[3] for f in self._foods)
        return StepOutcome(reward, self._state_key(), self._observations(), terminal)

    def _observations(self):
        return tuple(self.observe(i) for i in range(self.config.n_players))

    def observe(self, agent):
        """Egocentric window of radius ``sight`` plus the agent's own level.

        Per window cell (row-major): (cell class, level), with off-grid
        cells encoded as walls and collected foods as empty. The encoding is
        injective over distinct window contents.
        """
        cfg = self.config
        px, py, own_level = self._players[agent]
        entities = {}
        for i, (x, y, lv) in enumerate((p[0], p[1], p[2]) for p in self._players):
            entities[(x, y)] = (CELL_PLAYER, lv)
        for x, y, lv, collected in self._foods:
            if not collected:
                entities[(x, y)] = (CELL_FOOD, lv)
        cells = []
        for dy in range(-cfg.sight, cfg.sight + 1):
            for dx in range(-cfg.sight, cfg.sight + 1):
                x, y = px + dx, py + dy
                if not (0 <= x < cfg.width and 0 <= y < cfg.height):
                    cells.append((CELL_WALL, 0))
                else:
                    cells.append(entities.get((x, y), (CELL_EMPTY, 0)))
        return tuple(cells) + (own_level,)

    def focal_coords(self, state):
        cell = state[0]  # first player's flattened cell
        return (cell % self.config.width, cell // self.config.width)

    def max_return(self):
        return 1.0

    def value_bounds(self):
        return (0.0, 1.0)


@dataclass(frozen=True)
class JunctionConfig:
    arm_length: int = 5
    collision_penalty: float = -5.0
    arrival_reward: float = 1.0
    step_penalty: float = -0.01
    episode_limit: int = 40
    discount: float = 0.99

    def __post_init__(self):
        if self.arm_length < 2:
            raise ValueError("arm_length must be at least 2")
        if self.collision_penalty > 0 or self.arrival_reward < 0:
            raise ValueError("bad junction rewards")


class JunctionEnv(Env):
    """Two-road crossing with one shared intersection cell.

    Global state key: (pos1, pos2) along the respective roads; positions run
    from 0 (spawn) to 2*arm_length (far end), with the intersection at
    arm_length. Agent i observes only pos_i - arm_length (signed offset).
    """

    N_AGENTS = 2

    def __init__(self, config):
        self.config = config
        super().__init__(EnvSpec(
            name=f"junction-{config.arm_length}",
            n_agents=self.N_AGENTS,
            action_counts=(2, 2),
            state_count=(2 * config.arm_length + 1) ** 2,
            episode_limit=config.episode_limit,
            discount=config.discount,
        ))
        self._pos = None
        self._arrived = None

    def _reset(self, seed):
        self._pos = [0, 0]
        self._arrived = [False, False]
        return tuple(self._pos), self._observations()

    def _observations(self):
        c = self.config.arm_length
        return tuple(p - c for p in self._pos)

    def _step(self, joint_action):
        cfg = self.config
        end = 2 * cfg.arm_length
        for i, a in enumerate(joint_action):
            if a == GAS and self._pos[i] < end:
                self._pos[i] += 1
        if self._pos[0] == cfg.arm_length and self._pos[1] == cfg.arm_length:
            return StepOutcome(cfg.collision_penalty, tuple(self._pos),
                               self._observations(), True)
        reward = cfg.step_penalty
        for i in range(self.N_AGENTS):
            if self._pos[i] == end and not self._arrived[i]:
                self._arrived[i] = True
                reward += cfg.arrival_reward
        terminal = all(self._arrived)
        return StepOutcome(reward, tuple(self._pos), self._observations(), terminal)

    def focal_coords(self, state):
        c = self.config.arm_length
        return (state[0] - c, state[1] - c)

    def max_return(self):
        # Both arrive: 2 * arrival minus the unavoidable per-step penalties.
        steps = 2 * self.config.arm_length + 1
        return 2 * self.config.arrival_reward + steps * self.config.step_penalty

    def value_bounds(self):
        cfg = self.config
        low = cfg.collision_penalty + cfg.episode_limit * min(cfg.step_penalty, 0.0)
        return (low, 2 * cfg.arrival_reward)
