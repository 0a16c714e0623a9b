"""Run configuration: a strict JSON schema with six sections.

A run config is a JSON object with exactly the sections ``env``,
``learners``, ``global``, ``budget``, ``schedule`` and ``output``; unknown
keys at any level are errors so that typos never silently fall back to
defaults. Omitted keys take the documented defaults. The seed list lives in
``schedule`` (it schedules the runs of a sweep); single runs take their
seed on the command line.

Example::

    {
      "env": {"kind": "foraging", "width": 5, "height": 5, "n_players": 2,
              "n_foods": 1, "coop": true},
      "learners": {"lr": 0.2, "epsilon": {"start": 1.0, "end": 0.05}},
      "global": {"switching_cost": 0.01,
                 "temperature": {"start": 1.0, "end": 0.02}},
      "budget": {"n": null},
      "schedule": {"total_steps": 100000, "eval_period": 2000,
                   "seeds": [0, 1, 2]},
      "output": {"directory": "runs"}
    }

Schedule dicts may omit ``decay_steps``; the default is half the run.
``global.mode`` selects the switch policy: ``learned`` (default),
``random`` (fair coin each step), ``never`` (independent learners only) or
``always`` (centralized only). The budget mask applies in every mode.
"""

import json
from dataclasses import dataclass, field

from .envs import build_assurance_game, build_nonmonotonic_game
from .gridworlds import ForagingEnv, JunctionEnv, LbfConfig, JunctionConfig
from .learners import Schedule

MODES = ("learned", "random", "never", "always")

_ENV_KEYS = {
    "assurance": {"alpha", "discount"},
    "nonmonotonic": {"alpha", "discount"},
    "foraging": {"width", "height", "n_players", "n_foods", "max_player_level",
                 "coop", "sight", "episode_limit", "discount"},
    "junction": {"arm_length", "collision_penalty", "arrival_reward",
                 "step_penalty", "episode_limit", "discount"},
}


def _check_keys(section, mapping, allowed):
    unknown = set(mapping) - set(allowed)
    if unknown:
        raise ValueError(f"unknown key(s) in '{section}': {sorted(unknown)}")


def _schedule(raw, name, total_steps, default_start, default_end):
    raw = dict(raw or {})
    _check_keys(name, raw, {"start", "end", "decay_steps"})
    decay = raw.get("decay_steps")
    if decay is None:
        decay = total_steps // 2
    sched = Schedule(float(raw.get("start", default_start)),
                     float(raw.get("end", default_end)), int(decay))
    if sched.decay_steps < 0:
        raise ValueError(f"{name}.decay_steps must be non-negative")
    return sched


@dataclass
class RunConfig:
    env: dict
    iql_lr: float
    central_lr: float
    epsilon: Schedule
    switching_cost: float
    global_lr: float
    temperature: Schedule
    mode: str
    budget_n: object  # int or None
    budget_buckets: int
    total_steps: int
    buffer_capacity: int
    batch_size: int
    update_period: int
    warmup_steps: int
    eval_period: int
    eval_episodes: int
    seeds: list
    out_dir: str
    raw: dict = field(repr=False, default=None)

    def build_env(self):
        params = {k: v for k, v in self.env.items() if k != "kind"}
        kind = self.env["kind"]
        if kind == "assurance":
            return build_assurance_game(**params)
        if kind == "nonmonotonic":
            return build_nonmonotonic_game(**params)
        if kind == "foraging":
            return ForagingEnv(LbfConfig(**params))
        if kind == "junction":
            return JunctionEnv(JunctionConfig(**params))
        raise ValueError(f"unknown env kind '{kind}'")

    def replace(self, **env_or_field_updates):
        """New config with updated raw sections, revalidated."""
        raw = json.loads(json.dumps(self.raw))
        for dotted, value in env_or_field_updates.items():
            section, key = dotted.split(".", 1)
            raw.setdefault(section, {})[key] = value
        return parse_config(raw)

    def to_dict(self):
        return json.loads(json.dumps(self.raw))


def parse_config(raw):
    """Validate a raw config mapping and fill defaults."""
    _check_keys("config", raw, {"env", "learners", "global", "budget",
                                "schedule", "output"})
    env = dict(raw.get("env") or {})
    if "kind" not in env:
        raise ValueError("env.kind is required")
    kind = env["kind"]
    if kind not in _ENV_KEYS:
        raise ValueError(f"unknown env kind '{kind}'")
    _check_keys("env", env, _ENV_KEYS[kind] | {"kind"})

    schedule = dict(raw.get("schedule") or {})
    _check_keys("schedule", schedule, {"total_steps", "buffer_capacity",
                                       "batch_size", "update_period",
                                       "warmup_steps", "eval_period",
                                       "eval_episodes", "seeds"})
    total_steps = int(schedule.get("total_steps", 20000))
    seeds = list(schedule.get("seeds", [0, 1, 2]))
    if len(set(seeds)) != len(seeds):
        raise ValueError("seeds must be distinct")

    learners = dict(raw.get("learners") or {})
    _check_keys("learners", learners, {"lr", "central_lr", "epsilon"})
    iql_lr = float(learners.get("lr", 0.2))
    central_lr = float(learners.get("central_lr", iql_lr))
    epsilon = _schedule(learners.get("epsilon"), "learners.epsilon",
                        total_steps, 1.0, 0.05)
    if not (0.0 <= epsilon.start <= 1.0 and 0.0 <= epsilon.end <= 1.0):
        raise ValueError("epsilon must stay in [0, 1]")

    glob = dict(raw.get("global") or {})
    _check_keys("global", glob, {"switching_cost", "lr", "temperature", "mode"})
    switching_cost = float(glob.get("switching_cost", 0.01))
    global_lr = float(glob.get("lr", iql_lr))
    temperature = _schedule(glob.get("temperature"), "global.temperature",
                            total_steps, 1.0, 0.1)
    if temperature.start <= 0 or temperature.end <= 0:
        raise ValueError("temperature must stay positive")
    mode = glob.get("mode", "learned")
    if mode not in MODES:
        raise ValueError(f"global.mode must be one of {MODES}")

    budget = dict(raw.get("budget") or {})
    _check_keys("budget", budget, {"n", "buckets"})
    budget_n = budget.get("n")
    if budget_n is not None:
        budget_n = int(budget_n)
        if budget_n < 0:
            raise ValueError("budget.n must be non-negative")
    budget_buckets = int(budget.get("buckets", 20))
    if budget_buckets < 1:
        raise ValueError("budget.buckets must be positive")

    output = dict(raw.get("output") or {})
    _check_keys("output", output, {"directory"})

    config = RunConfig(
        env=env,
        iql_lr=iql_lr,
        central_lr=central_lr,
        epsilon=epsilon,
        switching_cost=switching_cost,
        global_lr=global_lr,
        temperature=temperature,
        mode=mode,
        budget_n=budget_n,
        budget_buckets=budget_buckets,
        total_steps=total_steps,
        buffer_capacity=int(schedule.get("buffer_capacity", 50000)),
        batch_size=int(schedule.get("batch_size", 32)),
        update_period=int(schedule.get("update_period", 1)),
        warmup_steps=int(schedule.get("warmup_steps", 1000)),
        eval_period=int(schedule.get("eval_period", 1000)),
        eval_episodes=int(schedule.get("eval_episodes", 20)),
        seeds=seeds,
        out_dir=output.get("directory", "runs"),
        raw=json.loads(json.dumps(raw)),
    )
    if config.total_steps < 1 or config.batch_size < 1 or config.update_period < 1:
        raise ValueError("schedule values must be positive")
    if config.batch_size > config.buffer_capacity:
        raise ValueError("batch_size cannot exceed buffer_capacity")
    if config.eval_period < 1 or config.eval_episodes < 1:
        raise ValueError("evaluation settings must be positive")
    config.build_env()  # fail fast on bad env params
    return config


def load_config(path):
    with open(path) as fh:
        return parse_config(json.load(fh))
