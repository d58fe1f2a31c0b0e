"""Experiment config files and shipped presets.

One JSON document with sections env, features, model, planner, driver.
Hyperparameters keep the table names they are usually reported under
("variance of controls", "temperature parameter", "planning horizon",
"number of planning samples", "prior parameter", "posterior reshaping
constant", "episodes between model updates", "number of features",
"RFF bandwidth"), so a preset file reads like the table it came from.

Every validation error is a ConfigError whose message starts with the
offending key path (e.g. "planner.temperature parameter: ..."), which the
CLI passes through verbatim on exit code 2.
"""

from __future__ import annotations

import json
from importlib import resources

from .driver import POLICY_MODES, ExperimentConfig
from .envs import LqrEnv, MazeEnv, PendulumEnv, make_lqr, parse_maze_layout
from .features import MAZE_D_PHI, LqrConcatMap, MazeOneHotMap, rff_new
from .linalg import RngStream
from .planner import MppiConfig

FEATURES_STREAM = 7    # stream id reserved for drawing random feature maps

SECTIONS = ("env", "features", "model", "planner", "driver")

_REQUIRED = object()


class ConfigError(ValueError):
    """Invalid experiment config. `where` is the offending key path."""

    def __init__(self, where: str, message: str):
        self.where = where
        super().__init__(f"{where}: {message}")


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _coerce(where: str, value, kind: str):
    if kind == "number":
        if not _is_number(value):
            raise ConfigError(where, f"expected a number, got {value!r}")
        return float(value)
    if kind == "int":
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(where, f"expected an integer, got {value!r}")
        return value
    if kind == "string":
        if not isinstance(value, str):
            raise ConfigError(where, f"expected a string, got {value!r}")
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(where, f"expected true/false, got {value!r}")
        return value
    if kind == "vector":
        if (not isinstance(value, list) or not value
                or not all(_is_number(v) for v in value)):
            raise ConfigError(where, f"expected a list of numbers, got {value!r}")
        return [float(v) for v in value]
    if kind == "matrix":
        if (not isinstance(value, list) or not value
                or not all(isinstance(row, list) and row
                           and all(_is_number(v) for v in row) for row in value)):
            raise ConfigError(where, f"expected a list of number rows, got {value!r}")
        return [[float(v) for v in row] for row in value]
    if kind == "pair":
        if (not isinstance(value, list) or len(value) != 2
                or not all(_is_number(v) for v in value)):
            raise ConfigError(where, f"expected [low, high], got {value!r}")
        return [float(value[0]), float(value[1])]
    if kind == "int-list":
        if (not isinstance(value, list) or not value
                or not all(isinstance(v, int) and not isinstance(v, bool)
                           and v >= 0 for v in value)):
            raise ConfigError(where, f"expected a list of seeds (integers "
                                     f">= 0), got {value!r}")
        return list(value)
    raise AssertionError(f"unknown coercion kind {kind}")


class _Section:
    """Tracks which keys a section's builder consumed so leftovers can be
    reported by name instead of silently ignored."""

    def __init__(self, name: str, data):
        if not isinstance(data, dict):
            raise ConfigError(name, f"section must be an object, got "
                                    f"{type(data).__name__}")
        self.name = name
        self.data = data
        self.used: set = set()

    def take(self, key: str, kind: str, default=_REQUIRED, minimum=None,
             exclusive=False):
        where = f"{self.name}.{key}"
        self.used.add(key)
        value = self.data.get(key)
        if value is None:           # absent and explicit null both mean default
            if default is _REQUIRED:
                raise ConfigError(where, "missing required key")
            return default
        value = _coerce(where, value, kind)
        if minimum is not None:
            if exclusive and not value > minimum:
                raise ConfigError(where, f"must be > {minimum}, got {value}")
            if not exclusive and not value >= minimum:
                raise ConfigError(where, f"must be >= {minimum}, got {value}")
        return value

    def finish(self):
        unknown = sorted(set(self.data) - self.used)
        if unknown:
            raise ConfigError(f"{self.name}.{unknown[0]}", "unknown key")


# -------------------------------------------------------------- env section

def _layout_walls(where: str, layout) -> tuple:
    """Resolve a layout value: a name loads presets/maze_<name>.txt, a list
    of strings is the layout text inline. Returns (walls, echo_value)."""
    if isinstance(layout, str):
        asset = resources.files("knr").joinpath("presets", f"maze_{layout}.txt")
        try:
            text = asset.read_text()
        except FileNotFoundError:
            raise ConfigError(where, f"unknown layout name {layout!r}") from None
        echo = layout
    elif isinstance(layout, list) and all(isinstance(s, str) for s in layout):
        text = "\n".join(layout)
        echo = list(layout)
    else:
        raise ConfigError(where, f"expected a layout name or a list of layout "
                                 f"lines, got {layout!r}")
    try:
        return parse_maze_layout(text), echo
    except ValueError as exc:
        raise ConfigError(where, str(exc)) from None


def _build_env(sec: _Section):
    kind = sec.take("kind", "string")
    if kind == "maze":
        layout = sec.data.get("layout", "serpentine")
        sec.used.add("layout")
        walls, layout_echo = _layout_walls("env.layout", layout)
        horizon = sec.take("horizon", "int", default=30, minimum=1)
        start = sec.take("start", "pair", default=[-1.0, -1.0])
        goal = sec.take("goal", "pair", default=[1.0, 1.0])
        env = MazeEnv(walls=walls, horizon=horizon,
                      start=tuple(start), goal=tuple(goal))
        echo = {"kind": "maze", "layout": layout_echo, "horizon": horizon,
                "start": start, "goal": goal}
    elif kind == "lqr":
        a = sec.take("a", "matrix")
        b = sec.take("b", "matrix")
        q = sec.take("q", "matrix")
        r = sec.take("r", "matrix")
        sigma = sec.take("noise std", "number", default=0.0, minimum=0.0)
        horizon = sec.take("horizon", "int", minimum=1)
        x0 = sec.take("x0", "vector")
        try:
            env = make_lqr(a, b, q, r, sigma, horizon, x0)
        except ValueError as exc:
            raise ConfigError("env", str(exc)) from None
        echo = {"kind": "lqr", "a": a, "b": b, "q": q, "r": r,
                "noise std": sigma, "horizon": horizon, "x0": x0}
    elif kind == "pendulum":
        sigma = sec.take("noise std", "number", default=0.01, minimum=0.0)
        horizon = sec.take("horizon", "int", default=40, minimum=1)
        u_max = sec.take("max torque", "number", default=2.0, minimum=0.0,
                         exclusive=True)
        env = PendulumEnv(sigma=sigma, horizon=horizon, u_max=u_max)
        echo = {"kind": "pendulum", "noise std": sigma, "horizon": horizon,
                "max torque": u_max}
    else:
        raise ConfigError("env.kind", f"unknown environment kind {kind!r}; "
                                      f"expected maze, lqr, or pendulum")
    sec.finish()
    return env, echo


# --------------------------------------------------------- features section

def _build_features(sec: _Section, env, run_seed: int):
    kind = sec.take("kind", "string")
    if kind in ("maze-onehot", "lqr-concat"):
        if kind == "maze-onehot":
            if not isinstance(env, MazeEnv):
                raise ConfigError("features.kind",
                                  "maze-onehot features need a maze environment")
            fmap = MazeOneHotMap()
        else:
            if not isinstance(env, LqrEnv):
                raise ConfigError("features.kind",
                                  "lqr-concat features need an lqr environment")
            fmap = LqrConcatMap(env.d_x, env.d_u)
        # dimension is implied by the kind; accept it only as a cross-check
        d_phi = sec.take("number of features", "int", default=fmap.d_phi)
        if d_phi != fmap.d_phi:
            raise ConfigError("features.number of features",
                              f"{kind} features have exactly {fmap.d_phi}, "
                              f"got {d_phi}")
        sec.finish()
        return fmap, {"kind": kind, "number of features": fmap.d_phi}
    if kind == "rff":
        d_phi = sec.take("number of features", "int", minimum=1)
        bandwidth = sec.take("RFF bandwidth", "number", minimum=0.0,
                             exclusive=True)
        seed = sec.take("seed", "int", default=None, minimum=0)
        sec.finish()
        map_seed = run_seed if seed is None else seed
        fmap = rff_new(env.d_x + env.d_u, d_phi, bandwidth,
                       RngStream(map_seed, FEATURES_STREAM))
        fmap.seed = map_seed
        return fmap, {"kind": kind, "number of features": d_phi,
                      "RFF bandwidth": bandwidth, "seed": map_seed}
    raise ConfigError("features.kind", f"unknown feature kind {kind!r}; "
                                       f"expected maze-onehot, lqr-concat, or rff")


# ------------------------------------------------------------ model section

def _build_model(sec: _Section, env):
    env_sigma = float(getattr(env, "sigma", 0.0))
    sigma = sec.take("noise std", "number", default=None, minimum=0.0,
                     exclusive=True)
    if sigma is None:
        if env_sigma <= 0.0:
            raise ConfigError("model.noise std",
                              "required when the environment has no process "
                              "noise to inherit")
        sigma = env_sigma
    norm_bound = sec.take("norm bound", "number", default=None, minimum=0.0,
                          exclusive=True)
    # the usual default: prior = noise variance over the squared norm bound
    lam_default = sigma ** 2 / (norm_bound if norm_bound is not None else 1.0) ** 2
    lam = sec.take("prior parameter", "number", default=lam_default,
                   minimum=0.0, exclusive=True)
    form = sec.take("confidence form", "string", default="appendix")
    if form not in ("appendix", "main-text"):
        raise ConfigError("model.confidence form",
                          f"expected 'appendix' or 'main-text', got {form!r}")
    c1 = sec.take("c1", "number", default=16.0, minimum=0.0, exclusive=True)
    sec.finish()
    echo = {"noise std": sigma, "prior parameter": lam,
            "norm bound": norm_bound, "confidence form": form, "c1": c1}
    return lam, sigma, norm_bound, form, c1, echo


# ---------------------------------------------------------- planner section

def _build_planner(sec: _Section):
    variance = sec.take("variance of controls", "number", minimum=0.0,
                        exclusive=True)
    temperature = sec.take("temperature parameter", "number", minimum=0.0,
                           exclusive=True)
    horizon = sec.take("planning horizon", "int", minimum=1)
    n_samples = sec.take("number of planning samples", "int", minimum=1)
    bounds = sec.take("control bounds", "pair", default=[-1.0, 1.0])
    if not bounds[0] < bounds[1]:
        raise ConfigError("planner.control bounds",
                          f"low must be < high, got {bounds}")
    plan_iters = sec.take("refinement passes", "int", default=1, minimum=1)
    sec.finish()
    planner = MppiConfig(control_variance=variance, temperature=temperature,
                         horizon=horizon, n_samples=n_samples,
                         u_min=bounds[0], u_max=bounds[1])
    echo = {"variance of controls": variance, "temperature parameter": temperature,
            "planning horizon": horizon, "number of planning samples": n_samples,
            "control bounds": bounds, "refinement passes": plan_iters}
    return planner, plan_iters, echo


# ----------------------------------------------------------- driver section

def _build_driver(sec: _Section, seed_override):
    episodes = sec.take("episodes", "int", minimum=1)
    reshape = sec.take("posterior reshaping constant", "number", default=0.0,
                       minimum=0.0)
    period = sec.take("episodes between model updates", "int", default=1,
                      minimum=1)
    seed = sec.take("seed", "int", default=0, minimum=0)
    seeds = sec.take("seeds", "int-list", default=None)
    policy = sec.take("policy", "string", default="thompson")
    if policy not in POLICY_MODES:
        raise ConfigError("driver.policy",
                          f"expected one of {', '.join(POLICY_MODES)}, "
                          f"got {policy!r}")
    rollouts = sec.take("oracle rollouts", "int", default=20, minimum=1)
    candidates = sec.take("candidates", "int", default=8, minimum=1)
    pin = sec.take("pin true model", "bool", default=False)
    sec.finish()
    if seed_override is not None:
        seed = int(seed_override)
        if seed < 0:
            raise ConfigError("driver.seed", f"must be >= 0, got {seed}")
    echo = {"episodes": episodes, "posterior reshaping constant": reshape,
            "episodes between model updates": period, "seed": seed,
            "policy": policy, "oracle rollouts": rollouts,
            "candidates": candidates, "pin true model": pin}
    if seeds is not None:
        echo["seeds"] = seeds
    return episodes, reshape, period, seed, seeds, policy, rollouts, \
        candidates, pin, echo


# ------------------------------------------------------------------ facade

def build_experiment(doc, seed_override=None):
    """Resolve a config document into (ExperimentConfig, resolved echo).

    The echo is the document with every default filled in; it is what
    summary.json records, and feeding it back reproduces the run.
    """
    if not isinstance(doc, dict):
        raise ConfigError("config", f"expected a JSON object, got "
                                    f"{type(doc).__name__}")
    unknown = sorted(set(doc) - set(SECTIONS))
    if unknown:
        raise ConfigError(unknown[0], "unknown section")
    for name in ("env", "features", "planner", "driver"):
        if name not in doc:
            raise ConfigError(name, "missing required section")

    (episodes, reshape, period, seed, seeds, policy, rollouts, candidates,
     pin, driver_echo) = _build_driver(_Section("driver", doc["driver"]),
                                       seed_override)
    env, env_echo = _build_env(_Section("env", doc["env"]))
    fmap, feat_echo = _build_features(_Section("features", doc["features"]),
                                      env, seed)
    lam, sigma, norm_bound, form, c1, model_echo = _build_model(
        _Section("model", doc.get("model", {})), env)
    planner, plan_iters, planner_echo = _build_planner(
        _Section("planner", doc["planner"]))

    cfg = ExperimentConfig(
        env=env, feature_map=fmap, lam=lam, sigma=sigma, planner=planner,
        reshape_scale=reshape, episodes=episodes, model_update_period=period,
        seed=seed, oracle_rollouts=rollouts, plan_iters=plan_iters,
        w_star_norm_bound=norm_bound, c1=c1, beta_form=form,
        policy_mode=policy, n_candidates=candidates, pin_true_model=pin,
    )
    echo = {"env": env_echo, "features": feat_echo, "model": model_echo,
            "planner": planner_echo, "driver": driver_echo}
    return cfg, echo


def sweep_seeds(doc) -> list:
    """The seed list a sweep runs over (driver.seeds)."""
    if not isinstance(doc, dict) or not isinstance(doc.get("driver"), dict):
        raise ConfigError("driver", "missing required section")
    seeds = doc["driver"].get("seeds")
    if seeds is None:
        raise ConfigError("driver.seeds", "sweep needs a seed list")
    return _coerce("driver.seeds", seeds, "int-list")


def load_config(path) -> dict:
    """Parse a config file; JSON syntax errors keep their line/column."""
    try:
        with open(path) as f:
            text = f.read()
    except OSError as exc:
        raise ConfigError(str(path), exc.strerror or "cannot read") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None


def preset_names() -> list:
    files = resources.files("knr").joinpath("presets")
    return sorted(p.name[:-5] for p in files.iterdir()
                  if p.name.endswith(".json"))


def load_preset(name: str) -> dict:
    asset = resources.files("knr").joinpath("presets", f"{name}.json")
    try:
        text = asset.read_text()
    except FileNotFoundError:
        raise ConfigError("preset", f"unknown preset {name!r}; available: "
                                    f"{', '.join(preset_names())}") from None
    return json.loads(text)
