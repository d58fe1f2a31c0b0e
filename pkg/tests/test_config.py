import json

import numpy as np
import pytest

from knr.config import (
    ConfigError,
    build_experiment,
    load_config,
    load_preset,
    preset_names,
    sweep_seeds,
)
from knr.envs import LqrEnv, MazeEnv, PendulumEnv
from knr.features import LqrConcatMap, MazeOneHotMap, RffMap


def lqr_doc(**overrides):
    doc = {
        "env": {"kind": "lqr", "a": [[0.9]], "b": [[1.0]], "q": [[1.0]],
                "r": [[1.0]], "noise std": 0.1, "horizon": 10, "x0": [1.0]},
        "features": {"kind": "lqr-concat"},
        "model": {"prior parameter": 0.01},
        "planner": {"variance of controls": 0.25, "temperature parameter": 0.05,
                    "planning horizon": 10, "number of planning samples": 64,
                    "control bounds": [-3.0, 3.0]},
        "driver": {"episodes": 3},
    }
    doc.update(overrides)
    return doc


# ------------------------------------------------------------------ presets

def test_preset_names_lists_shipped_presets():
    assert {"maze", "lqr-toy", "pendulum-toy"} <= set(preset_names())


def test_unknown_preset_is_named():
    with pytest.raises(ConfigError, match="nosuch"):
        load_preset("nosuch")


def test_maze_preset_builds():
    cfg, echo = build_experiment(load_preset("maze"))
    assert isinstance(cfg.env, MazeEnv) and cfg.env.horizon == 30
    assert isinstance(cfg.feature_map, MazeOneHotMap)
    assert cfg.lam == 0.01 and cfg.sigma == 0.1
    assert cfg.planner.control_variance == 0.09
    assert cfg.planner.temperature == 0.05
    assert cfg.planner.horizon == 50
    assert cfg.planner.n_samples == 1024
    assert cfg.reshape_scale == 0.001
    assert cfg.episodes == 50 and cfg.model_update_period == 1
    assert len(cfg.env.walls) == 12
    assert echo["driver"]["seeds"] == [0, 1, 2, 3]


def test_lqr_toy_preset_builds():
    cfg, _ = build_experiment(load_preset("lqr-toy"))
    assert isinstance(cfg.env, LqrEnv)
    assert cfg.env.a == ((0.9,),) and cfg.env.sigma == 0.1
    assert isinstance(cfg.feature_map, LqrConcatMap)
    assert cfg.episodes == 200 and cfg.reshape_scale == 1.0
    assert cfg.plan_iters == 4
    assert cfg.planner.u_min == -3.0 and cfg.planner.u_max == 3.0


def test_pendulum_toy_preset_builds():
    cfg, echo = build_experiment(load_preset("pendulum-toy"))
    assert isinstance(cfg.env, PendulumEnv)
    assert isinstance(cfg.feature_map, RffMap)
    assert cfg.feature_map.d_phi == 64
    assert cfg.sigma == 0.01  # inherited from the environment
    assert echo["model"]["noise std"] == 0.01


# --------------------------------------------------------------- resolution

def test_echo_is_idempotent():
    for name in ("maze", "lqr-toy", "pendulum-toy"):
        _, echo = build_experiment(load_preset(name))
        _, echo2 = build_experiment(echo)
        assert echo2 == echo


def test_seed_override():
    cfg, echo = build_experiment(lqr_doc(), seed_override=99)
    assert cfg.seed == 99
    assert echo["driver"]["seed"] == 99


def test_rff_map_seed_defaults_to_run_seed():
    doc = {
        "env": {"kind": "pendulum"},
        "features": {"kind": "rff", "number of features": 16,
                     "RFF bandwidth": 1.5},
        "planner": {"variance of controls": 0.04, "temperature parameter": 0.3,
                    "planning horizon": 5, "number of planning samples": 8,
                    "control bounds": [-2.0, 2.0]},
        "driver": {"episodes": 1, "seed": 5},
    }
    cfg, echo = build_experiment(doc)
    assert cfg.feature_map.seed == 5
    assert echo["features"]["seed"] == 5
    doc["features"]["seed"] = 11
    cfg2, _ = build_experiment(doc)
    assert cfg2.feature_map.seed == 11
    assert not np.array_equal(cfg.feature_map.frequencies,
                              cfg2.feature_map.frequencies)
    cfg3, _ = build_experiment(doc)
    assert np.array_equal(cfg2.feature_map.frequencies,
                          cfg3.feature_map.frequencies)


def test_model_sigma_inherited_from_env():
    doc = lqr_doc(model={})
    cfg, echo = build_experiment(doc)
    assert cfg.sigma == 0.1
    # prior parameter default: noise variance over squared norm bound (1.0)
    assert cfg.lam == pytest.approx(0.01)
    assert echo["model"]["prior parameter"] == pytest.approx(0.01)


def test_prior_default_uses_norm_bound():
    doc = lqr_doc(model={"noise std": 0.2, "norm bound": 2.0})
    cfg, _ = build_experiment(doc)
    assert cfg.lam == pytest.approx(0.04 / 4.0)
    assert cfg.w_star_norm_bound == 2.0


def test_maze_requires_model_noise_std():
    doc = {
        "env": {"kind": "maze"},
        "features": {"kind": "maze-onehot"},
        "planner": {"variance of controls": 0.09, "temperature parameter": 0.05,
                    "planning horizon": 10, "number of planning samples": 8},
        "driver": {"episodes": 1},
    }
    with pytest.raises(ConfigError, match=r"model\.noise std"):
        build_experiment(doc)


def test_inline_maze_layout():
    lines = ["maze-layout 1",
             "+-+-+-+-+-+",
             "|. . . . .|",
             "+ + + + + +",
             "|. . . . .|",
             "+ + + + + +",
             "|. . . . .|",
             "+ + + + + +",
             "|. . . . .|",
             "+ + + + + +",
             "|. . . . .|",
             "+-+-+-+-+-+"]
    doc = {
        "env": {"kind": "maze", "layout": lines},
        "features": {"kind": "maze-onehot"},
        "model": {"noise std": 0.1},
        "planner": {"variance of controls": 0.09, "temperature parameter": 0.05,
                    "planning horizon": 10, "number of planning samples": 8},
        "driver": {"episodes": 1},
    }
    cfg, echo = build_experiment(doc)
    assert cfg.env.walls == frozenset()
    assert echo["env"]["layout"] == lines


# ------------------------------------------------------------------- errors

def test_unknown_section_is_named():
    with pytest.raises(ConfigError, match="plannerr"):
        build_experiment(lqr_doc(plannerr={}))


def test_unknown_key_is_named():
    doc = lqr_doc()
    doc["planner"]["temprature"] = 0.1
    with pytest.raises(ConfigError, match=r"planner\.temprature"):
        build_experiment(doc)


def test_missing_required_key_is_named():
    doc = lqr_doc()
    del doc["planner"]["variance of controls"]
    with pytest.raises(ConfigError, match="variance of controls"):
        build_experiment(doc)


def test_missing_section_is_named():
    doc = lqr_doc()
    del doc["features"]
    with pytest.raises(ConfigError, match="features"):
        build_experiment(doc)


def test_wrong_type_is_named():
    doc = lqr_doc()
    doc["planner"]["temperature parameter"] = "hot"
    with pytest.raises(ConfigError, match="temperature parameter"):
        build_experiment(doc)


def test_bool_is_not_a_number():
    doc = lqr_doc()
    doc["planner"]["temperature parameter"] = True
    with pytest.raises(ConfigError, match="temperature parameter"):
        build_experiment(doc)


def test_nonpositive_value_is_named():
    doc = lqr_doc()
    doc["planner"]["variance of controls"] = 0.0
    with pytest.raises(ConfigError, match="variance of controls"):
        build_experiment(doc)


def test_bad_control_bounds():
    doc = lqr_doc()
    doc["planner"]["control bounds"] = [1.0, -1.0]
    with pytest.raises(ConfigError, match="control bounds"):
        build_experiment(doc)


def test_unknown_env_kind():
    doc = lqr_doc(env={"kind": "cartpole"})
    with pytest.raises(ConfigError, match="cartpole"):
        build_experiment(doc)


def test_feature_env_mismatch():
    doc = lqr_doc(features={"kind": "maze-onehot"})
    with pytest.raises(ConfigError, match="maze"):
        build_experiment(doc)


def test_unknown_layout_name():
    doc = {
        "env": {"kind": "maze", "layout": "labyrinth"},
        "features": {"kind": "maze-onehot"},
        "model": {"noise std": 0.1},
        "planner": {"variance of controls": 0.09, "temperature parameter": 0.05,
                    "planning horizon": 10, "number of planning samples": 8},
        "driver": {"episodes": 1},
    }
    with pytest.raises(ConfigError, match="labyrinth"):
        build_experiment(doc)


def test_bad_policy_is_named():
    doc = lqr_doc()
    doc["driver"]["policy"] = "greedy"
    with pytest.raises(ConfigError, match=r"driver\.policy"):
        build_experiment(doc)


def test_negative_seed_rejected():
    doc = lqr_doc()
    doc["driver"]["seed"] = -1
    with pytest.raises(ConfigError, match=r"driver\.seed"):
        build_experiment(doc)


# -------------------------------------------------------------------- files

def test_load_config_reports_line_and_column(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "env": {,}\n}\n')
    with pytest.raises(ConfigError, match=r"bad\.json:2:11"):
        load_config(p)


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.json")


def test_load_config_round_trip(tmp_path):
    p = tmp_path / "ok.json"
    p.write_text(json.dumps(lqr_doc()))
    cfg, _ = build_experiment(load_config(p))
    assert cfg.episodes == 3


# -------------------------------------------------------------------- sweep

def test_sweep_seeds_from_preset():
    assert sweep_seeds(load_preset("maze")) == [0, 1, 2, 3]


def test_sweep_seeds_missing():
    doc = lqr_doc()
    with pytest.raises(ConfigError, match=r"driver\.seeds"):
        sweep_seeds(doc)


def test_sweep_seeds_rejects_negative():
    doc = lqr_doc()
    doc["driver"]["seeds"] = [0, -2]
    with pytest.raises(ConfigError, match=r"driver\.seeds"):
        sweep_seeds(doc)
