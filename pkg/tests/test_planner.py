import numpy as np
import pytest

from knr.linalg import RngStream
from knr.model import BallSpec, model_new
from knr.planner import (
    DynamicsOracle,
    MppiConfig,
    exhaustive_plan,
    mppi_plan,
    optimistic_plan,
    receding_horizon_step,
    rollout_cost,
)

IDENTITY = DynamicsOracle(step=lambda x, u: x + u)
ZERO_COST = lambda x, u, h: np.zeros(len(x))


def quad_cost(x, u, h):
    return np.sum(x * x, axis=1) + np.sum(u * u, axis=1)


# -------------------------------------------------------------------- mppi

def test_mppi_zero_cost_returns_mean_of_perturbations():
    cfg = MppiConfig(control_variance=0.25, temperature=1.0, horizon=4,
                     n_samples=4000, u_min=-50.0, u_max=50.0)
    nominal = np.zeros((4, 1))
    plan = mppi_plan(IDENTITY, ZERO_COST, np.zeros(1), nominal, cfg,
                     RngStream(1, 0))
    # mean of n i.i.d. N(0, 0.25) samples: |mean| <= 3 * 0.5 / sqrt(n)
    assert np.max(np.abs(plan)) < 3 * 0.5 / np.sqrt(4000)


def test_mppi_single_sample_is_that_sequence():
    cfg = MppiConfig(control_variance=1.0, temperature=0.5, horizon=3,
                     n_samples=1, u_min=-10.0, u_max=10.0)
    rng = RngStream(2, 100)
    plan = mppi_plan(IDENTITY, quad_cost, np.ones(1), np.zeros((3, 1)), cfg, rng)
    expected = np.clip(RngStream(2, 100).normal((3, 1)), -10.0, 10.0)
    assert np.array_equal(plan, expected)


def test_mppi_two_candidate_softmax_saturation():
    cfg = MppiConfig(control_variance=0.0, temperature=0.01, horizon=2,
                     n_samples=2, u_min=-5.0, u_max=5.0)
    perturb = np.zeros((2, 2, 1))
    perturb[1, :, 0] = 2.0  # candidate 2 moves away from the origin

    def cost(x, u, h):
        # candidate staying at zero scores 0, the other astronomically
        return np.where(np.abs(u[:, 0]) > 1.0, 1e6, 0.0)

    plan = mppi_plan(IDENTITY, cost, np.zeros(1), np.zeros((2, 1)), cfg,
                     RngStream(0, 0), perturbations=perturb)
    assert np.max(np.abs(plan)) < 1e-6


def test_mppi_weights_invariant_to_cost_offset():
    cfg = MppiConfig(control_variance=0.3, temperature=0.2, horizon=3,
                     n_samples=64, u_min=-3.0, u_max=3.0)
    shifted = lambda x, u, h: quad_cost(x, u, h) + 123.456
    a = mppi_plan(IDENTITY, quad_cost, np.ones(1), np.zeros((3, 1)), cfg,
                  RngStream(3, 50))
    b = mppi_plan(IDENTITY, shifted, np.ones(1), np.zeros((3, 1)), cfg,
                  RngStream(3, 50))
    assert np.allclose(a, b, rtol=1e-9, atol=1e-12)


def test_mppi_small_temperature_selects_best_sample():
    cfg_hot = MppiConfig(control_variance=0.5, temperature=1e-8, horizon=2,
                         n_samples=32, u_min=-3.0, u_max=3.0)
    rng = RngStream(4, 200)
    plan = mppi_plan(IDENTITY, quad_cost, np.ones(1), np.zeros((2, 1)),
                     cfg_hot, rng)
    # reproduce the candidate set and pick the argmin by hand
    cands = np.clip(np.stack([RngStream(4, 200 + k).normal((2, 1)) * np.sqrt(0.5)
                              for k in range(32)]), -3.0, 3.0)
    totals = rollout_cost(IDENTITY, quad_cost, np.ones(1), cands)
    assert np.allclose(plan, cands[np.argmin(totals)], atol=1e-9)


def test_mppi_rejects_bad_temperature_and_nominal():
    cfg = MppiConfig(control_variance=0.1, temperature=0.0, horizon=2, n_samples=4)
    with pytest.raises(ValueError, match="temperature"):
        mppi_plan(IDENTITY, ZERO_COST, np.zeros(1), np.zeros((2, 1)), cfg,
                  RngStream(0, 0))
    cfg = MppiConfig(control_variance=0.1, temperature=0.1, horizon=2, n_samples=4)
    with pytest.raises(ValueError, match="nominal"):
        mppi_plan(IDENTITY, ZERO_COST, np.zeros(1), np.zeros((3, 1)), cfg,
                  RngStream(0, 0))


def test_mppi_clamps_controls_to_bounds():
    cfg = MppiConfig(control_variance=25.0, temperature=1.0, horizon=3,
                     n_samples=16, u_min=-1.0, u_max=1.0)
    plan = mppi_plan(IDENTITY, ZERO_COST, np.zeros(1), np.zeros((3, 1)), cfg,
                     RngStream(5, 0))
    assert np.all(plan >= -1.0) and np.all(plan <= 1.0)


# -------------------------------------------------------- receding horizon

def test_receding_horizon_single_step_plan():
    cfg = MppiConfig(control_variance=0.2, temperature=0.5, horizon=1,
                     n_samples=8, u_min=-2.0, u_max=2.0)
    u, warm = receding_horizon_step(IDENTITY, quad_cost, np.ones(1),
                                    np.zeros((1, 1)), cfg, RngStream(6, 0))
    plan = mppi_plan(IDENTITY, quad_cost, np.ones(1), np.zeros((1, 1)), cfg,
                     RngStream(6, 0))
    assert np.array_equal(u, plan[0])
    assert warm.shape == (1, 1)


def test_receding_horizon_zero_variance_keeps_nominal():
    cfg = MppiConfig(control_variance=0.0, temperature=0.5, horizon=3,
                     n_samples=4, u_min=-2.0, u_max=2.0)
    nominal = np.array([[0.7], [-0.2], [0.1]])
    u, warm = receding_horizon_step(IDENTITY, quad_cost, np.ones(1), nominal,
                                    cfg, RngStream(7, 0))
    assert np.array_equal(u, nominal[0])
    assert np.array_equal(warm, [[-0.2], [0.1], [0.1]])  # shift, repeat last


def test_receding_horizon_determinism():
    cfg = MppiConfig(control_variance=0.4, temperature=0.3, horizon=5,
                     n_samples=32, u_min=-1.0, u_max=1.0)
    args = (IDENTITY, quad_cost, np.ones(1), np.zeros((5, 1)), cfg)
    u1, w1 = receding_horizon_step(*args, RngStream(8, 1000))
    u2, w2 = receding_horizon_step(*args, RngStream(8, 1000))
    assert np.array_equal(u1, u2) and np.array_equal(w1, w2)


# -------------------------------------------------------------- exhaustive

def test_exhaustive_single_action():
    plan, total = exhaustive_plan(IDENTITY, quad_cost, np.ones(1), [0.5], 3)
    assert np.array_equal(plan, [[0.5], [0.5], [0.5]])
    assert np.isclose(total,
                      rollout_cost(IDENTITY, quad_cost, np.ones(1), plan[None])[0])


def test_exhaustive_hand_enumerated_chain():
    # step costs pin the optimum at (second action, first action)
    def cost(x, u, h):
        target = 1.0 if h == 0 else 0.0
        return (u[:, 0] - target) ** 2

    plan, total = exhaustive_plan(IDENTITY, cost, np.zeros(1), [0.0, 1.0], 2)
    assert np.array_equal(plan, [[1.0], [0.0]])
    assert total == 0.0


def test_exhaustive_tie_break_lexicographic():
    plan, total = exhaustive_plan(IDENTITY, ZERO_COST, np.zeros(1),
                                  [0.25, -0.5, 1.0], 3)
    assert np.array_equal(plan, [[0.25], [0.25], [0.25]])  # first action index
    assert total == 0.0


def test_exhaustive_budget_error():
    with pytest.raises(ValueError, match="budget"):
        exhaustive_plan(IDENTITY, ZERO_COST, np.zeros(1), list(range(10)), 7)


def test_exhaustive_lower_bounds_mppi():
    actions = [-1.0, 0.0, 1.0]
    _, best = exhaustive_plan(IDENTITY, quad_cost, np.ones(1), actions, 4)
    cfg = MppiConfig(control_variance=0.5, temperature=0.2, horizon=4,
                     n_samples=64, u_min=-1.0, u_max=1.0)
    plan = mppi_plan(IDENTITY, quad_cost, np.ones(1), np.zeros((4, 1)), cfg,
                     RngStream(9, 0))
    mppi_total = rollout_cost(IDENTITY, quad_cost, np.ones(1), plan[None])[0]
    assert best <= mppi_total + 1e-12


# -------------------------------------------------------------- optimistic

def _plan_fn_factory(cost_by_key):
    def plan_fn(w, cost, x0):
        key = round(float(w[0, 0]), 6)
        return np.zeros((2, 1)), cost_by_key[key]
    return plan_fn


def test_optimistic_single_candidate_center():
    m = model_new(1, 2, 1.0, 1.0)
    spec = BallSpec(beta=10.0)
    w, plan = optimistic_plan([m.wbar.copy()], spec, m,
                              _plan_fn_factory({0.0: 3.5}), None, None)
    assert np.array_equal(w, m.wbar)


def test_optimistic_filters_before_minimizing():
    m = model_new(1, 2, 1.0, 1.0)
    spec = BallSpec(beta=0.01)
    inside = m.wbar + np.array([[0.05, 0.0]])
    outside = m.wbar + np.array([[50.0, 0.0]])  # cheaper plan, but outside
    plan_fn = _plan_fn_factory({0.05: 100.0, 50.0: 0.0})
    w, _ = optimistic_plan([outside, inside], spec, m, plan_fn, None, None)
    assert np.array_equal(w, inside)


def test_optimistic_matches_brute_force_min():
    m = model_new(1, 2, 1.0, 1.0)
    spec = BallSpec(beta=100.0)
    cands = [m.wbar + np.array([[v, 0.0]]) for v in (0.1, 0.2, 0.3)]
    costs = {0.1: 7.0, 0.2: 2.0, 0.3: 5.0}
    w, _ = optimistic_plan(cands, spec, m, _plan_fn_factory(costs), None, None)
    assert np.array_equal(w, cands[1])


def test_optimistic_falls_back_to_center():
    m = model_new(1, 2, 1.0, 1.0)
    spec = BallSpec(beta=1e-9)
    far = m.wbar + np.array([[10.0, 0.0]])
    calls = []

    def plan_fn(w, cost, x0):
        calls.append(w.copy())
        return np.zeros((1, 1)), 1.0

    w, _ = optimistic_plan([far], spec, m, plan_fn, None, None)
    assert np.array_equal(w, m.wbar)
    assert len(calls) == 1 and np.array_equal(calls[0], m.wbar)


def test_optimistic_rejects_empty():
    with pytest.raises(ValueError, match="candidate"):
        optimistic_plan([], BallSpec(beta=1.0), model_new(1, 2, 1.0, 1.0),
                        None, None, None)
