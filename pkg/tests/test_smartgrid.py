"""Demand-management game: utilities, exact stage oracle, leader loop."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from airpd import (
    DualSetSchedule,
    SmartGridParams,
    StepSchedule,
    build_smartgrid_problem,
    epigraph_start,
    grid_revenue,
    optimal_price,
    pev_utility,
    run_solver,
    smartgrid_oracle,
    stackelberg_loop,
)

from test_solver import ExactChannel


def two_vehicle_params(price=30.0):
    return SmartGridParams(b=np.array([40.0, 50.0]), s=np.array([1.0, 1.0]),
                           capacity=10.0, price=price)


def test_pev_utility_hand_value():
    params = SmartGridParams(b=40.0, s=2.0, capacity=100.0, price=30.0)
    assert pev_utility(5.0, params)[0] == pytest.approx(25.0)


def test_grid_revenue_hand_value():
    u = np.array([33.0, 33.0, 33.0])
    assert grid_revenue(u, 35.0) == pytest.approx(3465.0)


def test_optimal_price_hand_value():
    params = SmartGridParams(b=50.0, s=1.5, capacity=100.0, price=0.0)
    assert optimal_price(params, 10.0)[0] == pytest.approx(35.0)


def test_oracle_capacity_binding_hand_case():
    u, mu, welfare = smartgrid_oracle(two_vehicle_params())
    assert_allclose(u, [0.0, 10.0], atol=1e-9)
    assert mu == pytest.approx(10.0, abs=1e-9)
    assert welfare == pytest.approx(150.0, abs=1e-6)


def test_oracle_unconstrained_case():
    params = SmartGridParams(b=np.array([40.0, 50.0]), s=np.array([1.0, 1.0]),
                             capacity=100.0, price=30.0)
    u, mu, _ = smartgrid_oracle(params)
    assert_allclose(u, [10.0, 20.0])
    assert mu == 0.0


def test_oracle_satisfies_stage_kkt_conditions():
    rng = np.random.default_rng(17)
    for _ in range(100):
        n = int(rng.integers(1, 12))
        params = SmartGridParams(
            b=rng.uniform(35.0, 65.0, size=n),
            s=rng.uniform(1.0, 2.0, size=n),
            capacity=float(rng.uniform(1.0, 40.0)),
            price=float(rng.uniform(20.0, 60.0)),
        )
        u, mu, _ = smartgrid_oracle(params)
        assert (u >= 0.0).all()
        assert u.sum() <= params.capacity + 1e-9
        assert mu >= 0.0
        if u.sum() < params.capacity - 1e-6:
            assert mu == pytest.approx(0.0, abs=1e-9)
        marginal = params.b - params.s * u - params.price
        # active vehicles share the marginal value p + mu; idle ones sit
        # below it
        assert_allclose(marginal[u > 1e-9], mu, atol=1e-6)
        assert (marginal[u <= 1e-9] <= mu + 1e-9).all()


def test_oracle_beats_random_feasible_points():
    rng = np.random.default_rng(18)
    params = SmartGridParams(b=rng.uniform(35.0, 65.0, size=6),
                             s=rng.uniform(1.0, 2.0, size=6),
                             capacity=25.0, price=40.0)
    u_star, _, welfare = smartgrid_oracle(params)
    for _ in range(200):
        v = np.maximum(u_star + rng.normal(0.0, 1.0, size=6), 0.0)
        if v.sum() > params.capacity:
            v *= params.capacity / v.sum()
        assert float(pev_utility(v, params).sum()) <= welfare + 1e-9


def test_problem_start_sits_on_constraint_boundary():
    params = two_vehicle_params()
    prob = build_smartgrid_problem(params)
    x0 = prob.draw_start(np.random.default_rng(19))
    assert_allclose(prob.constraint_values(x0), 0.0, atol=1e-12)
    assert x0[:2].sum() <= params.capacity + 1e-12


def test_problem_scales_only_reshape_the_numbers():
    """The scaled constraint is the original surplus gap, renamed."""
    params = two_vehicle_params()
    u = np.array([2.0, 5.0])
    y_natural = pev_utility(u, params) + np.array([1.0, -0.5])
    for util_scale, y_slope in ((0.02, 0.3), (1.0, 1.0), (0.005, 0.7)):
        prob = build_smartgrid_problem(params, util_scale=util_scale, y_slope=y_slope)
        x = np.concatenate([u, (util_scale / y_slope) * y_natural])
        want = util_scale * (y_natural - pev_utility(u, params))
        assert_allclose(prob.constraint_values(x), want, atol=1e-12)


def test_problem_projection_caps_demand_and_frees_surplus():
    params = two_vehicle_params()
    prob = build_smartgrid_problem(params)
    x = np.array([8.0, 6.0, -3.0, 99.0])
    out = prob.project(x)
    assert out[:2].sum() == pytest.approx(10.0)
    assert_allclose(out[2:], [-3.0, 99.0])


def test_problem_subgradients_match_finite_differences():
    params = two_vehicle_params()
    prob = build_smartgrid_problem(params)
    rng = np.random.default_rng(20)
    x = np.concatenate([rng.uniform(0.0, 5.0, 2), rng.uniform(-1.0, 1.0, 2)])
    g = prob.constraint_subgradients(x)
    eps = 1e-6
    for j in range(4):
        e = np.zeros(4)
        e[j] = eps
        num = (prob.constraint_values(x + e) - prob.constraint_values(x - e)) / (2 * eps)
        assert_allclose(g[:, j], num, rtol=1e-5, atol=1e-8)
    g0 = prob.objective_subgradient(x)
    for j in range(4):
        e = np.zeros(4)
        e[j] = eps
        num = (prob.objective(x + e) - prob.objective(x - e)) / (2 * eps)
        assert g0[j] == pytest.approx(num, abs=1e-8)


def test_problem_constraints_are_convex():
    params = two_vehicle_params()
    prob = build_smartgrid_problem(params)
    rng = np.random.default_rng(21)
    for _ in range(100):
        x = np.concatenate([rng.uniform(0.0, 8.0, 2), rng.uniform(-2.0, 2.0, 2)])
        xp = np.concatenate([rng.uniform(0.0, 8.0, 2), rng.uniform(-2.0, 2.0, 2)])
        f_x = prob.constraint_values(x)
        f_xp = prob.constraint_values(xp)
        g_xp = prob.constraint_subgradients(xp)
        assert (f_x >= f_xp + g_xp @ (x - xp) - 1e-9).all()


def test_solver_stage_approaches_oracle_demands():
    """A noiseless distributed stage lands near the exact stage solution."""
    params = two_vehicle_params()
    prob = build_smartgrid_problem(params)
    u_star, _, welfare_star = smartgrid_oracle(params)
    res = run_solver(prob, ExactChannel(), StepSchedule(2.0, 3.0),
                     DualSetSchedule(), rounds=2000,
                     rng=np.random.default_rng(22),
                     x0=epigraph_start(np.array([3.0, 6.0]), params))
    u_hat = res.x_avg[:2]
    assert not res.diverged
    assert u_hat.sum() == pytest.approx(params.capacity, abs=0.5)
    welfare_hat = float(pev_utility(u_hat, params).sum())
    assert welfare_hat == pytest.approx(welfare_star, rel=0.10)


def test_stackelberg_symmetric_fixed_point():
    """Identical vehicles: the settled price is b - s C / N."""
    params = SmartGridParams(b=np.full(4, 60.0), s=np.full(4, 1.5),
                             capacity=20.0, price=30.0)

    def exact_stage(stage, warm_u):
        u, _, _ = smartgrid_oracle(stage)
        return u, None

    out = stackelberg_loop(params, exact_stage)
    assert out.converged
    assert out.prices[-1] == pytest.approx(60.0 - 1.5 * 20.0 / 4.0)
    assert out.stages == 2
    assert_allclose(out.u, np.full(4, 5.0), atol=1e-9)


def test_stackelberg_asymmetric_market_clearing():
    """Exact stages settle on the price where demand just fits the cap."""
    for rule in ("max_u", "mean_u"):
        params = two_vehicle_params(price=20.0)

        def exact_stage(stage, warm_u):
            u, _, _ = smartgrid_oracle(stage)
            return u, None

        out = stackelberg_loop(params, exact_stage, price_rule=rule)
        assert out.converged
        assert out.prices[-1] == pytest.approx(40.0, abs=1e-9)
        assert_allclose(out.prices, [20.0, 40.0, 40.0], atol=1e-9)


def test_stackelberg_stops_on_diverged_stage():
    params = two_vehicle_params()

    class Blown:
        diverged = True

    def bad_stage(stage, warm_u):
        return np.zeros(2), Blown()

    out = stackelberg_loop(params, bad_stage)
    assert not out.converged
    assert out.stages == 1


def test_stackelberg_rejects_unknown_rule():
    with pytest.raises(ValueError):
        stackelberg_loop(two_vehicle_params(), lambda s, w: (np.zeros(2), None),
                         price_rule="median_u")


def test_params_validation():
    with pytest.raises(ValueError):
        SmartGridParams(b=np.array([1.0, 2.0]), s=np.array([1.0]), capacity=1.0, price=0.0)
    with pytest.raises(ValueError):
        SmartGridParams(b=1.0, s=0.0, capacity=1.0, price=0.0)
    with pytest.raises(ValueError):
        SmartGridParams(b=1.0, s=1.0, capacity=-1.0, price=0.0)
    with pytest.raises(ValueError):
        build_smartgrid_problem(two_vehicle_params(), util_scale=0.0)
    with pytest.raises(ValueError):
        build_smartgrid_problem(two_vehicle_params(), y_slope=-1.0)
