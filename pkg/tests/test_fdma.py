"""Rate model, scaled solver problem, and reference allocator for FDMA."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from airpd import (
    DualSetSchedule,
    FdmaParams,
    StepSchedule,
    build_fdma_problem,
    fdma_oracle,
    fdma_rate,
    max_min_rate,
    run_solver,
    sum_rate,
    unpack_allocation,
    user_rates,
)

from reference import waterfill
from test_solver import ExactChannel


def unit_params(**overrides):
    """Single user, single band, everything 1: rate = log2(1 + p).

    rate_scale is set to 1 because these toy rates are O(1); the default
    scale targets megabit-per-second magnitudes and would starve the
    reference solver's stopping rule of signal.
    """
    kwargs = dict(gains=np.ones((1, 1)), bandwidth_hz=1.0, n0_w_per_hz=1.0,
                  power_budget_w=1.0, r_th_bps=1e-9, rate_scale=1.0)
    kwargs.update(overrides)
    return FdmaParams(**kwargs)


def small_params(seed=23, n=2, k=3, r_th=1e5):
    rng = np.random.default_rng(seed)
    return FdmaParams(
        gains=rng.uniform(0.5, 2.0, size=(n, k)),
        bandwidth_hz=1e6,
        n0_w_per_hz=1e-7,
        power_budget_w=1.0,
        r_th_bps=r_th,
    )


def test_rate_hand_value_unit_snr():
    params = unit_params()
    r = fdma_rate(np.array([[1.0]]), np.array([[1.0]]), params)
    assert r[0, 0] == pytest.approx(1.0)    # w B log2(1 + 1) = B = 1


def test_rate_scales_with_bandwidth_fraction():
    params = unit_params()
    half = fdma_rate(np.array([[1.0]]), np.array([[0.5]]), params)[0, 0]
    # half the band at twice the power density: 0.5 log2(1 + 2)
    assert half == pytest.approx(0.5 * np.log2(3.0))


def test_rate_vanishes_with_band_share():
    params = unit_params()
    r = fdma_rate(np.array([[1.0]]), np.array([[0.0]]), params)[0, 0]
    assert 0.0 <= r < 1e-6


def test_sum_and_user_rates_are_sums():
    params = small_params()
    rng = np.random.default_rng(1)
    p = rng.uniform(0.0, 0.2, size=(2, 3))
    w = rng.uniform(0.1, 0.6, size=(2, 3))
    r = fdma_rate(p, w, params)
    assert sum_rate(p, w, params) == pytest.approx(r.sum())
    assert_allclose(user_rates(p, w, params), r.sum(axis=1))


def test_snr_slope_definition():
    params = small_params()
    want = params.gains**2 / (params.n0_w_per_hz * params.bandwidth_hz / 3)
    assert_allclose(params.snr_slope(), want)


def test_single_user_single_band_reference_solution():
    params = unit_params(power_budget_w=3.0)
    p, w, rate = fdma_oracle(params)
    # the reference solver is interior-point flavored; its barrier leaves
    # a ~1e-4 gap to the active budget constraint
    assert p[0, 0] == pytest.approx(3.0, abs=5e-4)
    assert w[0, 0] == pytest.approx(1.0, abs=1e-8)
    assert rate == pytest.approx(np.log2(4.0), rel=1e-4)


def test_single_user_reference_matches_waterfilling():
    slopes = np.array([0.5, 1.0, 2.0, 4.0])
    params = FdmaParams(gains=np.sqrt(slopes).reshape(1, 4), bandwidth_hz=4.0,
                        n0_w_per_hz=1.0, power_budget_w=3.0, r_th_bps=1e-9,
                        rate_scale=1.0)
    p, w, rate = fdma_oracle(params)
    p_ref, rate_ref = waterfill(3.0, slopes, band_hz=1.0)
    assert_allclose(w, np.ones((1, 4)), atol=1e-7)
    assert_allclose(p.ravel(), p_ref, atol=1e-4)
    assert rate == pytest.approx(rate_ref, rel=1e-6)


def test_reference_solution_satisfies_floors_and_budget():
    params = small_params()
    p, w, rate = fdma_oracle(params)
    assert p.sum() <= params.power_budget_w + 1e-8
    assert (p >= -1e-10).all()
    assert_allclose(w.sum(axis=0), 1.0, atol=1e-8)
    assert (user_rates(p, w, params) >= params.r_th_bps * (1 - 1e-6)).all()
    assert rate == pytest.approx(sum_rate(p, w, params), rel=1e-9)


def test_reference_raises_on_infeasible_floor():
    params = small_params(r_th=1e9)
    with pytest.raises(ValueError):
        fdma_oracle(params)


def test_max_min_rate_dominates_uniform_allocation():
    params = small_params()
    p0 = np.full((2, 3), params.power_budget_w / 6)
    w0 = np.full((2, 3), 0.5)
    assert max_min_rate(params) >= user_rates(p0, w0, params).min() * (1 - 1e-9)


def test_problem_projection_restores_both_feasibility_blocks():
    params = small_params()
    prob = build_fdma_problem(params)
    rng = np.random.default_rng(2)
    x = rng.uniform(-1.0, 2.0, size=prob.dimension)
    out = prob.project(x)
    p, w = unpack_allocation(out, params)
    assert (p >= 0).all()
    assert p.sum() <= params.power_budget_w + 1e-12
    assert_allclose(w.sum(axis=0), 1.0, atol=1e-12)
    assert (w >= 0).all()


def test_problem_constraints_report_scaled_rate_gap():
    params = small_params()
    prob = build_fdma_problem(params)
    rng = np.random.default_rng(3)
    x = prob.draw_start(rng)
    p, w = unpack_allocation(x, params)
    want = params.rate_scale * (params.r_th_bps - user_rates(p, w, params))
    assert_allclose(prob.constraint_values(x), want, rtol=1e-12)


def test_problem_objective_is_scaled_negative_sum_rate():
    params = small_params()
    prob = build_fdma_problem(params)
    x = prob.draw_start(np.random.default_rng(4))
    p, w = unpack_allocation(x, params)
    assert prob.objective(x) == pytest.approx(
        -params.objective_scale * sum_rate(p, w, params), rel=1e-12)


def test_problem_gradients_match_finite_differences():
    params = small_params()
    prob = build_fdma_problem(params)
    x = prob.draw_start(np.random.default_rng(5))
    jac = prob.constraint_subgradients(x)
    g0 = prob.objective_subgradient(x)
    for j in range(prob.dimension):
        e = np.zeros(prob.dimension)
        # relative probe: power entries are O(0.1), shares O(1e-4)
        e[j] = 1e-7 * max(abs(x[j]), 1e-3)
        num = (prob.constraint_values(x + e) - prob.constraint_values(x - e)) / (2 * e[j])
        assert_allclose(jac[:, j], num, rtol=2e-4, atol=1e-10)
        num0 = (prob.objective(x + e) - prob.objective(x - e)) / (2 * e[j])
        assert g0[j] == pytest.approx(num0, rel=2e-4, abs=1e-12)


def test_problem_constraints_are_convex_inside_box():
    params = small_params()
    prob = build_fdma_problem(params)
    rng = np.random.default_rng(6)
    for _ in range(100):
        x = prob.project(rng.uniform(prob.init_lo, prob.init_hi))
        xp = prob.project(rng.uniform(prob.init_lo, prob.init_hi))
        f_x = prob.constraint_values(x)
        f_xp = prob.constraint_values(xp)
        g_xp = prob.constraint_subgradients(xp)
        assert (f_x >= f_xp + g_xp @ (x - xp) - 1e-9).all()


def test_start_box_hugs_uniform_shares():
    """Starts stay interior: near uniform shares, never pinned at zero.

    The feasibility projection can shift entries below the raw box floor
    (the box draw may exceed the power budget slightly), so the lower
    check is the interiorness the design wants, not the box edge.
    """
    params = small_params()
    prob = build_fdma_problem(params)
    nk = 6
    uniform_p = params.power_budget_w / nk
    uniform_ws = params.w_scale / 2
    rng = np.random.default_rng(7)
    for _ in range(50):
        x = prob.draw_start(rng)
        assert (x[:nk] <= 1.2 * uniform_p + 1e-15).all()
        assert (x[:nk] >= 0.5 * uniform_p).all()
        assert x[:nk].sum() <= params.power_budget_w + 1e-15
        assert_allclose(x[nk:].reshape(2, 3).sum(axis=0), params.w_scale, atol=1e-12)
        assert (x[nk:] >= 0.5 * uniform_ws).all()
        assert (x[nk:] <= 1.2 * uniform_ws + 1e-12).all()


def test_noiseless_solve_improves_floor_violation():
    params = small_params(r_th=8e5)
    prob = build_fdma_problem(params)
    res = run_solver(prob, ExactChannel(), StepSchedule(1.0, 1e5), DualSetSchedule(vartheta=1.0),
                     rounds=400, rng=np.random.default_rng(8))
    assert not res.diverged
    p, w = unpack_allocation(res.x_avg, params)
    assert p.sum() <= params.power_budget_w + 1e-9
    assert_allclose(w.sum(axis=0), 1.0, atol=1e-9)
    natural_viol = res.log.violation / params.rate_scale
    assert natural_viol[-1] <= natural_viol[0]


def test_params_validation():
    with pytest.raises(ValueError):
        FdmaParams(gains=np.ones(3), bandwidth_hz=1.0, n0_w_per_hz=1.0,
                   power_budget_w=1.0, r_th_bps=1.0)
    with pytest.raises(ValueError):
        FdmaParams(gains=np.zeros((1, 1)), bandwidth_hz=1.0, n0_w_per_hz=1.0,
                   power_budget_w=1.0, r_th_bps=1.0)
    with pytest.raises(ValueError):
        unit_params(bandwidth_hz=-1.0)
