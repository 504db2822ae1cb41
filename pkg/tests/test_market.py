import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from consumer_search.errors import (
    InconsistencyError,
    InvalidArgumentError,
    NonErgodicError,
    UnsupportedConfigurationError,
)
from consumer_search.market import (
    MarketParams,
    StoreState,
    fishman_residuals,
    implied_search_cost,
    reservation_surplus,
    reward,
    solve_fishman_system,
    steady_state,
    surplus_linear_demand,
    transition_matrix,
    transition_step,
)

GRID_BETA = [round(0.1 * i, 1) for i in range(10)]


def sym(beta, delta=0.9, cost=1.0, s_low=10.0, s_high=4.0):
    return MarketParams(beta_low=beta, beta_high=beta, delta=delta, cost=cost, s_low=s_low, s_high=s_high)


def test_reward():
    p = MarketParams(s_low=10, s_high=4)
    assert reward(StoreState.LOW, p) == 10
    assert reward(StoreState.HIGH, p) == 4
    q = MarketParams(s_low=7, s_high=7)
    assert reward(1, q) == reward(0, q) == 7


def test_state_coding():
    assert int(StoreState.LOW) == 1 and int(StoreState.HIGH) == 0
    assert StoreState.LOW.row == 0 and StoreState.HIGH.row == 1


@pytest.mark.parametrize(
    "kwargs",
    [
        {"m_total": 0},
        {"beta_low": 1.5},
        {"beta_high": -0.1},
        {"delta": 1.0},
        {"cost": -1.0},
        {"s_low": 3.0, "s_high": 4.0},
    ],
)
def test_params_validation(kwargs):
    with pytest.raises(InvalidArgumentError):
        MarketParams(**kwargs)


def test_linear_demand_surplus():
    assert surplus_linear_demand(1, 1, 0) == 0.5
    assert surplus_linear_demand(1, 1, 1) == 0.0
    assert surplus_linear_demand(2, 1, 1) == 0.5
    assert surplus_linear_demand(2, 1, 5) == 0.0
    with pytest.raises(InvalidArgumentError):
        surplus_linear_demand(0, 1, 0)
    with pytest.raises(InvalidArgumentError):
        surplus_linear_demand(1, -1, 0)


def test_linear_demand_surplus_matches_riemann_sum():
    a, b, price = 3.0, 0.5, 1.2
    x = np.linspace(price, a / b, 200001)
    d = a - b * x
    integral = np.sum((d[1:] + d[:-1]) / 2 * np.diff(x))
    assert surplus_linear_demand(a, b, price) == pytest.approx(integral, abs=1e-9)


def test_transition_matrix_rows():
    p = transition_matrix(0.3, 0.8)
    np.testing.assert_allclose(p, [[0.3, 0.7], [0.2, 0.8]], atol=1e-15)
    assert np.allclose(p.sum(axis=1), 1.0, atol=1e-12)


@pytest.mark.parametrize("beta", [0.0, 0.2, 0.5, 0.9, 0.999])
def test_steady_state_symmetric_is_even_split(beta):
    np.testing.assert_allclose(steady_state(transition_matrix(beta, beta)), [0.5, 0.5], atol=1e-15)


def test_steady_state_absorbing_low():
    np.testing.assert_array_equal(steady_state(transition_matrix(1.0, 0.5)), [1.0, 0.0])


def test_steady_state_frozen_market_is_an_error():
    with pytest.raises(NonErgodicError):
        steady_state(transition_matrix(1.0, 1.0))


@given(st.floats(0, 1), st.floats(0, 1))
def test_steady_state_is_fixed_point(b_l, b_h):
    if b_l == 1.0 and b_h == 1.0:
        return
    p = transition_matrix(b_l, b_h)
    pi = steady_state(p)
    assert pi.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.max(np.abs(pi @ p - pi)) < 1e-12


def test_transition_step_frozen_and_flipping():
    rng = np.random.default_rng(0)
    states = np.array([1, 0, 0, 1, 1], dtype=np.int8)
    np.testing.assert_array_equal(transition_step(states, transition_matrix(1, 1), rng), states)
    np.testing.assert_array_equal(transition_step(states, transition_matrix(0, 0), rng), 1 - states)


def test_transition_step_binomial_fraction():
    rng = np.random.default_rng(12345)
    n = 10**5
    states = np.ones(n, dtype=np.int8)
    out = transition_step(states, transition_matrix(0.5, 0.5), rng)
    sigma = math.sqrt(0.25 / n)
    assert abs(out.mean() - 0.5) < 3 * sigma


def test_transition_step_preserves_stationary_distribution():
    p = transition_matrix(0.7, 0.4)
    pi_low = steady_state(p)[0]
    rng = np.random.default_rng(99)
    n = 10**5
    states = (rng.random(n) < pi_low).astype(np.int8)
    out = transition_step(states, p, rng)
    sigma = math.sqrt(pi_low * (1 - pi_low) / n)
    assert abs(out.mean() - pi_low) < 3 * sigma


# --- equilibrium algebra -----------------------------------------------------


def test_reservation_surplus_examples():
    assert reservation_surplus(sym(0.9, delta=0.9, cost=1.0)) == pytest.approx(9.44, abs=1e-12)
    p1 = sym(1.0, delta=0.5, cost=1.0)
    assert reservation_surplus(p1) == pytest.approx(10 - 2 * 0.5 * 1.0, abs=1e-12)
    half = sym(0.5, delta=0.7, cost=1.5)
    assert reservation_surplus(half) == pytest.approx(10 - 3.0, abs=1e-12)


def test_reservation_surplus_requires_symmetric_market():
    with pytest.raises(UnsupportedConfigurationError):
        reservation_surplus(MarketParams(beta_low=0.9, beta_high=0.8))


@pytest.mark.parametrize("delta", [0.0, 0.3, 0.9])
def test_reservation_surplus_linear_increasing_in_beta(delta):
    cost = 2.0
    vals = [reservation_surplus(sym(b, delta=delta, cost=cost)) for b in GRID_BETA]
    slopes = np.diff(vals) / 0.1
    np.testing.assert_allclose(slopes, 4 * delta * cost, atol=1e-9)
    if delta > 0:
        assert all(np.diff(vals) > 0)


def test_reservation_surplus_costless_search():
    for b in GRID_BETA:
        assert reservation_surplus(sym(b, cost=0.0)) == 10.0


@pytest.mark.parametrize("delta", [0.0, 0.25, 0.5, 0.8, 0.95])
def test_persistent_market_indifference(delta):
    params = sym(1.0, delta=delta, cost=1.3)
    s_r = reservation_surplus(params)
    assert params.cost == pytest.approx(0.5 * (params.s_low - s_r) / (1 - delta), abs=1e-12)
    assert implied_search_cost(params, s_r) == pytest.approx(params.cost, abs=1e-12)


@pytest.mark.parametrize("delta", [0.0, 0.25, 0.5, 0.8, 0.95])
def test_half_persistence_indifference(delta):
    params = sym(0.5, delta=delta, cost=0.7)
    s_r = reservation_surplus(params)
    assert params.cost == pytest.approx(0.5 * (params.s_low - s_r), abs=1e-12)


def test_zero_persistence_does_not_give_half_form():
    # the text's "beta = 0" substitution does not produce the beta = 1/2 form
    params = sym(0.0, delta=0.9, cost=1.0)
    s_r = reservation_surplus(params)
    assert s_r == pytest.approx(6.2, abs=1e-12)
    assert 0.5 * (params.s_low - s_r) != pytest.approx(params.cost)


def test_solve_fishman_examples():
    rep = solve_fishman_system(sym(1.0, delta=0.5, cost=1.0), 9.0)
    assert rep.v_low == pytest.approx(20.0, abs=1e-12)
    assert rep.v_high == pytest.approx(18.0, abs=1e-12)

    rep = solve_fishman_system(sym(0.5, delta=0.6, cost=0.0), 10.0)
    assert rep.v_low == pytest.approx(10 / 0.4, abs=1e-12)
    assert rep.v_high == pytest.approx(rep.v_low, abs=1e-12)

    params = sym(0.0, delta=0.9, cost=1.0)
    rep = solve_fishman_system(params, reservation_surplus(params))
    assert rep.s_reservation == pytest.approx(6.2, abs=1e-12)
    assert rep.v_low - rep.v_high == pytest.approx(2.0, abs=1e-12)


def test_solve_fishman_matches_generic_linear_solve():
    params = sym(0.3, delta=0.8, cost=2.0)
    s_r = reservation_surplus(params)
    b, d = 0.3, 0.8
    a = np.array([[1 - d * b, -d * (1 - b)], [-d * (1 - b), 1 - d * b]])
    v_high, v_low = np.linalg.solve(a, [s_r, params.s_low])
    rep = solve_fishman_system(params, s_r)
    assert rep.v_high == pytest.approx(v_high, abs=1e-10)
    assert rep.v_low == pytest.approx(v_low, abs=1e-10)


def test_solve_fishman_inconsistent_reservation():
    with pytest.raises(InconsistencyError) as info:
        solve_fishman_system(sym(1.0, delta=0.5, cost=1.0), 8.0)
    assert info.value.residual == pytest.approx(-1.0, abs=1e-12)


@pytest.mark.parametrize(
    "beta, delta, cost",
    list(itertools.product(GRID_BETA, GRID_BETA, [0.0, 1.0, 10.0])),
)
def test_fishman_residuals_grid(beta, delta, cost):
    params = sym(beta, delta=delta, cost=cost)
    s_r = reservation_surplus(params)
    rep = solve_fishman_system(params, s_r)
    assert max(abs(r) for r in fishman_residuals(params, s_r, rep.v_low, rep.v_high)) < 1e-12
    assert rep.v_high == pytest.approx(rep.v_low - 2 * cost, abs=1e-12)
    assert rep.v_low >= rep.v_high


@given(
    st.floats(0, 1),
    st.floats(0, 0.95),
    st.floats(0, 5),
    st.floats(0, 5),
)
def test_value_gap_monotone_in_dispersion(beta, delta, spread, extra):
    # v_low - v_high from the Bellman pair alone, as dispersion grows
    def gap(s_r):
        p = sym(beta, delta=delta, cost=0.0)
        return (p.s_low - s_r) / (1 - delta * (2 * beta - 1))

    assert gap(10 - spread - extra) >= gap(10 - spread)
