import numpy as np
import pytest
from hypothesis import given, settings

from laacoex import (
    ConfigError,
    NonConvergenceError,
    RateParams,
    Scheme,
    SchemeConfig,
    SolverSettings,
    StationaryDistribution,
    SystemState,
    balance_terms,
    dropping_probabilities,
    enumerate_states,
    solve_direct,
    solve_iterative,
)
from laacoex.solver import generator_matrix

from conftest import rate_params, scheme_configs, table1_rates

TIGHT = SolverSettings(alpha=1e-12)


def mm1k_blocking(rho: float, Q: int) -> float:
    """Blocking of an M/M/1 queue holding Q+1 customers (one in service)."""
    if rho == 1.0:
        return 1.0 / (Q + 2)
    return (1 - rho) * rho ** (Q + 1) / (1 - rho ** (Q + 2))


def birth_death_blocking(lam: float, mu: float, Q: int) -> float:
    """Independent route: solve the tridiagonal chain numerically, no closed form."""
    K = Q + 2
    G = np.zeros((K, K))
    for k in range(K - 1):
        G[k, k + 1] = lam
        G[k + 1, k] = mu
    G -= np.diag(G.sum(axis=1))
    A = np.vstack([G.T[:-1], np.ones(K)])
    b = np.zeros(K)
    b[-1] = 1
    return float(np.linalg.solve(A, b)[-1])


# -- settings ------------------------------------------------------------------------

@pytest.mark.parametrize("alpha", [0.0, 1.0, -1e-6])
def test_alpha_must_lie_in_unit_interval(alpha):
    with pytest.raises(ConfigError, match="alpha"):
        SolverSettings(alpha=alpha)


def test_max_iterations_must_be_positive():
    with pytest.raises(ConfigError, match="max_iterations"):
        SolverSettings(max_iterations=0)


# -- birth-death reduction -----------------------------------------------------------

@pytest.mark.parametrize("rho", [0.25, 0.5, 1.0, 2.0])
@pytest.mark.parametrize("Q", [1, 2, 3, 4, 5])
def test_ufa_without_wifi_is_mm1k(rho, Q):
    mu = 25.0
    rates = RateParams(lambda_l=rho * mu, lambda_w=0.0, mu_lu=mu, mu_w=40.0)
    dist, _ = solve_iterative(SchemeConfig(Scheme.UFA, Q=Q), rates, TIGHT)
    p_bl = dropping_probabilities(dist).p_bl
    assert p_bl == pytest.approx(mm1k_blocking(rho, Q), abs=1e-9)
    assert p_bl == pytest.approx(birth_death_blocking(rho * mu, mu, Q), abs=1e-9)


def test_unit_load_two_slot_queue_is_uniform():
    rates = RateParams(lambda_l=25, lambda_w=0, mu_lu=25, mu_w=40)
    dist, _ = solve_iterative(SchemeConfig(Scheme.UFA, Q=2), rates, TIGHT)
    live = [p for p in dist.values() if p > 0]
    assert len(live) == 4
    assert live == pytest.approx([0.25] * 4, abs=1e-9)
    assert dropping_probabilities(dist).p_bl == pytest.approx(0.25, abs=1e-9)


# -- iterative solver ----------------------------------------------------------------

def test_iterative_returns_distribution_and_sweep_count():
    dist, sweeps = solve_iterative(SchemeConfig(Scheme.UFA, Q=2), table1_rates(25))
    assert isinstance(dist, StationaryDistribution)
    assert sweeps == dist.iterations > 0
    assert dist.method == "iterative"


def test_iterative_is_deterministic():
    cfg = SchemeConfig(Scheme.UTAB, Q=4, q_theta=2)
    a, na = solve_iterative(cfg, table1_rates(50))
    b, nb = solve_iterative(cfg, table1_rates(50))
    assert na == nb
    assert np.array_equal(a.vector, b.vector)


def test_stopping_rule_holds_at_return():
    cfg = SchemeConfig(Scheme.UTA, Q=2)
    dist, _ = solve_iterative(cfg, table1_rates(37))
    # one more sweep from the returned point moves every live state by at most alpha * pi
    again, sweeps = solve_iterative(cfg, table1_rates(37), SolverSettings(alpha=1e-6, init=dict(dist)))
    live = dist.vector > 0
    assert np.all(np.abs(again.vector - dist.vector)[live] <= 2e-6 * dist.vector[live])


def test_non_convergence_is_reported():
    with pytest.raises(NonConvergenceError) as info:
        solve_iterative(SchemeConfig(Scheme.UTA, Q=3), table1_rates(25), SolverSettings(max_iterations=3))
    assert info.value.iterations == 3


def test_custom_initial_distribution_reaches_same_answer():
    cfg = SchemeConfig(Scheme.UFA, Q=3)
    space = enumerate_states(cfg)
    init = {s: 1.0 for s in space if s.z == 0}
    a, _ = solve_iterative(cfg, table1_rates(62.5), SolverSettings(alpha=1e-12, init=init))
    b, _ = solve_iterative(cfg, table1_rates(62.5), TIGHT)
    assert np.max(np.abs(a.vector - b.vector)) < 1e-10


def test_initial_distribution_must_have_mass():
    with pytest.raises(ConfigError, match="init"):
        solve_iterative(SchemeConfig(Scheme.UFA, Q=2), table1_rates(25), SolverSettings(init={}))


def test_ufa_idle_backlog_states_are_pruned():
    dist, _ = solve_iterative(SchemeConfig(Scheme.UFA, Q=2), table1_rates(25))
    assert set(dist.pruned) == {SystemState(2, 0, 0, 1), SystemState(2, 0, 0, 2)}
    assert all(dist[s] == 0.0 for s in dist.pruned)


@settings(max_examples=40, deadline=None)
@given(scheme_configs(), rate_params)
def test_iterative_normalised_and_balanced(cfg, rates):
    dist, _ = solve_iterative(cfg, rates, SolverSettings(alpha=1e-10))
    assert np.all(dist.vector >= 0)
    assert dist.vector.sum() == pytest.approx(1.0, abs=1e-12)
    for s in dist.space:
        if s in dist.pruned:
            continue
        eps_a, eps_b = balance_terms(s, dist, cfg, rates)
        assert dist[s] * eps_b == pytest.approx(eps_a, rel=1e-6, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(scheme_configs(), rate_params)
def test_iterative_matches_direct(cfg, rates):
    a, _ = solve_iterative(cfg, rates, TIGHT)
    b = solve_direct(cfg, rates)
    assert np.max(np.abs(a.vector - b.vector)) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(scheme_configs(), rate_params)
def test_dropping_probabilities_are_probabilities(cfg, rates):
    dist, _ = solve_iterative(cfg, rates)
    m = dropping_probabilities(dist)
    assert 0.0 <= m.p_bl <= 1.0 and 0.0 <= m.p_bw <= 1.0


# -- direct solver -------------------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(scheme_configs(), rate_params)
def test_direct_solution_has_small_residual(cfg, rates):
    dist = solve_direct(cfg, rates)
    G = generator_matrix(cfg, rates)
    assert np.max(np.abs(dist.vector @ G)) <= 1e-10 * np.max(np.abs(G))
    assert dist.vector.sum() == pytest.approx(1.0, abs=1e-12)


def test_generator_rows_sum_to_zero():
    G = generator_matrix(SchemeConfig(Scheme.UTAB, Q=3, q_theta=1), table1_rates(25))
    assert np.allclose(G.sum(axis=1), 0.0)


def test_direct_agrees_with_iterative_on_table1_ufa():
    cfg = SchemeConfig(Scheme.UFA, Q=2)
    a, _ = solve_iterative(cfg, table1_rates(25), TIGHT)
    b = solve_direct(cfg, table1_rates(25))
    assert np.max(np.abs(a.vector - b.vector)) < 1e-8


@pytest.mark.parametrize("scheme", [Scheme.UFA, Scheme.UTA])
def test_no_laa_traffic_leaves_queue_empty(scheme):
    cfg = SchemeConfig(scheme, Q=3)
    rates = RateParams(lambda_l=0, lambda_w=5, mu_lu=25, mu_w=40)
    direct = solve_direct(cfg, rates)
    iterative, _ = solve_iterative(cfg, rates, TIGHT)
    m = dropping_probabilities(direct)
    assert m.p_bl == 0.0 and m.p_bw == 0.0
    for dist in (direct, iterative):
        # transient mass decays geometrically under iteration, so allow round-off
        assert sum(p for s, p in dist.items() if s.z > 0 or s.x > 0) < 1e-12
    assert any(s.z > 0 for s in direct.pruned)
    assert np.max(np.abs(direct.vector - iterative.vector)) < 1e-9


def test_uta_without_laa_traffic_settles_in_off_phase():
    cfg = SchemeConfig(Scheme.UTA, Q=2)
    dist = solve_direct(cfg, RateParams(lambda_l=0, lambda_w=5, mu_lu=25, mu_w=40))
    assert sum(p for s, p in dist.items() if s.w == 0) == pytest.approx(1.0)


# -- metrics ---------------------------------------------------------------------------

def test_dropping_probability_sums_full_queue_mass():
    cfg = SchemeConfig(Scheme.UTA, Q=2)
    space = enumerate_states(cfg)
    vec = np.zeros(len(space))
    vec[space.index[SystemState(0, 0, 0, 2)]] = 0.25
    vec[space.index[SystemState(2, 1, 0, 2)]] = 0.15
    vec[space.index[SystemState(2, 0, 0, 0)]] = 0.6
    m = dropping_probabilities(StationaryDistribution(space, vec))
    assert m.p_bl == pytest.approx(0.4)
    assert m.p_bw == pytest.approx(0.15)


def test_empty_state_has_no_drops():
    cfg = SchemeConfig(Scheme.UFA, Q=2)
    space = enumerate_states(cfg)
    vec = np.zeros(len(space))
    vec[space.index[SystemState(2, 0, 0, 0)]] = 1.0
    m = dropping_probabilities(StationaryDistribution(space, vec))
    assert (m.p_bl, m.p_bw) == (0.0, 0.0)


def test_distribution_is_read_only_and_total():
    dist, _ = solve_iterative(SchemeConfig(Scheme.UFA, Q=2), table1_rates(25))
    with pytest.raises(ValueError):
        dist.vector[0] = 1.0
    assert dist[(2, 1, 1, 0)] == 0.0
    assert dist[(1, 0, 0, 0)] == 0.0
    assert len(dist) == 9


def test_fig4_trends_in_queue_size():
    # fig4 parameters, normalised by mu_w = 10
    for lam in (10.0, 50.0, 100.0):
        rates = RateParams(lambda_l=lam, lambda_w=5, mu_lu=10, mu_w=10, mu_s=10, mu_on=1, mu_off=1)
        pts = [dropping_probabilities(solve_iterative(SchemeConfig(Scheme.UTA, Q=q), rates, TIGHT)[0])
               for q in range(1, 6)]
        assert all(b.p_bl <= a.p_bl + 1e-12 for a, b in zip(pts, pts[1:]))
        assert all(b.p_bw >= a.p_bw - 1e-12 for a, b in zip(pts, pts[1:]))
