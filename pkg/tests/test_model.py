import math

import numpy as np
import pytest
from conftest import make_system

from standby_lifetime.dist import deterministic
from standby_lifetime.errors import DomainError
from standby_lifetime.lst import mean_lifetimes
from standby_lifetime.model import (
    ChainState,
    deterministic_eta_chain,
    mean_periods,
    next_broken,
    next_state,
    period_count_pmf,
    repair_count_pmf,
    sample_repair_count,
    sample_repair_counts,
)


def test_system_needs_two_elements():
    with pytest.raises(DomainError, match="n ≥ 2"):
        make_system(1, 1.0)


def test_system_needs_positive_repair_rate():
    with pytest.raises(DomainError):
        make_system(2, 0.0)


def test_repair_count_pmf_values():
    assert repair_count_pmf(2.0, 1.0, 0) == pytest.approx(math.exp(-2.0))
    assert repair_count_pmf(2.0, 1.0, 3) == pytest.approx(math.exp(-2.0) * 8 / 6)
    assert repair_count_pmf(2.0, 0.0, 0) == 1.0
    assert repair_count_pmf(2.0, 0.0, 1) == 0.0


def test_repair_count_pmf_sums_to_one():
    assert math.fsum(repair_count_pmf(3.0, 2.5, k) for k in range(100)) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize(
    "j, nu, expected",
    [
        (0, 0, ChainState(1)),
        (0, 7, ChainState(1)),
        (1, 0, ChainState(2)),
        (1, 1, ChainState(1)),
        (2, 0, ChainState(3)),
        (2, 1, ChainState(2)),
        (2, 5, ChainState(1)),
        (3, 0, ChainState.dead(4)),
        (3, 1, ChainState(3)),
        (3, 2, ChainState(2)),
        (3, 3, ChainState(1)),
        (3, 9, ChainState(1)),
    ],
)
def test_next_state_table(j, nu, expected):
    assert next_state(j, nu, 4) == expected


def test_next_broken_agrees_with_next_state():
    n = 5
    for j in range(n):
        for nu in range(n + 2):
            state = next_state(j, nu, n)
            assert next_broken(np.array([j]), np.array([nu]))[0] == state.broken


def transition_equations(j, nu, n):
    """Successor read off the four lifetime equations, one branch per equation"""
    if j == 0:
        return ChainState(1)
    if j <= n - 2:
        return ChainState(1) if nu >= j else ChainState(j + 1 - nu)
    if nu == 0:
        return ChainState.dead(n)
    if nu <= n - 2:
        return ChainState(n - nu)
    return ChainState(1)


@pytest.mark.parametrize("n", range(2, 7))
def test_next_state_matches_transition_equations(n):
    for j in range(n):
        for nu in range(n + 3):
            assert next_state(j, nu, n) == transition_equations(j, nu, n), (j, nu)


@pytest.mark.parametrize("n", range(2, 9))
def test_more_repairs_never_leave_more_broken(n):
    for j in range(1, n):
        counts = [next_state(j, nu, n).broken for nu in range(n + 3)]
        assert all(b <= a for a, b in zip(counts, counts[1:])), j


@pytest.mark.parametrize("n", range(2, 9))
def test_next_state_never_reaches_all_working(n):
    for j in range(n):
        for nu in range(n + 3):
            state = next_state(j, nu, n)
            assert state.broken >= 1
            assert state.absorbed == (state.broken == n)


def test_next_state_domain():
    with pytest.raises(DomainError):
        next_state(4, 0, 4)
    with pytest.raises(DomainError):
        next_state(1, -1, 4)


@pytest.mark.parametrize("lam", [0.3, 5.0, 29.0, 31.0, 400.0])
def test_sample_repair_counts_moments(rng, lam):
    draws = sample_repair_counts(rng, lam, np.ones(100_000))
    assert draws.min() >= 0
    assert abs(draws.mean() - lam) < 5 * math.sqrt(lam / draws.size)
    assert draws.var() == pytest.approx(lam, rel=0.05)


def test_sample_repair_count_zero_period(rng):
    assert sample_repair_count(rng, 5.0, 0.0) == 0


def test_deterministic_chain_is_stochastic():
    config = make_system(4, 2.0, deterministic(1.0))
    chain = deterministic_eta_chain(config, 1.0)
    assert chain.matrix.shape == (4, 4)
    assert np.allclose(chain.matrix.sum(axis=1), 1.0)
    assert chain.matrix[-1, -1] == 1.0
    # from n-1 broken only nu = 0 kills the system
    assert chain.exits[-1] == pytest.approx(math.exp(-2.0))


def test_deterministic_chain_needs_deterministic_law():
    with pytest.raises(DomainError):
        deterministic_eta_chain(make_system(3, 2.0), 1.0)
    with pytest.raises(DomainError):
        deterministic_eta_chain(make_system(3, 2.0, deterministic(1.0)), 2.0)


def test_fundamental_matrix_matches_mean_lifetimes():
    config = make_system(3, 2.0, deterministic(1.0))
    chain = deterministic_eta_chain(config, 1.0)
    periods = mean_periods(chain)
    means = mean_lifetimes(config)
    for broken in (1, 2):
        assert periods[chain.index(broken)] == pytest.approx(means[broken], rel=1e-10)


def test_period_count_pmf_two_elements_is_geometric():
    config = make_system(2, 2.0, deterministic(1.0))
    chain = deterministic_eta_chain(config, 1.0)
    p = math.exp(-2.0)
    pmf = period_count_pmf(chain, 1, 10)
    expected = [(1 - p) ** (k - 1) * p for k in range(1, 11)]
    assert np.allclose(pmf, expected, rtol=1e-12)


def test_period_count_pmf_mass():
    config = make_system(3, 2.0, deterministic(1.0))
    chain = deterministic_eta_chain(config, 1.0)
    pmf = period_count_pmf(chain, 1, 20_000)
    assert pmf.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.dot(np.arange(1, pmf.size + 1), pmf) == pytest.approx(mean_periods(chain)[0], rel=1e-8)
