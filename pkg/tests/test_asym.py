import logging
import math

import numpy as np
import pytest
from conftest import make_system

from standby_lifetime.asym import (
    convergence_sweep,
    expansion_check,
    exponential_limit_cdf,
    inversion_gap,
    limit_lst,
    limit_tail,
    lst_gap,
    ratio_recursion_check,
    scaled_mean_ratio,
)
from standby_lifetime.dist import WorkingTimeModel, deterministic, erlang, exponential, uniform
from standby_lifetime.errors import DomainError
from standby_lifetime.sim import Engine


def test_limit_law():
    assert exponential_limit_cdf(2.0, 2.0) == pytest.approx(1.0 - math.exp(-1.0))
    assert limit_tail(2.0, 2.0) == pytest.approx(math.exp(-1.0))
    assert np.allclose(exponential_limit_cdf(np.array([0.0, 1.0]), 1.0), [0.0, 1.0 - math.exp(-1.0)])
    assert limit_lst(1.0, 2.0) == pytest.approx(1.0 / 3.0)


def test_limit_law_domain():
    with pytest.raises(DomainError):
        exponential_limit_cdf(-1.0, 1.0)
    with pytest.raises(DomainError):
        exponential_limit_cdf(1.0, 0.0)
    with pytest.raises(DomainError):
        limit_lst(-1.0, 1.0)


def test_expansion_of_g_at_fast_repair():
    check = expansion_check(WorkingTimeModel(exponential(1.0)), 3, 40.0, 1.0)
    assert check.sigma == pytest.approx((1.0 / 41.0) ** 2)
    assert check.ratio("r_g").deviation < 1e-3
    assert check.ratio("r_g0").deviation < 1e-2
    assert len(check.weights_at_zero) == len(check.gammas) == 2


def test_expansion_needs_small_sigma():
    with pytest.raises(DomainError, match="increase mu"):
        expansion_check(WorkingTimeModel(exponential(1.0)), 2, 1.0, 1.0)


def test_weights_at_zero_vanish_with_fast_repair():
    model = WorkingTimeModel(exponential(1.0))
    checks = [expansion_check(model, 3, mu, 1.0) for mu in (10.0, 20.0, 40.0, 80.0)]
    gamma0 = [c.gammas[0] for c in checks]
    g1 = [c.weights_at_zero[1] for c in checks]
    assert all(b < a for a, b in zip(gamma0, gamma0[1:]))
    assert all(b < a for a, b in zip(g1, g1[1:]))

    lattice = expansion_check(WorkingTimeModel(deterministic(1.0)), 3, 80.0, 1.0)
    assert lattice.weights_at_zero[1] < 1e-3
    assert lattice.gammas[0] < 1e-3


def test_ratio_recursion_converges():
    checks = [ratio_recursion_check(make_system(4, mu), 1.0) for mu in (10.0, 40.0, 160.0)]
    for k in (2, 3):
        deviations = [c.deviation(k) for c in checks]
        assert all(b < a for a, b in zip(deviations, deviations[1:]))
        assert deviations[-1] < 0.1
    gaps = [c.max_ratio_gap for c in checks]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 0.02


def test_ratio_recursion_warns_outside_fast_repair(caplog):
    with caplog.at_level(logging.WARNING, logger="standby_lifetime.asym"):
        ratio_recursion_check(make_system(3, 2.0), 1.0)
    assert "fast-repair" in caplog.text


def test_ratio_recursion_needs_three_elements():
    with pytest.raises(DomainError):
        ratio_recursion_check(make_system(2, 40.0), 1.0)


@pytest.mark.parametrize("n, mu", [(2, 40.0), (3, 24.0)])
def test_lst_gap_is_small_at_fast_repair(n, mu):
    for j in sorted({0, 1, n - 1}):
        assert lst_gap(make_system(n, mu), j) < 0.05


@pytest.mark.parametrize(
    "spec", [exponential(1.0), erlang(2, 2.0), uniform(0.0, 2.0)], ids=["exponential", "erlang", "uniform"]
)
@pytest.mark.parametrize("n", [2, 3, 4])
def test_lst_gap_at_largest_default_rate(spec, n):
    assert lst_gap(make_system(n, 40.0, spec), 1) < 0.05


def test_lst_gap_shrinks():
    assert lst_gap(make_system(3, 40.0), 1) < lst_gap(make_system(3, 5.0), 1)


def test_scaled_mean_ratio_approaches_one():
    far = abs(scaled_mean_ratio(make_system(3, 5.0), 1) - 1.0)
    near = abs(scaled_mean_ratio(make_system(3, 40.0), 1) - 1.0)
    assert near < far
    assert scaled_mean_ratio(make_system(2, 3.0), 1) == pytest.approx(1.0, rel=1e-12)


def test_inversion_gap():
    assert inversion_gap(make_system(2, 40.0), 1, [0.5, 1.0, 2.0]) < 0.05


def test_sweep_rows():
    report = convergence_sweep(make_system(2, 1.0), 1, [5.0, 20.0], 20000, seed=4)
    assert [row.mu for row in report.rows] == [5.0, 20.0]
    assert report.rows[0].epsilon == pytest.approx(1.0 / 6.0)
    assert report.rows[1].ks_scaled < report.rows[0].ks_scaled
    assert report.rows[1].lst_gap < report.rows[0].lst_gap
    assert set(report.scaled_samples) == {5.0, 20.0}
    assert report.engine is Engine.EMBEDDED_CHAIN
    assert "scaled_samples" not in report.model_dump()


def test_sweep_is_reproducible():
    first = convergence_sweep(make_system(3, 1.0), 1, [4.0, 8.0], 500, seed=9)
    second = convergence_sweep(make_system(3, 1.0), 1, [4.0, 8.0], 500, seed=9)
    assert first.model_dump() == second.model_dump()


def test_sweep_skips_infeasible_rows():
    report = convergence_sweep(make_system(4, 1.0), 1, [5.0, 200.0], 200, seed=0)
    assert report.rows[0].ks_scaled is not None
    assert report.rows[1].ks_scaled is None
    assert report.rows[1].lst_gap < report.rows[0].lst_gap
    assert list(report.scaled_samples) == [5.0]


def test_sweep_converges_from_any_start_state():
    reports = [convergence_sweep(make_system(2, 1.0), j, [5.0, 40.0], 20000, seed=6) for j in (0, 1)]
    for report in reports:
        first, last = report.rows
        assert last.ks_scaled < 0.05
        assert last.lst_gap < first.lst_gap
        assert abs(last.scaled_mean_ratio - 1.0) <= abs(first.scaled_mean_ratio - 1.0) + 1e-12
    all_working, one_broken = (report.rows[-1] for report in reports)
    assert abs(all_working.scaled_mean_ratio - one_broken.scaled_mean_ratio) < 0.05
    assert abs(all_working.ks_scaled - one_broken.ks_scaled) < 0.05


@pytest.mark.slow
@pytest.mark.parametrize("n, mu_list", [(2, [5.0, 10.0, 20.0, 40.0]), (3, [3.0, 6.0, 12.0, 24.0])])
def test_sweep_converges_to_exponential(n, mu_list):
    report = convergence_sweep(make_system(n, 1.0), 1, mu_list, 100_000, seed=1, workers=4)
    ks = [row.ks_scaled for row in report.rows]
    assert all(b < a for a, b in zip(ks, ks[1:]))
    assert ks[-1] < 0.05
    assert 0.9 <= report.rows[-1].scaled_mean_ratio <= 1.1


@pytest.mark.parametrize(
    "kwargs",
    [
        {"mu_list": [5.0]},
        {"mu_list": [10.0, 5.0]},
        {"mu_list": [5.0, 10.0], "j": 3},
        {"mu_list": [5.0, 10.0], "s_grid": [0.0]},
    ],
)
def test_sweep_argument_checks(kwargs):
    arguments = {"j": 1, "sample_count": 10, "seed": 0, **kwargs}
    with pytest.raises(DomainError):
        convergence_sweep(make_system(3, 1.0), **arguments)
