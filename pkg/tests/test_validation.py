import pytest

from standby_lifetime import validation
from standby_lifetime.config_models import validate_config
from standby_lifetime.errors import QuadratureFailure, SingularSystem
from standby_lifetime.validation import CheckStatus, run_oracle_suite, suite_passed


def run_config(n, mu, distribution, samples=2000):
    return validate_config(
        {"system": {"n": n, "mu": mu, "distribution": distribution}, "seed": 3, "samples": samples}
    )


EXPONENTIAL = {"family": "exponential", "params": {"rate": 1.0}}
DETERMINISTIC = {"family": "deterministic", "params": {"value": 1.0}}


def statuses(results):
    return {r.name: r.status for r in results}


def test_deterministic_suite():
    results = run_oracle_suite(run_config(3, 2.0, DETERMINISTIC))
    found = statuses(results)
    assert found["fundamental-matrix mean = E tau_j0"] is CheckStatus.PASS
    assert found["phi_1 = g_0 / (1 - g + g_0)"] is CheckStatus.SKIP
    assert found["Euler vs Gaver-Stehfest CDF at t = E tau_j0"] is CheckStatus.SKIP
    assert found["E tau_1 = -phi_1'(0)"] is CheckStatus.PASS
    assert suite_passed(results)


def test_every_module_is_checked():
    results = run_oracle_suite(run_config(2, 3.0, EXPONENTIAL))
    assert {r.module for r in results} == {"dist", "model", "lst", "sim", "invert", "asym"}
    assert statuses(results)["E tau_1 = b/eps"] is CheckStatus.PASS


def test_slow_systems_skip_only_the_engine_comparison():
    results = run_oracle_suite(run_config(4, 40.0, EXPONENTIAL, samples=10))
    found = statuses(results)
    assert found["embedded vs event-driven KS"] is CheckStatus.SKIP
    assert found["Monte Carlo mean within 3 stderr"] is CheckStatus.SKIP
    assert found["phi_j(0) = 1"] is CheckStatus.PASS
    assert found["E tau_1 = -phi_1'(0)"] is CheckStatus.PASS
    assert found["two-element event-driven mean = b/eps"] is CheckStatus.PASS
    executed = {r.module for r in results if r.status is not CheckStatus.SKIP}
    assert {"lst", "sim"} <= executed


def test_reference_mean_slows_repair_until_feasible():
    config = run_config(4, 2000.0, EXPONENTIAL).system_config()
    result = validation.check_reference_mean(config, seed=3, workers=1)
    assert result.status is CheckStatus.PASS
    assert result.detail == "n=2, mu=500, N=1000"
    assert result.expected == pytest.approx(501.0)


def test_singular_system_skips_transform_checks(monkeypatch):
    def singular(config, s):
        raise SingularSystem("pivot below floor")

    monkeypatch.setattr(validation, "solve_phis", singular)
    results = run_oracle_suite(run_config(3, 2.0, EXPONENTIAL))
    skipped = {r.name: r.detail for r in results if r.status is CheckStatus.SKIP}
    assert skipped["phi_j(0) = 1"] == "pivot below floor"
    assert skipped["mean identity"] == "pivot below floor"
    assert suite_passed(results)


def test_astronomical_lifetimes_skip_instead_of_failing():
    results = run_oracle_suite(run_config(5, 10.0, DETERMINISTIC, samples=10))
    skipped = {r.name: r.detail for r in results if r.status is CheckStatus.SKIP}
    for name in ("deterministic chain", "phi_j(0) = 1", "mean identity", "engines"):
        assert "pivot" in skipped[name]
    found = statuses(results)
    assert found["two-element event-driven mean = b/eps"] is CheckStatus.PASS
    assert suite_passed(results)


def test_numerical_failure_becomes_a_failed_check(monkeypatch):
    def broken(config):
        raise QuadratureFailure("no convergence")

    monkeypatch.setattr(validation, "check_euler_self_test", broken)
    results = run_oracle_suite(run_config(2, 3.0, EXPONENTIAL))
    failed = [r for r in results if r.status is CheckStatus.FAIL]
    assert [r.name for r in failed] == ["Euler self-test"]
    assert failed[0].detail == "quadrature_failure: no convergence"
    assert not suite_passed(results)


def test_single_sample_skips_the_mean_check():
    found = statuses(run_oracle_suite(run_config(2, 3.0, EXPONENTIAL, samples=1)))
    assert found["Monte Carlo mean within 3 stderr"] is CheckStatus.SKIP


@pytest.mark.parametrize("mu", [0.5, 2.0])
def test_weight_checks_pass_for_quadrature_laws(mu):
    weibull = {"family": "weibull", "params": {"shape": 1.5, "scale": 1.0}}
    found = statuses(run_oracle_suite(run_config(2, mu, weibull, samples=500)))
    assert found["sum of g_j(0) up to truncation"] is CheckStatus.PASS
    assert found["sum of g_j(s) = g(s) at s=1/b"] is CheckStatus.PASS
