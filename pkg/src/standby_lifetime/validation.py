"""Built-in oracle suite run by ``standby-lifetime validate``

Each check compares a computed quantity with an independent reference and
records PASS, FAIL or SKIP. The engine comparison is skipped when a lifetime
would need more working periods than ``sim.FEASIBLE_PERIODS``; the two-element
reference mean always runs, on a slower repair rate when needed. A check that
hits a singular system is skipped, any other numerical failure fails it.
"""

import logging
import math
from dataclasses import replace
from enum import Enum
from typing import Callable, List, Optional

import numpy as np
from pydantic import BaseModel

from standby_lifetime.asym import exponential_limit_cdf, scaled_mean_ratio
from standby_lifetime.config_models import RunConfig
from standby_lifetime.dist import DeterministicSpec, TransformBackend, epsilon, lst, weighted_lst_sum
from standby_lifetime.errors import NumericalFailure, SingularSystem
from standby_lifetime.invert import InversionMethod, InversionSettings, invert_point, invert_transform
from standby_lifetime.lst import derivative_at_zero, mean_lifetimes, phi1_two_element, solve_phis
from standby_lifetime.model import SystemConfig, deterministic_eta_chain, mean_periods, repair_count_pmf
from standby_lifetime.sim import (
    Engine,
    child_seed,
    expected_periods,
    is_feasible,
    ks_critical_value,
    run_batch,
    two_sample_ks,
)

logger = logging.getLogger(__name__)

SELF_TEST_TOL = 1e-6
METHOD_AGREEMENT_TOL = 1e-3
REFERENCE_PERIODS = 1e3
REFERENCE_SAMPLES = 1000


class CheckStatus(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    SKIP = "SKIP"


class CheckResult(BaseModel):
    name: str
    module: str
    status: CheckStatus
    value: Optional[float] = None
    expected: Optional[float] = None
    tolerance: Optional[float] = None
    detail: str = ""


def _compare(name: str, module: str, value: float, expected: float, tolerance: float, detail: str = "") -> CheckResult:
    ok = abs(value - expected) <= tolerance
    return CheckResult(
        name=name,
        module=module,
        status=CheckStatus.PASS if ok else CheckStatus.FAIL,
        value=float(value),
        expected=float(expected),
        tolerance=tolerance,
        detail=detail,
    )


def _skip(name: str, module: str, reason: str) -> CheckResult:
    return CheckResult(name=name, module=module, status=CheckStatus.SKIP, detail=reason)


def _transform_tol(config: SystemConfig) -> float:
    return 1e-10 if config.working_time.transform_backend is TransformBackend.CLOSED_FORM else 1e-8


def check_weight_normalisation(config: SystemConfig) -> CheckResult:
    total = weighted_lst_sum(config.working_time, 0.0, config.mu).real
    return _compare("sum of g_j(0) up to truncation", "dist", total, 1.0, _transform_tol(config))


def check_weight_sum(config: SystemConfig) -> CheckResult:
    s = 1.0 / config.b
    model = config.working_time
    gap = abs(weighted_lst_sum(model, s, config.mu) - lst(model, s))
    return _compare("sum of g_j(s) = g(s) at s=1/b", "dist", gap, 0.0, _transform_tol(config))


def check_repair_count_pmf(config: SystemConfig) -> CheckResult:
    lam = config.mu * config.b
    kmax = int(lam + 20.0 * math.sqrt(lam) + 20)
    total = math.fsum(repair_count_pmf(config.mu, config.b, k) for k in range(kmax + 1))
    return _compare("repair count pmf sums to 1", "model", total, 1.0, 1e-12)


def check_deterministic_chain(config: SystemConfig, j0: int) -> CheckResult:
    name = "fundamental-matrix mean = E tau_j0"
    spec = config.working_time.spec
    if not isinstance(spec, DeterministicSpec):
        return _skip(name, "model", "needs a deterministic working time")
    if j0 == 0:
        return _skip(name, "model", "chain states start at one broken element")
    d = spec.params.value
    chain = deterministic_eta_chain(config, d)
    expected = mean_lifetimes(config)[j0]
    value = d * mean_periods(chain)[chain.index(j0)]
    return _compare(name, "model", value, expected, 1e-8 * expected)


def check_two_element_closed_form(config: SystemConfig) -> CheckResult:
    name = "phi_1 = g_0 / (1 - g + g_0)"
    if config.n != 2:
        return _skip(name, "lst", "closed form holds for n=2 only")
    gaps = []
    for scale in (0.1, 1.0, 10.0):
        for direction in (1.0, 1j, -1j):
            s = scale * direction / config.b
            gaps.append(abs(solve_phis(config, s).phi(1) - phi1_two_element(config, s)))
    return _compare(name, "lst", max(gaps), 0.0, 1e-10)


def check_transform_at_zero(config: SystemConfig, j0: int) -> CheckResult:
    gap = float(np.max(np.abs(solve_phis(config, 0.0).phis - 1.0)))
    return _compare("phi_j(0) = 1", "lst", gap, 0.0, 1e-8)


def check_mean_identity(config: SystemConfig, j0: int) -> CheckResult:
    """Wald's identity for n=2, the transform derivative otherwise"""
    if config.n == 2:
        means = mean_lifetimes(config)
        expected = config.b / epsilon(config.working_time, config.mu)
        return _compare(
            "E tau_1 = b/eps", "lst", means[1], expected, 1e-10 * expected, detail=f"E tau_1 = {means[1]:.6g}"
        )
    j = max(j0, 1)
    means = mean_lifetimes(config)
    derivative = -derivative_at_zero(lambda s: solve_phis(config, s).phis[j])
    return _compare(f"E tau_{j} = -phi_{j}'(0)", "lst", derivative, means[j], 1e-6 * means[j])


def check_reference_mean(config: SystemConfig, seed: int, workers: int) -> CheckResult:
    """Event-driven mean of a two-element system with the same law against Wald's b/eps.

    The repair rate is halved until a lifetime needs at most REFERENCE_PERIODS
    working periods, so the check runs for every configuration.
    """
    reference = replace(config, n=2)
    while not is_feasible(reference, 1, limit=REFERENCE_PERIODS):
        reference = reference.with_mu(0.5 * reference.mu)
    emp = run_batch(reference, 1, REFERENCE_SAMPLES, child_seed(seed, 2), Engine.EVENT_DRIVEN, workers)
    expected = reference.b / epsilon(reference.working_time, reference.mu)
    return _compare(
        "two-element event-driven mean = b/eps",
        "sim",
        emp.mean,
        expected,
        4.0 * emp.stderr,
        detail=f"n=2, mu={reference.mu:g}, N={REFERENCE_SAMPLES}",
    )


def check_engines(config: SystemConfig, j0: int, samples: int, seed: int, workers: int) -> List[CheckResult]:
    ks_name = "embedded vs event-driven KS"
    mean_name = "Monte Carlo mean within 3 stderr"
    if not is_feasible(config, j0):
        reason = f"{expected_periods(config, j0):.3e} expected working periods per lifetime"
        return [_skip(ks_name, "sim", reason), _skip(mean_name, "sim", reason)]

    embedded = run_batch(config, j0, samples, child_seed(seed, 0), Engine.EMBEDDED_CHAIN, workers)
    event = run_batch(config, j0, samples, child_seed(seed, 1), Engine.EVENT_DRIVEN, workers)
    ks = two_sample_ks(embedded, event)
    results = [_compare(ks_name, "sim", ks, 0.0, ks_critical_value(samples, samples), detail=f"N={samples}")]

    expected = float(mean_lifetimes(config)[j0])
    if not embedded.stderr_defined:
        results.append(_skip(mean_name, "sim", "one sample has no standard error"))
    else:
        results.append(
            _compare(mean_name, "sim", embedded.mean, expected, 3.0 * embedded.stderr, detail=f"N={samples}")
        )
    return results


def check_euler_self_test(config: SystemConfig) -> CheckResult:
    b = config.b
    gaps = []
    for unit in (0.1, 1.0, 3.0):
        t = unit * b
        value = invert_transform(lambda s: 1.0 / (s * (1.0 + b * s)), t)
        gaps.append(abs(value - exponential_limit_cdf(t, b)))
    return _compare("Euler inversion of 1/(s(1+bs))", "invert", max(gaps), 0.0, SELF_TEST_TOL)


def check_method_agreement(config: SystemConfig, j0: int) -> CheckResult:
    name = "Euler vs Gaver-Stehfest CDF at t = E tau_j0"
    if isinstance(config.working_time.spec, DeterministicSpec):
        return _skip(name, "invert", "lattice lifetimes have CDF jumps")
    t = float(mean_lifetimes(config)[j0])
    euler = invert_point(config, j0, t, InversionSettings(strict=False))
    stehfest = invert_point(config, j0, t, InversionSettings(method=InversionMethod.GAVER_STEHFEST, strict=False))
    return _compare(name, "invert", abs(euler.value - stehfest.value), 0.0, METHOD_AGREEMENT_TOL)


def check_scaled_mean_trend(config: SystemConfig, j0: int) -> CheckResult:
    """Scaled mean eps^{n-1} E tau_j / b moves toward 1 as mu grows"""
    name = "scaled mean ratio approaches 1 at 4 mu"
    faster = config.with_mu(4.0 * config.mu)
    if epsilon(faster.working_time, faster.mu) < 1e-8:
        return _skip(name, "asym", "eps at 4 mu too small for the mean-lifetime system")
    near = abs(scaled_mean_ratio(faster, j0) - 1.0)
    far = abs(scaled_mean_ratio(config, j0) - 1.0)
    return _compare(
        name,
        "asym",
        near,
        0.0,
        far + 1e-9,
        detail=f"|ratio - 1| {far:.3e} at mu, {near:.3e} at 4 mu",
    )


def _guarded(name: str, module: str, check: Callable[[], object]) -> List[CheckResult]:
    """Run one check; a singular system skips it and any other numerical failure fails it"""
    try:
        result = check()
    except SingularSystem as e:
        return [_skip(name, module, e.message)]
    except NumericalFailure as e:
        return [CheckResult(name=name, module=module, status=CheckStatus.FAIL, detail=f"{e.code}: {e.message}")]
    return result if isinstance(result, list) else [result]


def run_oracle_suite(run_config: RunConfig) -> List[CheckResult]:
    """Run every oracle against the configured system"""
    config = run_config.system_config()
    j0, seed = run_config.j0, run_config.seed
    plan = [
        ("sum of g_j(0) up to truncation", "dist", lambda: check_weight_normalisation(config)),
        ("sum of g_j(s) = g(s)", "dist", lambda: check_weight_sum(config)),
        ("repair count pmf", "model", lambda: check_repair_count_pmf(config)),
        ("deterministic chain", "model", lambda: check_deterministic_chain(config, j0)),
        ("n=2 closed form", "lst", lambda: check_two_element_closed_form(config)),
        ("phi_j(0) = 1", "lst", lambda: check_transform_at_zero(config, j0)),
        ("mean identity", "lst", lambda: check_mean_identity(config, j0)),
        (
            "engines",
            "sim",
            lambda: check_engines(config, j0, run_config.samples, seed, run_config.workers),
        ),
        ("two-element reference mean", "sim", lambda: check_reference_mean(config, seed, run_config.workers)),
        ("Euler self-test", "invert", lambda: check_euler_self_test(config)),
        ("method agreement", "invert", lambda: check_method_agreement(config, j0)),
        ("scaled mean trend", "asym", lambda: check_scaled_mean_trend(config, j0)),
    ]
    results = []
    for name, module, check in plan:
        for result in _guarded(name, module, check):
            logger.info(f"[{result.status.value}] {result.module}: {result.name} {result.detail}".rstrip())
            results.append(result)
    return results


def suite_passed(results: List[CheckResult]) -> bool:
    return all(r.status is not CheckStatus.FAIL for r in results)
