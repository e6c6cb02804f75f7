"""Fast-repair asymptotics

As mu grows, eps(mu) -> 0 and the scaled lifetime eps^{n-1} tau_j converges to
an exponential law with mean b. This module measures that convergence three
ways: Monte Carlo (KS distance of scaled samples), the transform solver
(phi_j(eps^{n-1} s) against 1/(1+bs)), and the first-order expansions of g and
g_j together with the ratios phi_k / phi_1 they imply.
"""

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, PrivateAttr

from standby_lifetime.dist import WorkingTimeModel, epsilon, gamma, lst, weighted_lst
from standby_lifetime.errors import DomainError
from standby_lifetime.invert import InversionSettings, invert_curve
from standby_lifetime.lst import mean_lifetimes, solve_phis
from standby_lifetime.model import SystemConfig
from standby_lifetime.sim import Engine, child_seed, expected_periods, is_feasible, ks_distance, run_batch

logger = logging.getLogger(__name__)

DEFAULT_S_GRID = (0.25, 1.0, 4.0)
EXPANSION_LIMIT = 0.1
FAST_REPAIR_EPSILON = 0.05


def exponential_limit_cdf(t, b: float):
    """1 - e^{-t/b}"""
    if not b > 0:
        raise DomainError(f"mean b must be positive, got {b}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("limit CDF needs t >= 0")
    value = -np.expm1(-t / b)
    return float(value) if value.ndim == 0 else value


def limit_tail(t, b: float):
    """e^{-t/b}"""
    value = 1.0 - np.asarray(exponential_limit_cdf(t, b))
    return float(value) if value.ndim == 0 else value


def limit_lst(s: complex, b: float) -> complex:
    """1 / (1 + bs)"""
    s = complex(s)
    if s.real < 0:
        raise DomainError(f"transform argument must have Re(s) >= 0, got {s}")
    return 1.0 / (1.0 + b * s)


class AsymptoticRow(BaseModel):
    mu: float
    epsilon: float
    ks_scaled: Optional[float]
    scaled_mean_ratio: float
    lst_gap: float


class AsymptoticReport(BaseModel):
    """One convergence sweep over ascending repair rates.

    ``ks_scaled`` is None for rows whose lifetimes are too long to simulate.
    Scaled samples are kept for plotting but never serialised.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    rows: List[AsymptoticRow]
    config: Dict
    j: int
    sample_count: int
    seed: int
    engine: Engine
    s_grid: List[float]

    _scaled_samples: Dict[float, np.ndarray] = PrivateAttr(default_factory=dict)

    @property
    def scaled_samples(self) -> Dict[float, np.ndarray]:
        return self._scaled_samples


def _scale(config: SystemConfig, eps: float) -> float:
    return eps ** (config.n - 1)


def lst_gap(config: SystemConfig, j: int, s_grid: Sequence[float] = DEFAULT_S_GRID) -> float:
    """max over s of |phi_j(eps^{n-1} s) - 1/(1+bs)|, s given in units of 1/b"""
    b = config.b
    scale = _scale(config, epsilon(config.working_time, config.mu))
    gaps = []
    for unit in s_grid:
        s = unit / b
        gaps.append(abs(solve_phis(config, scale * s).phis[j] - limit_lst(s, b)))
    return float(max(gaps))


def scaled_mean_ratio(config: SystemConfig, j: int) -> float:
    """E tau_j eps^{n-1} / b, which tends to 1"""
    scale = _scale(config, epsilon(config.working_time, config.mu))
    return float(mean_lifetimes(config)[j] * scale / config.b)


def convergence_sweep(
    template: SystemConfig,
    j: int,
    mu_list: Sequence[float],
    sample_count: int,
    seed: int,
    s_grid: Sequence[float] = DEFAULT_S_GRID,
    engine: Engine = Engine.EMBEDDED_CHAIN,
    workers: int = 1,
) -> AsymptoticReport:
    """Measure how far eps^{n-1} tau_j is from Exp(mean b) at every repair rate.

    Row ``i`` simulates with ``child_seed(seed, i)``, so rows can be recomputed
    independently. Rows above the Monte Carlo feasibility bound keep their
    transform columns and report no KS distance.
    """
    mu_list = [float(mu) for mu in mu_list]
    if len(mu_list) < 2:
        raise DomainError("a sweep needs at least two repair rates")
    if any(b <= a for a, b in zip(mu_list, mu_list[1:])):
        raise DomainError("mu_list must be strictly ascending")
    if not 0 <= j <= template.n - 1:
        raise DomainError(f"state j must lie in [0, {template.n - 1}], got {j}")
    if not s_grid or any(s <= 0 for s in s_grid):
        raise DomainError("s_grid must hold positive values")

    b = template.b
    rows = []
    scaled_samples = {}
    for i, mu in enumerate(mu_list):
        config = template.with_mu(mu)
        eps = epsilon(config.working_time, mu)
        scale = _scale(config, eps)

        ks = None
        if is_feasible(config, j):
            emp = run_batch(config, j, sample_count, child_seed(seed, i), engine, workers).scaled(scale)
            ks = ks_distance(emp, lambda t: exponential_limit_cdf(t, b))
            scaled_samples[mu] = emp.samples
        else:
            logger.warning(
                f"Skipping simulation at mu={mu}: {expected_periods(config, j):.3e} expected working periods"
            )

        row = AsymptoticRow(
            mu=mu,
            epsilon=eps,
            ks_scaled=ks,
            scaled_mean_ratio=scaled_mean_ratio(config, j),
            lst_gap=lst_gap(config, j, s_grid),
        )
        logger.info(f"Sweep row mu={mu}: {row.model_dump()}")
        rows.append(row)

    report = AsymptoticReport(
        rows=rows,
        config=template.summary(),
        j=j,
        sample_count=sample_count,
        seed=seed,
        engine=engine,
        s_grid=list(s_grid),
    )
    report._scaled_samples = scaled_samples
    return report


class ExpansionRatio(BaseModel):
    name: str
    value: float
    predicted: float
    deviation: float


class ExpansionCheck(BaseModel):
    """First-order expansions of g and g_j at sigma = eps^{n-1} s"""

    mu: float
    epsilon: float
    sigma: float
    ratios: List[ExpansionRatio]
    weights_at_zero: List[float]
    gammas: List[float]

    def ratio(self, name: str) -> ExpansionRatio:
        return next(r for r in self.ratios if r.name == name)


def expansion_check(model: WorkingTimeModel, n: int, mu: float, s: float) -> ExpansionCheck:
    """Compare g(sigma) and g_j(sigma) with their linearisations in sigma.

    r_g = (1 - g(sigma)) / (sigma b) tends to 1. For every j <= n-2,
    r_gj = (g_j(sigma) - g_j(0) + sigma gamma_j) / (sigma gamma_j) is the
    relative remainder of g_j(sigma) ~ g_j(0) - sigma gamma_j and tends to 0.
    """
    if n < 2:
        raise DomainError(f"n ≥ 2 required, got n={n}")
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    eps = epsilon(model, mu)
    sigma = eps ** (n - 1) * s
    if sigma >= EXPANSION_LIMIT:
        raise DomainError(
            f"expansion needs eps^(n-1) s < {EXPANSION_LIMIT}, got {sigma:.3e} at mu={mu}; increase mu",
            sigma=sigma,
        )

    b = model.mean_b
    r_g = ((1 - lst(model, sigma)) / (sigma * b)).real
    ratios = [ExpansionRatio(name="r_g", value=r_g, predicted=1.0, deviation=abs(r_g - 1.0))]
    at_zero, gammas = [], []
    for j in range(n - 1):
        g_j0 = weighted_lst(model, j, 0.0, mu).real
        gamma_j = gamma(model, j, mu)
        at_zero.append(g_j0)
        gammas.append(gamma_j)
        if gamma_j == 0:
            continue
        remainder = (weighted_lst(model, j, sigma, mu).real - g_j0 + sigma * gamma_j) / (sigma * gamma_j)
        ratios.append(ExpansionRatio(name=f"r_g{j}", value=remainder, predicted=0.0, deviation=abs(remainder)))
    return ExpansionCheck(mu=mu, epsilon=eps, sigma=sigma, ratios=ratios, weights_at_zero=at_zero, gammas=gammas)


class RatioDeviation(BaseModel):
    k: int
    ratio: float
    predicted: float
    deviation: float


class RatioRecursionCheck(BaseModel):
    """phi_k(sigma) / phi_1(sigma) against 1 + eps^{n-k} s b, for k = 2 ... n-1"""

    mu: float
    epsilon: float
    s: float
    deviations: List[RatioDeviation]
    max_ratio_gap: float

    def deviation(self, k: int) -> float:
        return next(d.deviation for d in self.deviations if d.k == k)


def ratio_recursion_check(config: SystemConfig, s: float) -> RatioRecursionCheck:
    """Deviation of phi_k / phi_1 from its first-order prediction at sigma = eps^{n-1} s.

    Entry k is |(phi_k/phi_1 - 1) / (eps^{n-k} s b) - 1|; the recursion
    phi_{j+1}/phi_1 ~ 1 + eps^{n-j-1} s b is indexed here by k = j + 1.
    ``max_ratio_gap`` is max over all k of |phi_k/phi_1 - 1|.
    """
    n = config.n
    if n < 3:
        raise DomainError(f"ratio recursions need n ≥ 3, got n={n}")
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    eps = epsilon(config.working_time, config.mu)
    if eps >= FAST_REPAIR_EPSILON:
        logger.warning(f"eps={eps:.3e} at mu={config.mu} is outside the fast-repair regime")

    b = config.b
    phis = solve_phis(config, eps ** (n - 1) * s).phis
    ratios = (phis / phis[1]).real
    deviations = []
    for k in range(2, n):
        predicted = eps ** (n - k) * s * b
        deviations.append(
            RatioDeviation(
                k=k,
                ratio=float(ratios[k]),
                predicted=1.0 + predicted,
                deviation=abs((ratios[k] - 1.0) / predicted - 1.0),
            )
        )
    return RatioRecursionCheck(
        mu=config.mu,
        epsilon=eps,
        s=s,
        deviations=deviations,
        max_ratio_gap=float(np.max(np.abs(ratios - 1.0))),
    )


def inversion_gap(
    config: SystemConfig, j: int, t_grid: Sequence[float], settings: Optional[InversionSettings] = None
) -> float:
    """max over t of |P(eps^{n-1} tau_j <= t) - (1 - e^{-t/b})| with the CDF obtained by inversion.

    ``t_grid`` is in scaled time. Inversion runs non-strict unless settings say otherwise.
    """
    settings = settings or InversionSettings(strict=False)
    scale = _scale(config, epsilon(config.working_time, config.mu))
    t_grid = np.asarray(t_grid, dtype=float)
    curve = invert_curve(config, j, t_grid / scale, settings)
    gap = np.abs(curve.values - exponential_limit_cdf(t_grid, config.b))
    if curve.unstable:
        logger.warning(f"Inversion flagged points at mu={config.mu}; gap {gap.max():.3e} is indicative only")
    return float(gap.max())

