"""Numerical Laplace inversion of the lifetime transforms

P(tau_j <= t) is the inverse transform of phi_j(s) / s and the tail
P(tau_j > t) that of (1 - phi_j(s)) / s. Two methods:

- Euler (Abate-Whitt unified form): 2M+1 complex abscissas beta_k / t,
  f(t) = Re sum_k eta_k F(beta_k / t) / t;
- Gaver-Stehfest: N real abscissas k ln 2 / t with Salzer weights V_k.

The oscillation estimate of a point is |f(terms) - f(terms - 2)|.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import factorial

from standby_lifetime.errors import DomainError, InversionUnstable
from standby_lifetime.lst import solve_phis
from standby_lifetime.model import SystemConfig

logger = logging.getLogger(__name__)

OVERSHOOT_SLACK = 1e-4
MONOTONE_SLACK = 1e-4


class InversionMethod(str, Enum):
    EULER = "euler"
    GAVER_STEHFEST = "gaver_stehfest"


class InversionTarget(str, Enum):
    CDF = "cdf"
    TAIL = "tail"


DEFAULT_TERMS = {InversionMethod.EULER: 51, InversionMethod.GAVER_STEHFEST: 14}


class InversionSettings(BaseModel):
    """Method, number of transform evaluations per point, and the inverted quantity"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    method: InversionMethod = InversionMethod.EULER
    terms: Optional[int] = Field(default=None, ge=5)
    target: InversionTarget = InversionTarget.CDF
    oscillation_tol: float = Field(default=1e-3, gt=0)
    strict: bool = True

    @model_validator(mode="after")
    def _check_terms(self):
        terms = self.effective_terms
        if self.method is InversionMethod.EULER and terms % 2 != 1:
            raise ValueError("Euler needs an odd number of terms (2M+1)")
        if self.method is InversionMethod.GAVER_STEHFEST:
            if terms % 2:
                raise ValueError("Gaver-Stehfest needs an even number of terms")
            if terms > 18:
                raise ValueError("Gaver-Stehfest weights lose all precision beyond 18 terms in double precision")
        return self

    @property
    def effective_terms(self) -> int:
        return self.terms if self.terms is not None else DEFAULT_TERMS[self.method]


@lru_cache(maxsize=None)
def euler_coefficients(terms: int) -> Tuple[np.ndarray, np.ndarray]:
    """Weights eta_k and abscissas beta_k of the Euler method with 2M+1 = terms"""
    M = (terms - 1) // 2
    eta = np.concatenate(([0.5], np.ones(M), np.zeros(M - 1), [2.0**-M]))
    logsum = np.cumsum(np.log(np.arange(1, M + 1)))
    for k in range(1, M):
        eta[2 * M - k] = eta[2 * M - k + 1] + np.exp(
            logsum[M - 1] - M * np.log(2.0) - logsum[k - 1] - logsum[M - k - 1]
        )
    k = np.arange(2 * M + 1)
    beta = M * np.log(10.0) / 3.0 + 1j * np.pi * k
    eta = 10 ** (M / 3.0) * (1 - (k % 2) * 2) * eta
    return eta, beta


@lru_cache(maxsize=None)
def stehfest_coefficients(terms: int) -> np.ndarray:
    """Salzer weights V_1 ... V_N"""
    half = terms // 2
    V = np.zeros(terms)
    for k in range(1, terms + 1):
        total = 0.0
        for j in range((k + 1) // 2, min(k, half) + 1):
            total += (
                j**half
                * factorial(2 * j)
                / (factorial(half - j) * factorial(j) * factorial(j - 1) * factorial(k - j) * factorial(2 * j - k))
            )
        V[k - 1] = (-1) ** (k + half) * total
    return V


def _invert_once(fn: Callable[[complex], complex], t: float, method: InversionMethod, terms: int) -> float:
    if method is InversionMethod.EULER:
        eta, beta = euler_coefficients(terms)
        values = np.array([fn(b / t) for b in beta], dtype=complex)
        return float(np.dot(eta, values).real / t)
    V = stehfest_coefficients(terms)
    ln2_t = math.log(2.0) / t
    values = np.array([complex(fn(k * ln2_t)).real for k in range(1, terms + 1)])
    return float(np.dot(V, values) * ln2_t)


def invert_transform(fn: Callable[[complex], complex], t: float, settings: Optional[InversionSettings] = None) -> float:
    """Inverse Laplace transform of ``fn`` at t > 0"""
    settings = settings or InversionSettings()
    if not t > 0:
        raise DomainError(f"inversion needs t > 0, got {t}")
    return _invert_once(fn, t, settings.method, settings.effective_terms)


@dataclass
class InversionPoint:
    """One inverted probability with its diagnostics"""

    t: float
    value: float
    raw: float
    oscillation: float
    flags: List[str] = field(default_factory=list)


@dataclass
class InversionCurve:
    points: List[InversionPoint]
    monotonicity_violations: List[int]

    @property
    def t(self) -> np.ndarray:
        return np.array([p.t for p in self.points])

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.points])

    @property
    def unstable(self) -> bool:
        return any(p.flags for p in self.points)


def invert_probability(
    fn: Callable[[complex], complex], t: float, settings: Optional[InversionSettings] = None, label: str = "transform"
) -> InversionPoint:
    """Invert a probability-valued transform at t, clamp to [0, 1] and record diagnostics.

    Raises:
        InversionUnstable: in strict mode, when the oscillation estimate exceeds
            ``settings.oscillation_tol``.
    """
    settings = settings or InversionSettings()
    if not t > 0:
        raise DomainError(f"inversion needs t > 0, got {t}")
    terms = settings.effective_terms
    raw = _invert_once(fn, t, settings.method, terms)
    oscillation = abs(raw - _invert_once(fn, t, settings.method, terms - 2))

    flags = []
    value = min(max(raw, 0.0), 1.0)
    if value != raw:
        logger.warning(f"Clamped inverted {label} at t={t:g}: raw value {raw:.3e}")
        if raw < -OVERSHOOT_SLACK or raw > 1.0 + OVERSHOOT_SLACK:
            flags.append("overshoot")
    if oscillation > settings.oscillation_tol:
        if settings.strict:
            raise InversionUnstable(
                f"{label} at t={t:g}: oscillation {oscillation:.3e} exceeds {settings.oscillation_tol:.0e}",
                t=t,
                oscillation=oscillation,
            )
        flags.append("oscillation")
    return InversionPoint(t=t, value=value, raw=raw, oscillation=oscillation, flags=flags)


def invert_transform_curve(
    fn: Callable[[complex], complex],
    t_grid: Sequence[float],
    settings: Optional[InversionSettings] = None,
    label: str = "transform",
) -> InversionCurve:
    """Pointwise inversion over a strictly increasing grid plus a monotonicity report.

    Adjacent decreases larger than MONOTONE_SLACK are flagged "nonmonotone";
    values are never re-sorted.
    """
    t_grid = [float(t) for t in t_grid]
    if not t_grid or t_grid[0] <= 0 or any(b <= a for a, b in zip(t_grid, t_grid[1:])):
        raise DomainError("t_grid must be positive and strictly increasing")
    points = [invert_probability(fn, t, settings, label) for t in t_grid]

    violations = []
    for i, (a, b) in enumerate(zip(points, points[1:])):
        if b.value < a.value - MONOTONE_SLACK:
            violations.append(i)
            b.flags.append("nonmonotone")
    if violations:
        logger.warning(f"Inverted {label} decreases at {len(violations)} grid step(s)")
    return InversionCurve(points=points, monotonicity_violations=violations)


def _check_state(config: SystemConfig, j: int) -> None:
    if not 0 <= j <= config.n - 1:
        raise DomainError(f"state j must lie in [0, {config.n - 1}], got {j}")


def lifetime_transform(config: SystemConfig, j: int, target: InversionTarget) -> Callable[[complex], complex]:
    """phi_j(s)/s for the CDF or (1 - phi_j(s))/s for the tail"""
    _check_state(config, j)
    if InversionTarget(target) is InversionTarget.CDF:
        return lambda s: solve_phis(config, s).phis[j] / s
    return lambda s: (1 - solve_phis(config, s).phis[j]) / s


def _as_cdf(point: InversionPoint, target: InversionTarget) -> InversionPoint:
    if target is InversionTarget.CDF:
        return point
    return InversionPoint(
        t=point.t, value=1.0 - point.value, raw=1.0 - point.raw, oscillation=point.oscillation, flags=point.flags
    )


def invert_point(
    config: SystemConfig, j: int, t: float, settings: Optional[InversionSettings] = None
) -> InversionPoint:
    """P(tau_j <= t) with diagnostics, inverted through the configured target"""
    settings = settings or InversionSettings()
    fn = lifetime_transform(config, j, settings.target)
    point = invert_probability(fn, t, settings, label=f"{settings.target.value} of tau_{j}")
    return _as_cdf(point, settings.target)


def invert_cdf(config: SystemConfig, j: int, t: float, settings: Optional[InversionSettings] = None) -> float:
    """P(tau_j <= t)"""
    return invert_point(config, j, t, settings).value


def invert_tail(config: SystemConfig, j: int, t: float, settings: Optional[InversionSettings] = None) -> float:
    """P(tau_j > t)"""
    return 1.0 - invert_cdf(config, j, t, settings)


def invert_curve(
    config: SystemConfig, j: int, t_grid: Sequence[float], settings: Optional[InversionSettings] = None
) -> InversionCurve:
    """P(tau_j <= t) over a grid, with the monotonicity report of the CDF"""
    settings = settings or InversionSettings()
    fn = lifetime_transform(config, j, settings.target)
    curve = invert_transform_curve(fn, t_grid, settings, label=f"{settings.target.value} of tau_{j}")
    if settings.target is InversionTarget.CDF:
        return curve
    # a tail decreases where the CDF increases, so recheck after converting
    cdf_points = [_as_cdf(p, settings.target) for p in curve.points]
    for p in cdf_points:
        if "nonmonotone" in p.flags:
            p.flags.remove("nonmonotone")
    violations = []
    for i, (a, b) in enumerate(zip(cdf_points, cdf_points[1:])):
        if b.value < a.value - MONOTONE_SLACK:
            violations.append(i)
            b.flags.append("nonmonotone")
    return InversionCurve(points=cdf_points, monotonicity_violations=violations)
