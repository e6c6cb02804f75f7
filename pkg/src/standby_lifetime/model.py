"""System configuration and the embedded chain of broken-element counts

A working period starts with ``j`` broken elements. During the period the
single repair device completes ``nu`` repairs, Poisson(mu * eta) by
memorylessness of the exponential repair time, and the period ends with a
failure. Reading off the stochastic equations for tau_0 ... tau_{n-1}::

    j = 0                     -> next period starts with 1 broken
    1 <= j <= n-2, nu >= j    -> queue emptied, device idles: 1 broken
    1 <= j <= n-2, nu = k < j -> j + 1 - k broken
    j = n-1, nu = 0           -> all n broken, system dead
    j = n-1, 1 <= nu <= n-2   -> n - nu broken
    j = n-1, nu >= n-1        -> 1 broken

All six cases collapse to ``1 if nu >= j else j + 1 - nu``, with the value n
meaning absorption.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import List

import numpy as np
from scipy import linalg, special

from standby_lifetime.dist import DeterministicSpec, WorkingTimeModel
from standby_lifetime.errors import DomainError

logger = logging.getLogger(__name__)

# Above this Poisson mean the repair count is drawn by transformed rejection
INVERSION_LIMIT = 30.0
_INVERSION_MAX_STEPS = 1000


@dataclass(frozen=True)
class SystemConfig:
    """n identical elements, repair rate mu, working-time law G"""

    n: int
    mu: float
    working_time: WorkingTimeModel

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"n ≥ 2 required, got n={self.n}")
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise DomainError(f"repair rate mu must be positive, got mu={self.mu}")

    @property
    def b(self) -> float:
        return self.working_time.mean_b

    def with_mu(self, mu: float) -> "SystemConfig":
        return replace(self, mu=mu)

    def summary(self) -> dict:
        return {
            "n": self.n,
            "mu": self.mu,
            "distribution": self.working_time.spec.model_dump(mode="json"),
            "backend": self.working_time.transform_backend.value,
            "b": self.b,
        }


@dataclass(frozen=True)
class ChainState:
    """Broken count at the start of a working period, or absorption"""

    broken: int
    absorbed: bool = False

    @classmethod
    def dead(cls, n: int) -> "ChainState":
        return cls(broken=n, absorbed=True)


@dataclass(frozen=True)
class AbsorbingChain:
    """Transition matrix over broken counts 1..n-1 plus the absorbing state (last index)"""

    matrix: np.ndarray
    n: int
    period: float

    @property
    def transient(self) -> np.ndarray:
        return self.matrix[:-1, :-1]

    @property
    def exits(self) -> np.ndarray:
        return self.matrix[:-1, -1]

    def index(self, broken: int) -> int:
        if not 1 <= broken <= self.n - 1:
            raise DomainError(f"chain states are broken counts 1..{self.n - 1}, got {broken}")
        return broken - 1


def repair_count_pmf(mu: float, eta: float, k: int) -> float:
    """P(nu(eta) = k) = e^{-mu eta} (mu eta)^k / k!"""
    if k < 0:
        raise DomainError(f"repair count must be nonnegative, got {k}")
    lam = mu * eta
    if lam == 0:
        return 1.0 if k == 0 else 0.0
    return math.exp(-lam + k * math.log(lam) - math.lgamma(k + 1))


def _poisson_inversion(lam: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Sequential search of the Poisson cdf, all elements at once"""
    k = np.zeros(lam.size, dtype=np.int64)
    mass = np.exp(-lam)
    cdf = mass.copy()
    pending = np.flatnonzero(u > cdf)
    steps = 0
    while pending.size and steps < _INVERSION_MAX_STEPS:
        steps += 1
        k[pending] += 1
        mass[pending] *= lam[pending] / k[pending]
        cdf[pending] += mass[pending]
        pending = pending[u[pending] > cdf[pending]]
    return k


def _poisson_ptrs(rng: np.random.Generator, lam: np.ndarray) -> np.ndarray:
    """Transformed rejection with squeeze (PTRS) for Poisson means above INVERSION_LIMIT"""
    out = np.empty(lam.size, dtype=np.int64)
    slam = np.sqrt(lam)
    loglam = np.log(lam)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    log_invalpha = np.log(1.1239 + 1.1328 / (b - 3.4))
    vr = 0.9277 - 3.6224 / (b - 2)

    pending = np.arange(lam.size)
    while pending.size:
        U = rng.random(pending.size) - 0.5
        V = rng.random(pending.size)
        us = 0.5 - np.abs(U)
        ap, bp = a[pending], b[pending]
        k = np.floor((2 * ap / us + bp) * U + lam[pending] + 0.43)

        accept = (us >= 0.07) & (V <= vr[pending])
        reject = (k < 0) | ((us < 0.013) & (V > us))
        with np.errstate(divide="ignore", invalid="ignore"):
            lhs = np.log(V) + log_invalpha[pending] - np.log(ap / (us * us) + bp)
            rhs = -lam[pending] + k * loglam[pending] - special.gammaln(k + 1)
        accept |= ~reject & (lhs <= rhs)

        out[pending[accept]] = k[accept].astype(np.int64)
        pending = pending[~accept]
    return out


def sample_repair_counts(rng: np.random.Generator, mu: float, etas: np.ndarray) -> np.ndarray:
    """Poisson(mu * eta) draws for every eta.

    Means up to INVERSION_LIMIT use inversion by search from the pmf, larger
    means use PTRS. Uniforms for the inversion group are drawn first.
    """
    lam = mu * np.asarray(etas, dtype=float)
    out = np.zeros(lam.size, dtype=np.int64)
    small = lam <= INVERSION_LIMIT
    if small.any():
        out[small] = _poisson_inversion(lam[small], rng.random(int(small.sum())))
    if not small.all():
        out[~small] = _poisson_ptrs(rng, lam[~small])
    return out


def sample_repair_count(rng: np.random.Generator, mu: float, eta: float) -> int:
    """Number of repairs completed during a working period of length eta"""
    return int(sample_repair_counts(rng, mu, np.array([eta]))[0])


def next_broken(j: np.ndarray, nu: np.ndarray) -> np.ndarray:
    """Array form of next_state; a result equal to n means absorption"""
    return np.where(nu >= j, 1, j + 1 - nu)


def next_state(j: int, nu: int, n: int) -> ChainState:
    """State at the start of the next working period"""
    if not 0 <= j <= n - 1:
        raise DomainError(f"state j must lie in [0, {n - 1}], got {j}")
    if nu < 0:
        raise DomainError(f"repair count must be nonnegative, got {nu}")
    broken = 1 if nu >= j else j + 1 - nu
    if broken == n:
        return ChainState.dead(n)
    return ChainState(broken=broken)


def deterministic_eta_chain(config: SystemConfig, d: float) -> AbsorbingChain:
    """Exact embedded chain when every working period lasts exactly d.

    States are broken counts 1..n-1 followed by the absorbing state. The
    lifetime from a transient state is d times the number of periods.
    """
    spec = config.working_time.spec
    if not isinstance(spec, DeterministicSpec):
        raise DomainError(f"deterministic_eta_chain needs a deterministic working time, got {spec.family}")
    if not math.isclose(spec.params.value, d, rel_tol=1e-12):
        raise DomainError(f"d={d} does not match the working time {spec.params.value}")

    n = config.n
    P = np.zeros((n, n))
    for j in range(1, n):
        row = j - 1
        head = 0.0
        for nu in range(j):
            p = repair_count_pmf(config.mu, d, nu)
            head += p
            target = next_state(j, nu, n)
            col = n - 1 if target.absorbed else target.broken - 1
            P[row, col] += p
        P[row, 0] += 1.0 - head
    P[n - 1, n - 1] = 1.0
    return AbsorbingChain(matrix=P, n=n, period=d)


def mean_periods(chain: AbsorbingChain) -> np.ndarray:
    """Expected number of working periods to absorption from broken counts 1..n-1"""
    Q = chain.transient
    return linalg.solve(np.eye(Q.shape[0]) - Q, np.ones(Q.shape[0]))


def period_count_pmf(chain: AbsorbingChain, start: int, kmax: int) -> np.ndarray:
    """P(absorption at period k) for k = 1..kmax, starting from broken count ``start``"""
    Q, r = chain.transient, chain.exits
    alpha = np.zeros(Q.shape[0])
    alpha[chain.index(start)] = 1.0
    pmf: List[float] = []
    for _ in range(kmax):
        pmf.append(float(alpha @ r))
        alpha = alpha @ Q
    return np.array(pmf)
