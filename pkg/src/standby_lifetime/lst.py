"""Laplace-Stieltjes transforms phi_j(s) = E e^{-s tau_j} and mean lifetimes

Taking transforms of the stochastic equations gives, with g = g(s) and
g_k = g_k(s)::

    phi_0     = g phi_1
    phi_j     = (g - sum_{k<j} g_k) phi_1 + sum_{k=0}^{j-1} g_k phi_{j+1-k},   1 <= j <= n-2
    phi_{n-1} = (g - sum_{k<=n-2} g_k) phi_1 + sum_{k=1}^{n-2} g_k phi_{n-k} + g_0

which is solved as a dense (n-1)x(n-1) system in phi_1 ... phi_{n-1}. For n = 2
only the last row remains and phi_1 = g_0 / (1 - g + g_0).
"""

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import linalg

from standby_lifetime.dist import _check_s, lst, weighted_lst
from standby_lifetime.errors import DomainError, SingularSystem
from standby_lifetime.model import SystemConfig

logger = logging.getLogger(__name__)

PIVOT_FLOOR = 1e-14
RESIDUAL_LIMIT = 1e-10
COMPLEX_STEP = 1e-20


@dataclass(frozen=True, eq=False)
class LstSolution:
    """phi_0(s) ... phi_{n-1}(s) at one argument s"""

    s: complex
    phis: np.ndarray
    truncation_J: int
    residual: float

    def phi(self, j: int) -> complex:
        return complex(self.phis[j])


def _assemble(n: int, g: complex, weights: np.ndarray):
    """Matrix I - C and right-hand side of the system in phi_1 ... phi_{n-1}.

    ``weights`` holds g_0 ... g_{n-2}.
    """
    m = n - 1
    dtype = np.result_type(weights, g)
    A = np.eye(m, dtype=dtype)
    rhs = np.zeros(m, dtype=dtype)
    partial = np.cumsum(weights)
    # diagonal of the phi_1 row is 1 - g + g_0, grouped so that it stays exact as g -> 1
    A[0, 0] = (1 - g) + weights[0]
    for j in range(2, n):
        A[j - 1, 0] -= g - partial[j - 1]
    for j in range(1, n):
        row = j - 1
        if j <= n - 2:
            for k in range(j):
                A[row, j - k] -= weights[k]
        else:
            for k in range(1, n - 1):
                A[row, n - k - 1] -= weights[k]
            rhs[row] += weights[0]
    return A, rhs


def _solve(A: np.ndarray, rhs: np.ndarray, what: str):
    lu, piv = linalg.lu_factor(A, check_finite=True)
    smallest = float(np.min(np.abs(np.diag(lu))))
    if smallest < PIVOT_FLOOR:
        raise SingularSystem(f"{what}: pivot {smallest:.3e} below {PIVOT_FLOOR:.0e}", pivot=smallest)
    x = linalg.lu_solve((lu, piv), rhs)
    residual = float(np.linalg.norm(A @ x - rhs))
    return x, residual


def solve_phis(config: SystemConfig, s: complex) -> LstSolution:
    """Solve the transform system at s (Re(s) >= 0)"""
    s = _check_s(s)
    model, n, mu = config.working_time, config.n, config.mu

    g = lst(model, s)
    weights = np.array([weighted_lst(model, k, s, mu) for k in range(n - 1)], dtype=complex)
    A, rhs = _assemble(n, g, weights)
    tail, residual = _solve(A, rhs, f"transform system at s={s}")
    if residual > RESIDUAL_LIMIT:
        logger.warning(f"Transform system at s={s} solved with residual {residual:.3e}")
    logger.debug(f"Solved transform system n={n}, mu={mu}, s={s}: residual {residual:.3e}")

    phis = np.empty(n, dtype=complex)
    phis[1:] = tail
    phis[0] = g * tail[0]
    return LstSolution(s=s, phis=phis, truncation_J=n - 2, residual=residual)


def _require_two_elements(config: SystemConfig) -> None:
    if config.n != 2:
        raise DomainError(f"closed form holds for n=2 only, got n={config.n}")


def phi1_two_element(config: SystemConfig, s: complex) -> complex:
    """phi_1(s) = g_0(s) / (1 - g(s) + g_0(s)) for a two-element system"""
    _require_two_elements(config)
    s = _check_s(s)
    g = lst(config.working_time, s)
    g0 = weighted_lst(config.working_time, 0, s, config.mu)
    return g0 / (1 - g + g0)


def phi0_two_element(config: SystemConfig, s: complex) -> complex:
    """phi_0(s) = g(s) phi_1(s) for a two-element system"""
    return lst(config.working_time, s) * phi1_two_element(config, s)


def mean_lifetimes(config: SystemConfig) -> np.ndarray:
    """E tau_0 ... E tau_{n-1} from the expectations of the stochastic equations.

    With p_k = g_k(0) and q_j = 1 - sum_{k<j} p_k::

        E tau_j     = b + q_j E tau_1 + sum_{k=0}^{j-1} p_k E tau_{j+1-k},   1 <= j <= n-2
        E tau_{n-1} = b + q_{n-1} E tau_1 + sum_{k=1}^{n-2} p_k E tau_{n-k}
        E tau_0     = b + E tau_1
    """
    model, n, mu, b = config.working_time, config.n, config.mu, config.b
    p = np.array([weighted_lst(model, k, 0.0, mu).real for k in range(n - 1)])

    # same matrix as the transform system at s = 0, where g(0) = 1
    A, _ = _assemble(n, 1.0, p)
    x, residual = _solve(A, np.full(n - 1, b), "mean-lifetime system")
    logger.debug(f"Solved mean-lifetime system n={n}, mu={mu}: residual {residual:.3e}")

    means = np.empty(n)
    means[1:] = x
    means[0] = b + x[0]
    return means


def derivative_at_zero(fn: Callable[[complex], complex], h: float = COMPLEX_STEP) -> float:
    """f'(0) by the complex step Im f(ih) / h, for f real on the real axis"""
    return fn(1j * h).imag / h


def central_difference_at_zero(fn: Callable[[complex], complex], h: float) -> complex:
    """f'(0) by a central difference along the imaginary axis, where Re(s) = 0"""
    return (fn(1j * h) - fn(-1j * h)) / (2j * h)
