"""Adaptive Gauss-Legendre quadrature

Integrals against the working-time law are split at the BODY_LEVEL quantile.
The body is taken in probability space, ``int h(x) dG(x) = int_0^u h(G^-1(u)) du``,
which removes density singularities at the origin. The tail is taken in x
against the density, on panels no wider than one period of the oscillating
factor, so that e^{-i omega x} stays resolved where G^-1 stretches the axis.
Integrands may be complex valued.
"""

import logging
import math
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from standby_lifetime.errors import QuadratureFailure

logger = logging.getLogger(__name__)

ABS_TOL = 1e-10
BODY_LEVEL = 0.9
QUANTILE_LEVELS = (0.5,)
TAIL_QUANTILES = (0.99, 0.999, 0.99999)
TAIL_LEVEL = 1.0 - 1e-12
MAX_DEPTH = 60
MAX_INTERVALS = 200_000
MIN_WIDTH = 1e-15

_NODES, _WEIGHTS = leggauss(20)


def gauss_legendre(f: Callable[[np.ndarray], np.ndarray], a: float, b: float):
    """Fixed 20-point Gauss-Legendre rule on [a, b]"""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * np.dot(_WEIGHTS, f(mid + half * _NODES))


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    breakpoints: Sequence[float],
    tol: float = ABS_TOL,
    label: str = "integral",
):
    """Integrate ``f`` over [breakpoints[0], breakpoints[-1]] to absolute tolerance ``tol``.

    Each panel between consecutive breakpoints is bisected until the 20-point
    rule on the panel and the sum of the rules on its halves agree within the
    panel's share of ``tol`` (proportional to its length).

    Raises:
        QuadratureFailure: when a panel needs more than MAX_DEPTH bisections,
            shrinks below MIN_WIDTH of the range without converging, or the
            panel count exceeds MAX_INTERVALS.
    """
    points = sorted(set(float(p) for p in breakpoints))
    if len(points) < 2:
        return 0.0
    span = points[-1] - points[0]

    total = 0.0
    intervals = 0
    stack = [(a, b, gauss_legendre(f, a, b), 0) for a, b in zip(points[:-1], points[1:])]
    while stack:
        a, b, coarse, depth = stack.pop()
        mid = 0.5 * (a + b)
        left = gauss_legendre(f, a, mid)
        right = gauss_legendre(f, mid, b)
        fine = left + right
        error = abs(fine - coarse)
        if error <= tol * (b - a) / span:
            total = total + fine
            continue
        if depth >= MAX_DEPTH or (b - a) <= MIN_WIDTH * span:
            raise QuadratureFailure(
                f"{label}: no convergence on [{a:.3e}, {b:.3e}] after {depth} bisections",
                error_estimate=float(error),
                lower=a,
                upper=b,
            )
        intervals += 1
        if intervals > MAX_INTERVALS:
            raise QuadratureFailure(f"{label}: more than {MAX_INTERVALS} panels needed", error_estimate=float(error))
        stack.append((a, mid, left, depth + 1))
        stack.append((mid, b, right, depth + 1))

    logger.debug(f"{label}: {intervals} bisections")
    return total


def integrate_oscillatory(
    f: Callable[[np.ndarray], np.ndarray],
    breakpoints: Sequence[float],
    omega: float,
    tol: float = ABS_TOL,
    label: str = "integral",
):
    """``integrate`` with every starting panel at most one period 2 pi / |omega| wide"""
    points = sorted(set(float(p) for p in breakpoints))
    if len(points) < 2 or omega == 0:
        return integrate(f, points, tol, label)

    period = 2.0 * math.pi / abs(omega)
    panels = math.ceil((points[-1] - points[0]) / period) + len(points)
    if panels > MAX_INTERVALS:
        raise QuadratureFailure(f"{label}: {panels} oscillation periods exceed {MAX_INTERVALS} panels")

    refined = []
    for a, b in zip(points[:-1], points[1:]):
        count = max(1, math.ceil((b - a) / period))
        refined.extend(np.linspace(a, b, count + 1)[:-1].tolist())
    refined.append(points[-1])
    return integrate(f, refined, tol, label)
