"""Closed-form quantities: CDF bounds, scaling exponents, thresholds.

Pure functions of a pattern's density report. Nothing here touches RNG or
solvers; the experiment harness compares these predictions against Monte
Carlo measurements but never asserts asymptotic claims at fixed n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .graphs import DensityReport

__all__ = [
    "TheoryContext",
    "gamma_cdf_bounds",
    "predicted_exponent",
    "cover_lower_exponent",
    "jkv_threshold",
    "first_moment_constant",
]


@dataclass(frozen=True)
class TheoryContext:
    """A density report paired with an uncovered fraction alpha in [0,1)."""

    report: DensityReport
    alpha: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError("alpha must lie in [0,1)")

    def factor_exponent(self) -> float:
        return predicted_exponent(self.report)

    def cover_exponent(self) -> float:
        return cover_lower_exponent(self.report)

    def lower_bound_constant(self) -> float:
        return first_moment_constant(self.report, self.alpha)


def gamma_cdf_bounds(k: int, x: float) -> tuple[float, float]:
    """Two-sided bounds on Pr(sum of k unit exponentials <= x).

    Returns (lo, hi) = ((1-x) x^k / k!, x^k / k!), lo clamped at 0. The
    lower bound is only informative for x < 1.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    if not x > 0:
        raise ValueError("x must be positive")
    hi = x**k / math.factorial(k)
    lo = max(0.0, (1.0 - x) * hi)
    return lo, hi


def predicted_exponent(report: DensityReport) -> float:
    """Growth exponent of the minimum factor weight: 1 - 1/d*.

    Returns 0 when d* = 1 (patterns without a cycle), where the minimum
    weight stays bounded instead of growing polynomially.
    """
    d_star = report.d_star
    if d_star == 1:
        return 0.0
    return float(1 - 1 / d_star)


def cover_lower_exponent(report: DensityReport) -> float:
    """Lower-bound growth exponent for covers: 1 - 1/max(d_H, Delta)."""
    d = max(report.d_h, report.delta)
    if d == 1:
        return 0.0
    return float(1 - 1 / d)


def jkv_threshold(report: DensityReport, n: int) -> float:
    """Appearance threshold for a factor of a strictly balanced pattern:
    n^(-1/d_H) * (ln n)^(1/e_H)."""
    if not report.strictly_balanced:
        raise ValueError(
            "threshold formula requires a strictly balanced pattern; for general "
            "patterns the threshold is n^(-1/d*+o(1)) and has no closed form here"
        )
    if n < 3:
        raise ValueError("n must be at least 3")
    return n ** float(-1 / report.d_h) * math.log(n) ** (1.0 / report.e_h)


def first_moment_constant(report: DensityReport, alpha: float = 0.0) -> float:
    """Sharpened first-moment lower-bound constant c for the factor weight.

    With r = v_H/(1-alpha), the counting argument gives
    1/c = (r/e_H) * e^(1-1/d_H) * (r * alpha^(-alpha r) * Aut(H))^(-1/e_H);
    alpha^(-alpha r) is taken as 1 at alpha = 0 by continuity.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0,1)")
    v_h = report.v_h
    e_h = report.e_h
    d_h = float(report.d_h)
    r = v_h / (1.0 - alpha)
    alpha_term = 1.0 if alpha == 0.0 else alpha ** (-alpha * r)
    c1c2 = (r / e_h) * math.exp(1.0 - 1.0 / d_h) * (r * alpha_term * report.aut_count) ** (
        -1.0 / e_h
    )
    return 1.0 / c1c2
