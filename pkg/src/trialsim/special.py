"""Special functions shared by the test implementations.

Thin wrappers over stdlib ``math`` and ``scipy.special`` with the domain
checks and accuracy guarantees the tests rely on (normal CDF to 1e-12,
chi-square tail to 1e-10 relative, log-binomial exact to 1e-10 relative).
"""

import math

from scipy.special import gammaincc

_SQRT2 = math.sqrt(2.0)


def normal_cdf(x: float) -> float:
    """Standard normal CDF, computed via the complementary error function."""
    return 0.5 * math.erfc(-x / _SQRT2)


def chi_square_sf(x: float, df: int) -> float:
    """Upper tail P(X >= x) of a chi-square distribution with ``df`` degrees
    of freedom, via the regularized upper incomplete gamma function."""
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    if x < 0:
        raise ValueError(f"chi-square statistic must be >= 0, got {x}")
    return float(gammaincc(df / 2.0, x / 2.0))


def log_choose(n: int, k: int) -> float:
    """log of the binomial coefficient C(n, k), via log-gamma."""
    if k < 0 or k > n:
        raise ValueError(f"require 0 <= k <= n, got n={n}, k={k}")
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
