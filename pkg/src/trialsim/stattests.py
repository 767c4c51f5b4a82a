"""Non-model-based tests applied to a pair of sampled arms.

All tests take the per-category counts of both arms and return a
:class:`TestResult` with a two-sided p-value. Everything here is a pure
function of its inputs (the Fisher Monte Carlo path takes an explicit
random stream), so tests may run concurrently across replication workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numba
import numpy as np
from numpy.random import Generator

from .special import chi_square_sf, log_choose, normal_cdf
from .trial import ArmCounts

STATUS_OK = "ok"
STATUS_NOT_ESTIMABLE = "not_estimable"

#: Monte Carlo tables drawn by fisher_exact when the table is wider than 2x2
FISHER_MC_TABLES = 10_000

#: relative slack when comparing table probabilities against the observed one,
#: so ties are not misclassified by floating-point round-off
PROB_SLACK = 1e-7


class NotEstimableError(ValueError):
    """A test or fit cannot be computed on this table (e.g. an empty arm)."""


@dataclass(frozen=True)
class TestResult:
    """Outcome of one test on one replication.

    ``p_value`` is present iff ``status`` is ok. ``statistic`` optionally
    carries the underlying statistic (z, chi-square, ...). Chi-square
    results flag tables where any expected cell count is below 5.
    """

    test_id: str
    status: str
    p_value: Optional[float]
    statistic: Optional[float] = None
    low_expected_count: Optional[bool] = None

    __test__ = False  # not a pytest class, despite the name

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK


def _not_estimable(test_id: str) -> TestResult:
    return TestResult(test_id=test_id, status=STATUS_NOT_ESTIMABLE, p_value=None)


def _drop_empty_columns(a: ArmCounts, b: ArmCounts) -> tuple:
    keep = (a.counts + b.counts) > 0
    return a.counts[keep], b.counts[keep]


def mann_whitney(a: ArmCounts, b: ArmCounts) -> TestResult:
    """Two-sided Mann-Whitney U test on midranks with tie correction.

    Normal approximation without continuity correction:
    Var(U) = (n_a n_b / 12) * [(n+1) - sum(t^3 - t) / (n (n-1))] over
    tie-group sizes t, z = (U - n_a n_b / 2) / sqrt(Var), p = 2 Phi(-|z|).
    """
    if a.n == 0 or b.n == 0:
        return _not_estimable("mann_whitney")
    n_a, n_b = a.n, b.n
    n = n_a + n_b
    ties = a.counts + b.counts
    # midrank of category j = (# observations below j) + (t_j + 1) / 2
    below = np.concatenate([[0], np.cumsum(ties)[:-1]])
    midranks = below + (ties + 1) / 2.0
    rank_sum_a = float(np.dot(a.counts, midranks))
    u = rank_sum_a - n_a * (n_a + 1) / 2.0
    tie_term = sum(int(t) ** 3 - int(t) for t in ties)  # exact integer arithmetic
    var_u = (n_a * n_b / 12.0) * ((n + 1) - tie_term / (n * (n - 1)))
    if var_u <= 0.0:
        # all observations share one category
        return TestResult("mann_whitney", STATUS_OK, p_value=1.0)
    z = (u - n_a * n_b / 2.0) / math.sqrt(var_u)
    p = 2.0 * normal_cdf(-abs(z))
    return TestResult("mann_whitney", STATUS_OK, p_value=min(p, 1.0), statistic=z)


def chi_square(a: ArmCounts, b: ArmCounts) -> TestResult:
    """Pearson chi-square test of homogeneity on the 2xK' table.

    Categories empty in both arms are dropped; no Yates correction. The
    result is flagged when any expected count falls below 5.
    """
    if a.n == 0 or b.n == 0:
        return _not_estimable("chi_square")
    ca, cb = _drop_empty_columns(a, b)
    k = len(ca)
    if k < 2:
        return _not_estimable("chi_square")
    observed = np.vstack([ca, cb]).astype(np.float64)
    rows = observed.sum(axis=1)
    cols = observed.sum(axis=0)
    expected = np.outer(rows, cols) / observed.sum()
    stat = float(((observed - expected) ** 2 / expected).sum())
    p = chi_square_sf(stat, k - 1)
    return TestResult(
        "chi_square",
        STATUS_OK,
        p_value=min(p, 1.0),
        statistic=stat,
        low_expected_count=bool((expected < 5).any()),
    )


def dichotomized_chi_square(a: ArmCounts, b: ArmCounts, cut: int) -> TestResult:
    """Chi-square test after collapsing ranks <= cut vs > cut into a 2x2 table."""
    k = len(a.counts)
    if not 1 <= cut <= k - 1:
        raise ValueError(f"dichotomization cut must be in [1, {k - 1}], got {cut}")
    a2 = ArmCounts.from_counts([int(a.counts[:cut].sum()), int(a.counts[cut:].sum())])
    b2 = ArmCounts.from_counts([int(b.counts[:cut].sum()), int(b.counts[cut:].sum())])
    return replace(chi_square(a2, b2), test_id="dichotomized_chi_square")


def _log_factorials(n: int) -> np.ndarray:
    lf = np.zeros(n + 1)
    lf[1:] = np.cumsum(np.log(np.arange(1.0, n + 1.0)))
    return lf


def _log_table_prob(row_a, cols, n_a: int, total: int) -> float:
    """log P(table | margins) under the multivariate hypergeometric null."""
    lp = -log_choose(total, n_a)
    for c, x in zip(cols, row_a):
        lp += log_choose(int(c), int(x))
    return lp


@numba.njit(cache=True)
def _fisher_mc_extreme_count(cols, n_a, total, lf, u, log_thresh):  # pragma: no cover - jitted
    """Count sequentially sampled fixed-margin tables at most as probable as observed.

    One uniform from ``u`` drives each cell draw via inversion of the
    conditional hypergeometric pmf, enumerated outward from its mode (the
    enumeration order depends only on the pmf, so each table keeps its
    exact null probability).
    """
    n_tables, n_free_cols = u.shape
    log_c_total = lf[total] - lf[n_a] - lf[total - n_a]
    count = 0
    for i in range(n_tables):
        remaining_a = n_a
        remaining_total = total
        lp = -log_c_total
        for j in range(n_free_cols):
            c = cols[j]
            nbad = remaining_total - remaining_a
            lo = c - nbad if c > nbad else 0
            hi = remaining_a if remaining_a < c else c
            mode = int((c + 1.0) * (remaining_a + 1.0) / (remaining_total + 2.0))
            if mode > hi:
                mode = hi
            if mode < lo:
                mode = lo
            lpm = (
                lf[remaining_a]
                - lf[mode]
                - lf[remaining_a - mode]
                + lf[nbad]
                - lf[c - mode]
                - lf[nbad - c + mode]
                - (lf[remaining_total] - lf[c] - lf[remaining_total - c])
            )
            pm = math.exp(lpm)
            target = u[i, j]
            k_lo = mode
            k_hi = mode
            acc = pm
            k = mode
            nxt_hi = -1.0
            if k_hi < hi:
                nxt_hi = pm * (remaining_a - k_hi) * (c - k_hi) / ((k_hi + 1.0) * (nbad - c + k_hi + 1.0))
            nxt_lo = -1.0
            if k_lo > lo:
                nxt_lo = pm * k_lo * (nbad - c + k_lo) / ((remaining_a - k_lo + 1.0) * (c - k_lo + 1.0))
            while acc < target:
                if nxt_hi >= nxt_lo:
                    if nxt_hi < 0.0:
                        break  # support exhausted by round-off; keep current k
                    k_hi += 1
                    p_hi = nxt_hi
                    acc += nxt_hi
                    k = k_hi
                    nxt_hi = -1.0
                    if k_hi < hi:
                        nxt_hi = p_hi * (remaining_a - k_hi) * (c - k_hi) / ((k_hi + 1.0) * (nbad - c + k_hi + 1.0))
                else:
                    k_lo -= 1
                    p_lo = nxt_lo
                    acc += nxt_lo
                    k = k_lo
                    nxt_lo = -1.0
                    if k_lo > lo:
                        nxt_lo = p_lo * k_lo * (nbad - c + k_lo) / ((remaining_a - k_lo + 1.0) * (c - k_lo + 1.0))
            lp += lf[c] - lf[k] - lf[c - k]
            remaining_a -= k
            remaining_total -= c
        last = cols[n_free_cols]
        lp += lf[last] - lf[remaining_a] - lf[last - remaining_a]
        if lp <= log_thresh:
            count += 1
    return count


def _fisher_exact_2xk(ca, cb) -> float:
    """Exact two-sided p for a 2-column table by hypergeometric enumeration."""
    n_a = int(ca.sum())
    total = int(ca.sum() + cb.sum())
    c1 = int(ca[0] + cb[0])
    log_thresh = _log_table_prob(ca, [c1, total - c1], n_a, total) + math.log1p(PROB_SLACK)
    lo = max(0, c1 - (total - n_a))
    hi = min(c1, n_a)
    p = 0.0
    for x in range(lo, hi + 1):
        lp = _log_table_prob([x, n_a - x], [c1, total - c1], n_a, total)
        if lp <= log_thresh:
            p += math.exp(lp)
    return min(p, 1.0)


def _fisher_mc(ca, cb, stream: Generator, n_tables: int = FISHER_MC_TABLES) -> float:
    """Monte Carlo two-sided p with fixed margins and the add-one estimator."""
    cols = (ca + cb).astype(np.int64)
    n_a = int(ca.sum())
    total = int(cols.sum())
    lf = _log_factorials(total)
    log_thresh = _log_table_prob(ca, cols, n_a, total) + math.log1p(PROB_SLACK)
    u = stream.random((n_tables, len(cols) - 1))
    count = _fisher_mc_extreme_count(cols, n_a, total, lf, u, log_thresh)
    return (1 + count) / (n_tables + 1)


def fisher_exact(a: ArmCounts, b: ArmCounts, stream: Optional[Generator] = None) -> TestResult:
    """Fisher's exact test; Monte Carlo beyond 2x2.

    After dropping categories empty in both arms: exact hypergeometric
    enumeration for 2 columns, otherwise FISHER_MC_TABLES sequentially
    sampled fixed-margin tables with the (count+1)/(B+1) estimator. A
    single-column table admits only the observed outcome, so p = 1.
    """
    if a.n == 0 or b.n == 0:
        return _not_estimable("fisher_exact")
    ca, cb = _drop_empty_columns(a, b)
    if len(ca) < 2:
        return TestResult("fisher_exact", STATUS_OK, p_value=1.0)
    if len(ca) == 2:
        return TestResult("fisher_exact", STATUS_OK, p_value=_fisher_exact_2xk(ca, cb))
    if stream is None:
        raise ValueError("fisher_exact beyond 2x2 needs a random stream for Monte Carlo sampling")
    return TestResult("fisher_exact", STATUS_OK, p_value=_fisher_mc(ca, cb, stream))
