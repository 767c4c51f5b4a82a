"""Proportional-odds cumulative-logit model for a two-arm ordinal table.

Model: logit P(Y <= j | x) = alpha_j - beta * x with x = 1 for the
intervention arm, so beta > 0 means the intervention shifts mass toward
higher (worse, for a best-to-worst ranking) categories. Fitting is damped
Newton on the full parameter vector (alpha_1..alpha_{K'-1}, beta) with the
observed information as the Hessian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .special import chi_square_sf, normal_cdf
from .stattests import (
    STATUS_OK,
    NotEstimableError,
    TestResult,
    _drop_empty_columns,
    _not_estimable,
)
from .trial import ArmCounts

MAX_ITERATIONS = 100
SCORE_TOL = 1e-8
PARAM_TOL = 1e-10
MAX_HALVINGS = 10
SEPARATION_BOUND = 20.0

# When no Newton step can improve the log-likelihood by even one ulp, the
# iterate is the float64 optimum; a residual score below this bound then
# still certifies convergence (beta error ~ score/curvature, well under 1e-6).
NUMERIC_OPTIMUM_SCORE_TOL = 1e-5


@dataclass(frozen=True)
class PoFit:
    """Maximum-likelihood fit of the proportional-odds model.

    ``intercepts`` are the cutpoint parameters alpha_j for the collapsed
    (non-empty) categories; ``se_beta`` is NaN unless converged.
    """

    beta: float
    se_beta: float
    intercepts: tuple
    loglik: float
    iterations: int
    converged: bool


def _expit(x):
    return 1.0 / (1.0 + np.exp(-x))


def _loglik(theta: np.ndarray, y: np.ndarray) -> float:
    """Multinomial log-likelihood; -inf outside the ordered-cutpoint region."""
    m = y.shape[1] - 1
    alpha, beta = theta[:m], theta[m]
    total = 0.0
    for x in (0, 1):
        cdf = np.empty(m + 2)
        cdf[0] = 0.0
        cdf[1:-1] = _expit(alpha - beta * x)
        cdf[-1] = 1.0
        pi = np.diff(cdf)
        if np.any(pi <= 0.0):
            return -math.inf
        total += float(np.dot(y[x], np.log(pi)))
    return total


def _score_hessian(theta: np.ndarray, y: np.ndarray):
    """Analytic score vector and Hessian of the log-likelihood at theta."""
    m = y.shape[1] - 1
    alpha, beta = theta[:m], theta[m]
    score = np.zeros(m + 1)
    hess = np.zeros((m + 1, m + 1))
    for x in (0, 1):
        cdf = _expit(alpha - beta * x)
        dens = cdf * (1.0 - cdf)            # logistic density at each cutpoint
        ddens = dens * (1.0 - 2.0 * cdf)    # its derivative
        pi = np.diff(np.concatenate(([0.0], cdf, [1.0])))
        d = y[x] / pi
        # score: cutpoint k separates categories k and k+1
        gap = d[:-1] - d[1:]
        score[:m] += dens * gap
        score[m] += -x * float(np.dot(dens, gap))
        # Hessian, accumulated per category j: y_j * (w_j/pi_j - u_j u_j^T / pi_j^2)
        for j in range(m + 1):
            yj = y[x][j]
            if yj == 0.0:
                continue
            f_hi = dens[j] if j < m else 0.0
            f_lo = dens[j - 1] if j > 0 else 0.0
            fp_hi = ddens[j] if j < m else 0.0
            fp_lo = ddens[j - 1] if j > 0 else 0.0
            inv_pi = 1.0 / pi[j]
            w_scale = yj * inv_pi
            if j < m:
                hess[j, j] += w_scale * fp_hi
                hess[j, m] += w_scale * (-x) * fp_hi
                hess[m, j] += w_scale * (-x) * fp_hi
            if j > 0:
                hess[j - 1, j - 1] -= w_scale * fp_lo
                hess[j - 1, m] += w_scale * x * fp_lo
                hess[m, j - 1] += w_scale * x * fp_lo
            hess[m, m] += w_scale * x * x * (fp_hi - fp_lo)
            # outer-product part; u_j has at most three non-zero entries
            u_beta = -x * (f_hi - f_lo)
            o_scale = yj * inv_pi * inv_pi
            if j < m:
                hess[j, j] -= o_scale * f_hi * f_hi
                hess[j, m] -= o_scale * f_hi * u_beta
                hess[m, j] -= o_scale * f_hi * u_beta
            if j > 0:
                hess[j - 1, j - 1] -= o_scale * f_lo * f_lo
                hess[j - 1, m] -= o_scale * (-f_lo) * u_beta
                hess[m, j - 1] -= o_scale * (-f_lo) * u_beta
            if j < m and j > 0:
                hess[j, j - 1] -= o_scale * f_hi * (-f_lo)
                hess[j - 1, j] -= o_scale * f_hi * (-f_lo)
            hess[m, m] -= o_scale * u_beta * u_beta
    return score, hess


def fit_proportional_odds(a: ArmCounts, b: ArmCounts) -> PoFit:
    """Fit the model to the 2xK table by damped Newton iteration.

    Zero-total categories are collapsed first (their cutpoints are not
    identifiable). Initialization: alpha = pooled empirical cumulative
    logits, beta = 0. Non-convergence (iteration exhaustion, singular or
    indefinite information, |beta| > 20 separation guard) is reported via
    ``converged=False``, not an exception.
    """
    ca, cb = _drop_empty_columns(a, b)
    if len(ca) < 2:
        raise NotEstimableError("proportional-odds fit needs at least 2 non-empty categories")
    y = np.vstack([ca, cb]).astype(np.float64)
    m = y.shape[1] - 1

    pooled = y.sum(axis=0)
    cum = np.cumsum(pooled)[:-1] / pooled.sum()
    theta = np.concatenate([np.log(cum / (1.0 - cum)), [0.0]])
    ll = _loglik(theta, y)

    converged = False
    iterations = 0
    for _ in range(MAX_ITERATIONS):
        score, hess = _score_hessian(theta, y)
        if np.max(np.abs(score)) < SCORE_TOL:
            converged = True
            break
        try:
            step = np.linalg.solve(-hess, score)
        except np.linalg.LinAlgError:
            break
        accepted = False
        for _h in range(MAX_HALVINGS + 1):
            candidate = theta + step
            ll_candidate = _loglik(candidate, y)
            # near the optimum the true improvement shrinks below one ulp of
            # the log-likelihood, so an equal value still counts as accepted
            if ll_candidate >= ll:
                accepted = True
                break
            step = step / 2.0
        if not accepted:
            converged = bool(np.max(np.abs(score)) < NUMERIC_OPTIMUM_SCORE_TOL)
            break
        theta, ll = candidate, ll_candidate
        iterations += 1
        if abs(theta[m]) > SEPARATION_BOUND:
            break
        if np.max(np.abs(step)) < PARAM_TOL:
            converged = True
            break

    se_beta = math.nan
    if converged:
        _, hess = _score_hessian(theta, y)
        info = -hess
        try:
            np.linalg.cholesky(info)  # observed information must be positive definite
            se_beta = float(math.sqrt(np.linalg.inv(info)[m, m]))
        except np.linalg.LinAlgError:
            converged = False
            se_beta = math.nan
        if converged and not np.all(np.diff(theta[:m]) > 0):
            converged = False
            se_beta = math.nan

    return PoFit(
        beta=float(theta[m]),
        se_beta=se_beta,
        intercepts=tuple(float(v) for v in theta[:m]),
        loglik=ll,
        iterations=iterations,
        converged=converged,
    )


def null_loglik(a: ArmCounts, b: ArmCounts) -> float:
    """Closed-form log-likelihood of the beta = 0 model (pooled proportions)."""
    pooled = (a.counts + b.counts).astype(np.float64)
    total = pooled.sum()
    if total == 0:
        raise NotEstimableError("empty table")
    nonzero = pooled[pooled > 0]
    return float(np.dot(nonzero, np.log(nonzero / total)))


def po_wald_test(fit: PoFit) -> TestResult:
    """Two-sided Wald test of beta = 0."""
    if not fit.converged:
        return _not_estimable("prop_odds_wald")
    z = fit.beta / fit.se_beta
    p = 2.0 * normal_cdf(-abs(z))
    return TestResult("prop_odds_wald", STATUS_OK, p_value=min(p, 1.0), statistic=z)


def po_lrt_test(a: ArmCounts, b: ArmCounts, fit: PoFit = None) -> TestResult:
    """Likelihood-ratio test of beta = 0 against the closed-form null fit."""
    if fit is None:
        try:
            fit = fit_proportional_odds(a, b)
        except NotEstimableError:
            return _not_estimable("prop_odds_lrt")
    if not fit.converged:
        return _not_estimable("prop_odds_lrt")
    deviance = max(0.0, 2.0 * (fit.loglik - null_loglik(a, b)))
    p = chi_square_sf(deviance, 1)
    return TestResult("prop_odds_lrt", STATUS_OK, p_value=min(p, 1.0), statistic=deviance)
