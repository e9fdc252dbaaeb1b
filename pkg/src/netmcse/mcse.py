"""Multivariate Monte Carlo standard errors for Markov chain output.

Batch-means estimate of the long-run covariance, multivariate effective sample
size, the pre-computable minimum ESS, Hotelling T^2 confidence ellipsoids, and
the chi-square / F quantiles they need.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg, optimize, special

QUANTILE_TOL = 1e-12


class IndeterminateCovariance(ArithmeticError):
    """A covariance matrix is singular or not positive definite to working precision."""


class BatchRule(enum.Enum):
    SQRT = "sqrt"
    CUBEROOT = "cuberoot"

    def batch_size(self, m: int) -> int:
        if self is BatchRule.SQRT:
            b = math.isqrt(m)
        else:
            b = int(round(m ** (1.0 / 3.0)))
            while b ** 3 > m:
                b -= 1
            while (b + 1) ** 3 <= m:
                b += 1
        return max(b, 1)


@dataclass(frozen=True)
class CovarianceEstimates:
    Lambda: np.ndarray
    Sigma: np.ndarray
    a_m: int
    b_m: int
    m: int
    insufficient_batches: bool = False
    degenerate: bool = False

    @property
    def m_used(self) -> int:
        return self.a_m * self.b_m

    @property
    def p(self) -> int:
        return self.Sigma.shape[0]


def _as_chain(chain) -> np.ndarray:
    x = np.asarray(chain, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError("chain must be (m,) or (m, p)")
    return x


def _symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def sample_covariance(chain) -> np.ndarray:
    """Unbiased (divisor m-1) sample covariance of the rows of ``chain``."""
    x = _as_chain(chain)
    m = x.shape[0]
    if m < 2:
        raise ValueError("sample covariance needs at least two observations")
    c = x - x.mean(axis=0)
    return _symmetrize(c.T @ c / (m - 1))


def batch_means_covariance(chain, batch_rule: BatchRule | str = BatchRule.SQRT) -> CovarianceEstimates:
    """Nonoverlapping batch means with batch size floor(m^1/2) or floor(m^1/3).

    Only the first ``a_m * b_m`` observations enter the batches; the remainder
    is discarded. ``Lambda`` is the sample covariance of the whole chain.
    """
    x = _as_chain(chain)
    m, p = x.shape
    rule = BatchRule(batch_rule)
    b = rule.batch_size(m)
    a = m // b
    lam = sample_covariance(x)
    if a < 2:
        sigma = np.full((p, p), np.nan)
    else:
        means = x[: a * b].reshape(a, b, p).mean(axis=1)
        dev = means - means.mean(axis=0)
        sigma = _symmetrize(b * (dev.T @ dev) / (a - 1))
    degenerate = bool(np.all(sigma == 0.0))
    return CovarianceEstimates(Lambda=lam, Sigma=sigma, a_m=a, b_m=b, m=m,
                               insufficient_batches=a <= p, degenerate=degenerate)


def logdet_spd(a: np.ndarray) -> float:
    """log|A| for symmetric positive definite A via Cholesky."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    if not np.all(np.isfinite(a)):
        raise IndeterminateCovariance("covariance has non-finite entries")
    try:
        c = linalg.cholesky(a, lower=True)
    except linalg.LinAlgError:
        raise IndeterminateCovariance("covariance is not positive definite") from None
    diag = np.diag(c)
    if np.any(diag <= 0.0):
        raise IndeterminateCovariance("covariance is singular")
    return 2.0 * float(np.sum(np.log(diag)))


def multivariate_ess(m: int, Lambda, Sigma) -> float:
    """m (|Lambda| / |Sigma|)^(1/p); NaN when either determinant is not positive."""
    lam = np.atleast_2d(Lambda)
    p = lam.shape[0]
    try:
        return m * math.exp((logdet_spd(lam) - logdet_spd(Sigma)) / p)
    except IndeterminateCovariance:
        return math.nan


def _log_unit_ball_const(p: int) -> float:
    # log(2 pi^(p/2) / (p Gamma(p/2))), the volume of the unit p-ball
    return math.log(2.0) + 0.5 * p * math.log(math.pi) - math.log(p) - math.lgamma(0.5 * p)


def min_ess(p: int, alpha: float = 0.05, eps: float = 0.05) -> int:
    """Smallest ESS giving a 100(1-alpha)% region of relative precision eps."""
    if p < 1 or not 0 < alpha < 1 or eps <= 0:
        raise ValueError("need p >= 1, 0 < alpha < 1, eps > 0")
    return math.ceil(min_ess_exact(p, alpha, eps))


def min_ess_exact(p: int, alpha: float, eps: float) -> float:
    log_val = ((2.0 / p) * math.log(2.0) + math.log(math.pi)
               - (2.0 / p) * (math.log(p) + math.lgamma(0.5 * p))
               + math.log(chi2_quantile(1.0 - alpha, p)) - 2.0 * math.log(eps))
    return math.exp(log_val)


# -- quantiles ------------------------------------------------------------------

def chi2_cdf(x: float, df: float) -> float:
    return float(special.gammainc(0.5 * df, 0.5 * x)) if x > 0 else 0.0


def f_cdf(x: float, d1: float, d2: float) -> float:
    if x <= 0:
        return 0.0
    return float(special.betainc(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2)))


def _invert(cdf, prob: float, start: float) -> float:
    hi = max(start, 1.0)
    while cdf(hi) < prob:
        hi *= 2.0
        if hi > 1e300:
            raise OverflowError("quantile bracket diverged")
    lo = 0.0
    return optimize.brentq(lambda x: cdf(x) - prob, lo, hi, xtol=QUANTILE_TOL, rtol=4 * np.finfo(float).eps,
                           maxiter=500)


def chi2_quantile(prob: float, df: int) -> float:
    """Inverse chi-square CDF by bracketed root finding on the regularized gamma."""
    if not 0 < prob < 1 or df < 1:
        raise ValueError("need 0 < prob < 1 and df >= 1")
    return _invert(lambda x: chi2_cdf(x, df), prob, float(df))


def f_quantile(prob: float, d1: int, d2: int) -> float:
    if not 0 < prob < 1 or d1 < 1 or d2 < 1:
        raise ValueError("need 0 < prob < 1 and positive degrees of freedom")
    return _invert(lambda x: f_cdf(x, d1, d2), prob, 1.0)


def hotelling_t2_quantile(prob: float, p: int, q: int) -> float:
    """Quantile of Hotelling's T^2(p, q) = p q / (q - p + 1) F(p, q - p + 1)."""
    if q < p:
        raise ValueError(f"insufficient batches for region: q={q} < p={p}")
    d2 = q - p + 1
    return p * q / d2 * f_quantile(prob, p, d2)


# -- confidence regions -----------------------------------------------------------

@dataclass(frozen=True)
class RegionSpec:
    alpha: float
    p: int
    q: int

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")

    @classmethod
    def for_batches(cls, alpha: float, p: int, a_m: int) -> "RegionSpec":
        return cls(alpha=alpha, p=p, q=a_m - p)

    @property
    def t2(self) -> float:
        return hotelling_t2_quantile(1.0 - self.alpha, self.p, self.q)


def log_confidence_volume(m: int, Sigma, region: RegionSpec) -> float:
    p = region.p
    return (_log_unit_ball_const(p) + 0.5 * p * (math.log(region.t2) - math.log(m))
            + 0.5 * logdet_spd(Sigma))


def confidence_volume(m: int, Sigma, region: RegionSpec) -> float:
    """Volume of {mu: m (mu_hat - mu)' Sigma^-1 (mu_hat - mu) < T^2}."""
    return math.exp(log_confidence_volume(m, Sigma, region))


def region_statistic(mu_hat, Sigma, m: int, mu_0) -> float:
    diff = np.atleast_1d(np.asarray(mu_hat, dtype=np.float64) - np.asarray(mu_0, dtype=np.float64))
    try:
        c = linalg.cho_factor(np.atleast_2d(Sigma), lower=True)
    except linalg.LinAlgError:
        raise IndeterminateCovariance("covariance is not positive definite") from None
    return float(m * diff @ linalg.cho_solve(c, diff))


def region_contains(mu_hat, Sigma, m: int, region: RegionSpec, mu_0) -> bool:
    return region_statistic(mu_hat, Sigma, m, mu_0) < region.t2
