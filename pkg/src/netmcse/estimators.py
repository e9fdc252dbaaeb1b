"""Point estimates from a walk: plain means for MH, ratio (importance) estimates for SRW."""
from __future__ import annotations

import math

import numpy as np


class SingularPivot(ZeroDivisionError):
    """The leading reciprocal-degree mean is zero, so g and its Jacobian are undefined."""


class EstimateState:
    """Running column sums with Neumaier compensation, fed one block of rows at a time."""

    def __init__(self, p: int):
        self.p = p
        self.m = 0
        self._sum = np.zeros(p)
        self._comp = np.zeros(p)

    def update(self, rows: np.ndarray) -> None:
        rows = np.asarray(rows, dtype=np.float64).reshape(-1, self.p)
        if not len(rows):
            return
        block = np.array([math.fsum(col) for col in rows.T])
        s = self._sum
        t = s + block
        big = np.abs(s) >= np.abs(block)
        self._comp += np.where(big, (s - t) + block, (block - t) + s)
        self._sum = t
        self.m += len(rows)

    def mean(self) -> np.ndarray:
        if self.m < 1:
            raise ValueError("no observations")
        return (self._sum + self._comp) / self.m


def _rows(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    return a[:, None] if a.ndim == 1 else a


def mh_mean(features) -> np.ndarray:
    x = _rows(features)
    if len(x) == 0:
        raise ValueError("empty trace")
    return np.array([math.fsum(col) for col in x.T]) / len(x)


def srw_ratio_mean(features, degrees) -> np.ndarray:
    """sum(h(V_t)/d_t) / sum(1/d_t), column by column."""
    x = _rows(features)
    d = np.asarray(degrees, dtype=np.float64)
    if len(x) == 0:
        raise ValueError("empty trace")
    if np.any(d <= 0):
        raise ValueError("degrees must be positive")
    w = 1.0 / d
    den = math.fsum(w)
    return np.array([math.fsum(col * w) for col in x.T]) / den


def g_transform(mu_star) -> np.ndarray:
    """(a, b, c, ...) -> (1/a, b/a, c/a, ...)."""
    mu = np.atleast_1d(np.asarray(mu_star, dtype=np.float64))
    a = mu[0]
    if a == 0.0 or not np.isfinite(a):
        raise SingularPivot("leading component must be nonzero")
    out = mu / a
    out[0] = 1.0 / a
    return out


def delta_jacobian(mu_star) -> np.ndarray:
    """Entry (i, j) is d g_j / d mu*_i at ``mu_star``: column j is the gradient of g_j."""
    mu = np.atleast_1d(np.asarray(mu_star, dtype=np.float64))
    a = mu[0]
    if a == 0.0 or not np.isfinite(a):
        raise SingularPivot("leading component must be nonzero")
    p = len(mu)
    G = np.eye(p) / a
    G[0, :] = -mu / (a * a)
    G[0, 0] = -1.0 / (a * a)
    return G


def delta_covariance(G, S) -> np.ndarray:
    """G' S G, symmetrized."""
    G = np.atleast_2d(np.asarray(G, dtype=np.float64))
    S = np.atleast_2d(np.asarray(S, dtype=np.float64))
    if S.shape != (G.shape[0], G.shape[0]):
        raise ValueError(f"dimension mismatch: G {G.shape}, S {S.shape}")
    out = G.T @ S @ G
    return 0.5 * (out + out.T)
