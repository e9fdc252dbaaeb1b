"""Exact references: population means by enumeration, analytic walk kernels, AR(1) chains."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .features import FeatureSpec, evaluate_h
from .graph_core import AttributeTable, Graph, NodeStats


@dataclass(frozen=True)
class ExactSummary:
    names: list[str]
    means: np.ndarray
    stationary_srw: np.ndarray
    n: int
    n_e: int


def exact_means(g: Graph, spec: FeatureSpec, attrs: AttributeTable | None = None) -> np.ndarray:
    """(1/n) sum_v h(v), evaluated node by node."""
    deg, tri = g.degrees, g.triangles
    cols: list[list[float]] = [[] for _ in range(spec.p)]
    for v in range(g.n):
        d, t = int(deg[v]), int(tri[v])
        stats = NodeStats(d, t, 2.0 * t / (d * (d - 1)) if d >= 2 else 0.0)
        for j, x in enumerate(evaluate_h(spec, stats, attrs, v)):
            cols[j].append(float(x))
    return np.array([math.fsum(c) / g.n for c in cols])


def srw_stationary(g: Graph) -> np.ndarray:
    """d_i / (2 n_e)."""
    if g.n_e == 0:
        raise ValueError("graph has no edges")
    return g.degrees / (2.0 * g.n_e)


def exact_summary(g: Graph, spec: FeatureSpec, attrs: AttributeTable | None = None) -> ExactSummary:
    return ExactSummary(spec.names, exact_means(g, spec, attrs), srw_stationary(g), g.n, g.n_e)


def srw_kernel(g: Graph) -> np.ndarray:
    """Dense SRW transition matrix; only sensible for small graphs."""
    P = np.zeros((g.n, g.n))
    for i in range(g.n):
        nb = g.neighbors_of(i)
        P[i, nb] = 1.0 / len(nb)
    return P


def mh_kernel(g: Graph) -> np.ndarray:
    """Dense Metropolis-Hastings transition matrix with SRW proposals."""
    d = g.degrees
    P = np.zeros((g.n, g.n))
    for i in range(g.n):
        for j in g.neighbors_of(i):
            P[i, j] = min(1.0, d[i] / d[j]) / d[i]
        P[i, i] = 1.0 - P[i].sum()
    return P


def ar1_chain(rho: float, m: int, seed: int) -> tuple[np.ndarray, float]:
    """x_t = rho x_{t-1} + e_t, e_t ~ N(0, 1), x_0 stationary; returns (chain, 1/(1-rho)^2)."""
    if not -1.0 < rho < 1.0:
        raise ValueError("|rho| must be below 1")
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(m)
    e[0] /= math.sqrt(1.0 - rho * rho)
    x = signal.lfilter([1.0], [1.0, -rho], e)
    return x, 1.0 / (1.0 - rho) ** 2
