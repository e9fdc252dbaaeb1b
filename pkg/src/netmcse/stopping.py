"""Relative fixed-volume sequential stopping for a single walk.

The walk runs until the p-th root of the confidence-ellipsoid volume, plus
1/m, drops below eps times |Lambda_m|^(1/2p), and not before ``m_star``
samples. The rule is checked at ``m_star`` and then every ``check_interval``
samples.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import estimators, mcse
from .features import FeatureSpec, feature_table
from .graph_core import AttributeTable, Graph
from .mcse import BatchRule, IndeterminateCovariance, RegionSpec
from .walkers import Walker, WalkKind, make_rng, random_start


@dataclass(frozen=True)
class StoppingConfig:
    eps: float = 0.05
    alpha: float = 0.05
    m_star: int = 10_000
    check_interval: int = 1_000
    max_steps: int = 10_000_000
    batch_rule: BatchRule = BatchRule.SQRT
    burn_in: int = 0

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.check_interval < 1:
            raise ValueError("check_interval must be at least 1")
        if self.max_steps < 1 or self.m_star < 0 or self.burn_in < 0:
            raise ValueError("max_steps must be positive; m_star and burn_in non-negative")
        object.__setattr__(self, "batch_rule", BatchRule(self.batch_rule))


@dataclass(frozen=True)
class StopCheck:
    stop: bool
    vol_root: float = math.nan  # Vol^(1/p)
    lam_root: float = math.nan  # |Lambda|^(1/2p)
    reason: str | None = None

    @property
    def ratio(self) -> float:
        return self.vol_root / self.lam_root


def evaluate_stop(m: int, Lambda, Sigma, region: RegionSpec, eps: float, m_star: int) -> StopCheck:
    p = region.p
    try:
        vol_root = math.exp(mcse.log_confidence_volume(m, Sigma, region) / p)
        lam_root = math.exp(mcse.logdet_spd(Lambda) / (2 * p))
    except IndeterminateCovariance as exc:
        return StopCheck(False, reason=str(exc))
    except ValueError as exc:  # too few batches for the T^2 quantile
        return StopCheck(False, reason=str(exc))
    lhs = vol_root + eps * lam_root * (m < m_star) + 1.0 / m
    return StopCheck(lhs <= eps * lam_root, vol_root, lam_root)


def check_stop(m: int, Lambda, Sigma, region: RegionSpec, eps: float, m_star: int) -> bool:
    return evaluate_stop(m, Lambda, Sigma, region, eps, m_star).stop


@dataclass
class TerminationReport:
    kind: WalkKind
    seed: int
    start: int
    names: list[str]
    termination_step: int
    budget_terminated: bool
    estimates: np.ndarray
    std_errors: np.ndarray
    ess: float
    ratio_stat: float
    unique_nodes: int
    acceptance_rate: float
    covered: bool | None
    wallclock: float
    check_interval: int
    note: str | None = None
    trace_nodes: np.ndarray | None = field(default=None, repr=False)
    trace_accepted: np.ndarray | None = field(default=None, repr=False)

    @property
    def p(self) -> int:
        return len(self.names)


@dataclass
class _Assessment:
    estimates: np.ndarray
    Lambda: np.ndarray
    Sigma: np.ndarray
    region: RegionSpec | None
    check: StopCheck


def _assess(x: np.ndarray, kind: WalkKind, cfg: StoppingConfig, m_star: int) -> _Assessment:
    m, p = x.shape
    cov = mcse.batch_means_covariance(x, cfg.batch_rule)
    lam, sig = cov.Lambda, cov.Sigma
    mu = x.mean(axis=0)
    if kind is WalkKind.SRW:
        try:
            G = estimators.delta_jacobian(mu)
        except estimators.SingularPivot as exc:
            return _Assessment(mu, lam, sig, None, StopCheck(False, reason=str(exc)))
        lam, sig = estimators.delta_covariance(G, lam), estimators.delta_covariance(G, sig)
        mu = estimators.g_transform(mu)
    if cov.a_m - p < p:
        return _Assessment(mu, lam, sig, None,
                           StopCheck(False, reason=f"insufficient batches ({cov.a_m} for p={p})"))
    region = RegionSpec.for_batches(cfg.alpha, p, cov.a_m)
    return _Assessment(mu, lam, sig, region, evaluate_stop(m, lam, sig, region, cfg.eps, m_star))


class _Buffer:
    def __init__(self, shape_tail=(), dtype=np.float64, cap=4096):
        self.a = np.empty((cap, *shape_tail), dtype=dtype)
        self.n = 0

    def extend(self, rows):
        k = len(rows)
        if self.n + k > len(self.a):
            cap = max(2 * len(self.a), self.n + k)
            grown = np.empty((cap, *self.a.shape[1:]), dtype=self.a.dtype)
            grown[: self.n] = self.a[: self.n]
            self.a = grown
        self.a[self.n:self.n + k] = rows
        self.n += k

    @property
    def view(self):
        return self.a[: self.n]


def run_until_stop(g: Graph, kind: WalkKind | str, spec: FeatureSpec, cfg: StoppingConfig, seed: int,
                   truth=None, attrs: AttributeTable | None = None, keep_trace: bool = False,
                   tables: tuple[np.ndarray, np.ndarray] | None = None) -> TerminationReport:
    """Run one walk under the stopping rule and summarize it at termination.

    MH averages ``h``; SRW averages ``h*`` and reports the ratio estimate, with
    both covariance matrices carried through the delta-method Jacobian.
    ``tables`` may pass precomputed (h, h*) node tables to skip recomputation.
    """
    t0 = time.perf_counter()
    kind = WalkKind.parse(kind)
    spec.validate(attrs, require_degree_first=kind is WalkKind.SRW)
    if g.n < 2 or not g.is_connected():
        raise ValueError("walks need a connected graph with at least two nodes")
    if tables is None:
        h_table = feature_table(spec, g, attrs)
        hs_table = feature_table(spec, g, attrs, transformed=True) if kind is WalkKind.SRW else None
    else:
        h_table, hs_table = tables
    chain_table = hs_table if kind is WalkKind.SRW else h_table
    p = spec.p

    rng = make_rng(seed)
    start = random_start(g, rng)
    walker = Walker(g, kind, start, rng)
    if cfg.burn_in:
        walker.advance(cfg.burn_in)
        walker.reset_counters()
    first = walker.state.current

    nodes = _Buffer(dtype=np.int64)
    nodes.extend([first])
    xs = _Buffer((p,))
    xs.extend(chain_table[[first]])
    accepted = _Buffer(dtype=np.uint8) if keep_trace and kind is WalkKind.MH else None
    if accepted is not None:
        accepted.extend([0])

    m = 1
    next_check = max(cfg.m_star, 2)
    assessment: _Assessment | None = None
    stopped = False
    while True:
        target = min(next_check, cfg.max_steps)
        if target > m:
            moved, acc = walker.advance(target - m)
            nodes.extend(moved)
            xs.extend(chain_table[moved])
            if accepted is not None:
                accepted.extend(acc)
            m = target
        if m == next_check:
            assessment = _assess(xs.view, kind, cfg, cfg.m_star)
            if assessment.check.stop:
                stopped = True
                break
            next_check += cfg.check_interval
        if m >= cfg.max_steps:
            break

    if assessment is None or not stopped:
        assessment = _assess(xs.view, kind, cfg, cfg.m_star) if m >= 2 else None

    node_hist = nodes.view
    if kind is WalkKind.SRW:
        est = estimators.srw_ratio_mean(h_table[node_hist], g.degrees[node_hist])
    else:
        est = estimators.mh_mean(xs.view)

    ess = ratio = math.nan
    se = np.full(p, math.nan)
    covered = None
    note = None
    if assessment is not None:
        se = np.sqrt(np.clip(np.diag(assessment.Sigma), 0.0, None) / m)
        ess = mcse.multivariate_ess(m, assessment.Lambda, assessment.Sigma)
        chk = assessment.check
        ratio = chk.ratio if chk.reason is None else math.nan
        note = chk.reason
        if truth is not None and assessment.region is not None:
            try:
                covered = mcse.region_contains(est, assessment.Sigma, m, assessment.region, truth)
            except IndeterminateCovariance as exc:
                note = str(exc)

    st = walker.state
    return TerminationReport(
        kind=kind, seed=seed, start=start, names=spec.names, termination_step=m,
        budget_terminated=not stopped, estimates=est, std_errors=se, ess=ess, ratio_stat=ratio,
        unique_nodes=st.unique, acceptance_rate=st.acceptance_rate, covered=covered,
        wallclock=time.perf_counter() - t0, check_interval=cfg.check_interval, note=note,
        trace_nodes=node_hist.copy() if keep_trace else None,
        trace_accepted=accepted.view.copy() if accepted is not None else None,
    )
