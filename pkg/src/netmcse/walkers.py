"""Simple random walk and Metropolis-Hastings walk over graph nodes.

Randomness comes from numpy's PCG64 generator seeded through ``SeedSequence``
(``np.random.default_rng(seed)``). A walk of ``k`` moves draws ``k`` uniforms
(SRW) or ``2k`` uniforms (MH: proposal, acceptance interleaved) from that
stream, so trajectories do not depend on how the moves are chunked and are
identical under the compiled and pure-Python kernels.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from ._backend import kernels
from .graph_core import Graph


class WalkKind(enum.Enum):
    SRW = "srw"
    MH = "mh"

    @classmethod
    def parse(cls, s: "str | WalkKind") -> "WalkKind":
        if isinstance(s, WalkKind):
            return s
        try:
            return cls(s.lower())
        except ValueError:
            raise ValueError(f"unknown walk kind {s!r}; expected 'srw' or 'mh'") from None


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def random_start(g: Graph, rng: np.random.Generator) -> int:
    return int(rng.integers(g.n))


def _neighbor_at(g: Graph, i: int, u: float) -> int:
    lo, hi = int(g.offsets[i]), int(g.offsets[i + 1])
    d = hi - lo
    if d == 0:
        raise ValueError(f"node {i} is isolated; walks need a connected graph")
    k = min(int(u * d), d - 1)
    return int(g.neighbors[lo + k])


def srw_step(g: Graph, i: int, rng: np.random.Generator) -> int:
    return _neighbor_at(g, i, rng.random())


def mh_step(g: Graph, i: int, rng: np.random.Generator) -> tuple[int, bool]:
    """One Metropolis-Hastings move: propose a uniform neighbor, accept w.p. min(1, d_i/d_j)."""
    u = rng.random(2)
    j = _neighbor_at(g, i, u[0])
    di = int(g.offsets[i + 1] - g.offsets[i])
    dj = int(g.offsets[j + 1] - g.offsets[j])
    if u[1] * dj < di:
        return j, True
    return i, False


@dataclass
class WalkState:
    kind: WalkKind
    current: int
    steps: int = 1  # samples taken so far, the start included
    accepted: int = 0
    visited: np.ndarray | None = field(default=None, repr=False)
    unique: int = 1

    @property
    def acceptance_rate(self) -> float:
        """Accepted moves over attempted moves (``steps - 1``); NaN for SRW or a single sample."""
        if self.kind is not WalkKind.MH or self.steps < 2:
            return math.nan
        return self.accepted / (self.steps - 1)


class Walker:
    """Advances one chain in blocks of moves, keeping the counters in a WalkState."""

    def __init__(self, g: Graph, kind: WalkKind | str, start: int, rng: np.random.Generator):
        if not 0 <= start < g.n:
            raise IndexError(f"start node {start} out of range")
        self.g = g
        self.kind = WalkKind.parse(kind)
        self.rng = rng
        visited = np.zeros(g.n, dtype=bool)
        visited[start] = True
        self.state = WalkState(self.kind, int(start), visited=visited)

    def advance(self, k: int) -> tuple[np.ndarray, np.ndarray | None]:
        """Make ``k`` moves; return the ``k`` new positions (and MH acceptance flags)."""
        g, st = self.g, self.state
        if k <= 0:
            return np.empty(0, dtype=np.int64), None
        if self.kind is WalkKind.SRW:
            nodes = kernels.srw_walk(g.offsets, g.neighbors, st.current, self.rng.random(k))
            acc = None
        else:
            nodes, acc = kernels.mh_walk(g.offsets, g.neighbors, st.current, self.rng.random(2 * k))
            st.accepted += int(acc.sum())
        st.current = int(nodes[-1])
        st.steps += k
        fresh = np.unique(nodes)
        fresh = fresh[~st.visited[fresh]]
        st.visited[fresh] = True
        st.unique += len(fresh)
        return nodes, acc

    def reset_counters(self) -> None:
        """Forget everything before the current position (used after burn-in)."""
        st = self.state
        st.steps, st.accepted, st.unique = 1, 0, 1
        st.visited[:] = False
        st.visited[st.current] = True


FeatureEvaluator = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


def evaluate_rows(evaluator: FeatureEvaluator, nodes: np.ndarray) -> np.ndarray:
    if isinstance(evaluator, np.ndarray):
        return evaluator[nodes]
    return np.asarray(evaluator(nodes), dtype=np.float64).reshape(len(nodes), -1)


@dataclass
class WalkTrace:
    kind: WalkKind
    seed: int | None
    start: int
    nodes: np.ndarray
    features: np.ndarray
    degrees: np.ndarray
    accepted: np.ndarray | None = None  # per sample; entry 0 (the start) is always False

    def __len__(self) -> int:
        return len(self.nodes)


def run_walk(g: Graph, kind: WalkKind | str, start: int, m: int, evaluator: FeatureEvaluator,
             rng: np.random.Generator, burn_in: int = 0, seed: int | None = None,
             ) -> tuple[WalkTrace, WalkState]:
    """Take ``m`` samples (the start counts as sample 0) after discarding ``burn_in`` moves."""
    if m < 1:
        raise ValueError("need at least one sample")
    walker = Walker(g, kind, start, rng)
    if burn_in:
        walker.advance(burn_in)
        walker.reset_counters()
    first = walker.state.current
    moved, acc = walker.advance(m - 1)
    nodes = np.concatenate([[first], moved]).astype(np.int64)
    flags = None
    if walker.kind is WalkKind.MH:
        flags = np.zeros(m, dtype=bool)
        if acc is not None:
            flags[1:] = acc.astype(bool)
    trace = WalkTrace(kind=walker.kind, seed=seed, start=int(start), nodes=nodes,
                      features=evaluate_rows(evaluator, nodes), degrees=g.degrees[nodes].copy(),
                      accepted=flags)
    return trace, walker.state


def write_trace(nodes: np.ndarray, accepted: np.ndarray | None, dest, labels: np.ndarray | None = None) -> None:
    """Per-step debug records ``t,node,accepted`` as CSV."""
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(["t", "node", "accepted"])
    for t, v in enumerate(nodes.tolist()):
        flag = "" if accepted is None else int(bool(accepted[t]))
        w.writerow([t, int(labels[v]) if labels is not None else v, flag])
