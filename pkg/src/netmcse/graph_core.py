"""Undirected simple graphs in compressed adjacency form, plus node attributes.

Graphs are immutable once built: ``offsets`` and ``neighbors`` are read-only
arrays, and node ``v``'s neighbors are ``neighbors[offsets[v]:offsets[v+1]]``,
sorted ascending.
"""
from __future__ import annotations

import csv
import io
import logging
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from ._backend import kernels

logger = logging.getLogger(__name__)

NOT_REPORTED = "Not Reported"


class GraphFormatError(ValueError):
    """Malformed edge-list or attribute input."""


@dataclass(frozen=True, eq=False)
class Graph:
    offsets: np.ndarray
    neighbors: np.ndarray
    labels: np.ndarray  # dense id -> original label
    dropped_duplicates: int = 0
    dropped_self_loops: int = 0

    def __post_init__(self):
        for arr in (self.offsets, self.neighbors, self.labels):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.offsets) - 1

    @property
    def n_e(self) -> int:
        return len(self.neighbors) // 2

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.diff(self.offsets)
        d.setflags(write=False)
        return d

    @cached_property
    def id_map(self) -> dict[int, int]:
        return {int(lab): i for i, lab in enumerate(self.labels)}

    @cached_property
    def triangles(self) -> np.ndarray:
        t = kernels.triangle_counts(self.offsets, self.neighbors)
        t.setflags(write=False)
        return t

    def neighbors_of(self, v: int) -> np.ndarray:
        return self.neighbors[self.offsets[v]:self.offsets[v + 1]]

    def edges(self) -> np.ndarray:
        """Each undirected edge once, as rows (i, j) with i < j, in dense ids."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        keep = src < self.neighbors
        return np.column_stack([src[keep], self.neighbors[keep]])

    def is_connected(self) -> bool:
        return self.n > 0 and int(_component_labels(self).max()) == 0

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (np.array_equal(self.offsets, other.offsets)
                and np.array_equal(self.neighbors, other.neighbors)
                and np.array_equal(self.labels, other.labels))

    __hash__ = None


@dataclass(frozen=True)
class NodeStats:
    degree: int
    triangles: int
    clustering_coefficient: float


def from_edges(edges: Iterable[tuple[int, int]] | np.ndarray,
               labels: Sequence[int] | np.ndarray | None = None,
               n: int | None = None) -> Graph:
    """Build a Graph from dense-id edge pairs, dropping loops and duplicates.

    ``n`` defaults to ``len(labels)`` or to one past the largest id seen.
    """
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if n is None:
        n = len(labels) if labels is not None else (int(e.max()) + 1 if e.size else 0)
    if n < 1:
        raise GraphFormatError("graph has no nodes")
    if e.size and (e.min() < 0 or e.max() >= n):
        raise GraphFormatError("edge endpoint out of range")
    loops = e[:, 0] == e[:, 1]
    n_loops = int(loops.sum())
    e = e[~loops]
    lo = np.minimum(e[:, 0], e[:, 1])
    hi = np.maximum(e[:, 0], e[:, 1])
    key = np.unique(lo * n + hi)
    n_dupes = len(e) - len(key)
    lo, hi = key // n, key % n
    src = np.concatenate([lo, hi])
    dst = np.concatenate([hi, lo])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=offsets[1:])
    if labels is None:
        labels = np.arange(n, dtype=np.int64)
    return Graph(offsets=offsets, neighbors=np.ascontiguousarray(dst, dtype=np.int64),
                 labels=np.asarray(labels, dtype=np.int64).copy(),
                 dropped_duplicates=n_dupes, dropped_self_loops=n_loops)


def _open_text(source) -> tuple[IO[str], bool]:
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode()), True
    if isinstance(source, str):
        return open(source, "r", encoding="utf-8"), True
    if hasattr(source, "read"):
        if isinstance(source, io.TextIOBase):
            return source, False
        return io.TextIOWrapper(source, encoding="utf-8"), False
    return open(source, "r", encoding="utf-8"), True  # path-like


def load_edge_list(source) -> Graph:
    """Read a SNAP-style edge list from a path, bytes, or a (text or binary) stream.

    Labels are remapped to dense ids in order of first appearance. Self loops and
    repeated edges are dropped; the counts are kept on the graph and reported
    through :mod:`warnings`.
    """
    fh, close = _open_text(source)
    id_map: dict[int, int] = {}
    src: list[int] = []
    dst: list[int] = []
    try:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) < 2:
                raise GraphFormatError(f"line {lineno}: expected two node labels, got {s!r}")
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphFormatError(f"line {lineno}: non-integer node label in {s!r}") from None
            src.append(id_map.setdefault(a, len(id_map)))
            dst.append(id_map.setdefault(b, len(id_map)))
    finally:
        if close:
            fh.close()
    if not id_map:
        raise GraphFormatError("empty edge list")
    g = from_edges(np.column_stack([src, dst]), labels=list(id_map))
    if g.dropped_duplicates or g.dropped_self_loops:
        warnings.warn(f"dropped {g.dropped_duplicates} duplicate edge(s) and "
                      f"{g.dropped_self_loops} self loop(s)", stacklevel=2)
    return g


def write_edge_list(g: Graph, dest, original_labels: bool = True) -> None:
    close = False
    if isinstance(dest, str) or not hasattr(dest, "write"):
        dest, close = open(dest, "w", encoding="utf-8"), True
    try:
        lab = g.labels if original_labels else np.arange(g.n)
        for i, j in g.edges():
            dest.write(f"{lab[i]} {lab[j]}\n")
    finally:
        if close:
            dest.close()


def _component_labels(g: Graph) -> np.ndarray:
    """Component index per node, numbered by each component's smallest node id."""
    adj = sp.csr_matrix((np.ones(len(g.neighbors), dtype=np.int8), g.neighbors, g.offsets),
                        shape=(g.n, g.n))
    _, raw = connected_components(adj, directed=False)
    _, first = np.unique(raw, return_index=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first)] = np.arange(len(first))
    return rank[raw]


def induced_subgraph(g: Graph, keep: np.ndarray) -> Graph:
    keep = np.sort(np.asarray(keep, dtype=np.int64))
    new_id = np.full(g.n, -1, dtype=np.int64)
    new_id[keep] = np.arange(len(keep))
    e = g.edges()
    e = new_id[e]
    e = e[(e >= 0).all(axis=1)]
    return from_edges(e, labels=g.labels[keep], n=len(keep))


def largest_connected_component(g: Graph) -> tuple[Graph, np.ndarray]:
    """Induced subgraph on the largest component and the new-id -> old-id map.

    Ties go to the component containing the smallest node id.
    """
    comp = _component_labels(g)
    sizes = np.bincount(comp)
    best = int(np.argmax(sizes))  # first max = smallest min-id among ties
    keep = np.flatnonzero(comp == best)
    if len(keep) == g.n:
        return g, keep
    return induced_subgraph(g, keep), keep


def node_stats(g: Graph, v: int) -> NodeStats:
    if not 0 <= v < g.n:
        raise IndexError(f"node {v} out of range for graph with {g.n} nodes")
    d = int(g.offsets[v + 1] - g.offsets[v])
    t = int(kernels.node_triangles(g.offsets, g.neighbors, int(v)))
    cc = 2.0 * t / (d * (d - 1)) if d >= 2 else 0.0
    return NodeStats(degree=d, triangles=t, clustering_coefficient=cc)


def clustering_coefficients(g: Graph) -> np.ndarray:
    """Local clustering of every node (0 where degree < 2)."""
    d = g.degrees.astype(np.float64)
    out = np.zeros(g.n)
    ok = d >= 2
    out[ok] = 2.0 * g.triangles[ok] / (d[ok] * (d[ok] - 1.0))
    return out


def generate_er(n: int, edge_prob: float, seed: int) -> Graph:
    """Erdos-Renyi G(n, p) drawn row by row from a seeded PCG64 stream."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0.0 < edge_prob < 1.0:
        raise ValueError(f"edge_prob must lie in (0, 1), got {edge_prob}")
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n - 1):
        js = np.flatnonzero(rng.random(n - 1 - i) < edge_prob) + i + 1
        rows.append(np.column_stack([np.full(len(js), i), js]))
    return from_edges(np.concatenate(rows), n=n)


# -- attributes ---------------------------------------------------------------

@dataclass(frozen=True)
class Categorical:
    name: str
    levels: tuple[str, ...] | None = None  # None: infer from the data


@dataclass(frozen=True)
class Numeric:
    name: str
    default: float | None = None


@dataclass(frozen=True)
class CategoricalColumn:
    levels: tuple[str, ...]
    codes: np.ndarray

    def proportions(self) -> dict[str, float]:
        counts = np.bincount(self.codes, minlength=len(self.levels))
        return {lev: c / len(self.codes) for lev, c in zip(self.levels, counts)}


@dataclass(frozen=True)
class AttributeTable:
    n: int
    categorical: Mapping[str, CategoricalColumn] = field(default_factory=dict)
    numeric: Mapping[str, np.ndarray] = field(default_factory=dict)
    skipped_rows: int = 0

    def level_index(self, name: str, level: str) -> int:
        col = self.categorical[name]
        try:
            return col.levels.index(level)
        except ValueError:
            raise KeyError(f"attribute {name!r} has no level {level!r}") from None

    def reindex(self, keep: np.ndarray) -> "AttributeTable":
        """Restrict to the nodes in ``keep`` (new id i <- old id keep[i])."""
        keep = np.asarray(keep)
        return AttributeTable(
            n=len(keep),
            categorical={k: CategoricalColumn(c.levels, c.codes[keep]) for k, c in self.categorical.items()},
            numeric={k: v[keep] for k, v in self.numeric.items()},
        )

    def to_csv(self, labels: Sequence[int], dest) -> None:
        names = list(self.categorical) + list(self.numeric)
        w = csv.writer(dest, lineterminator="\n")
        w.writerow(["id", *names])
        for v in range(self.n):
            row = [int(labels[v])]
            row += [c.levels[c.codes[v]] for c in self.categorical.values()]
            row += [repr(float(x[v])) for x in self.numeric.values()]
            w.writerow(row)


def load_attributes(g: Graph, source, schema: Sequence[Categorical | Numeric],
                    id_column: str = "id", delimiter: str = ",") -> AttributeTable:
    """Read a delimited attribute file with a header row, aligned to ``g``'s dense ids.

    Rows for labels not in the graph are skipped with a warning. Categorical
    attributes missing for a node (no row, or an empty cell) get the
    ``"Not Reported"`` level; numeric ones fall back to the declared default or fail.
    """
    fh, close = _open_text(source)
    try:
        reader = csv.DictReader(fh, delimiter=delimiter)
        if reader.fieldnames is None or id_column not in reader.fieldnames:
            raise GraphFormatError(f"attribute header must contain {id_column!r}")
        missing_cols = [a.name for a in schema if a.name not in reader.fieldnames]
        if missing_cols:
            raise GraphFormatError(f"attribute columns not found: {missing_cols}")
        raw: dict[str, list] = {a.name: [None] * g.n for a in schema}
        id_map = g.id_map
        skipped = 0
        for lineno, row in enumerate(reader, start=2):
            try:
                label = int(row[id_column])
            except (TypeError, ValueError):
                raise GraphFormatError(f"line {lineno}: bad node label {row[id_column]!r}") from None
            v = id_map.get(label)
            if v is None:
                skipped += 1
                continue
            for a in schema:
                cell = (row[a.name] or "").strip()
                raw[a.name][v] = cell if cell else None
    finally:
        if close:
            fh.close()
    if skipped:
        warnings.warn(f"skipped {skipped} attribute row(s) for unknown node labels", stacklevel=2)

    cats: dict[str, CategoricalColumn] = {}
    nums: dict[str, np.ndarray] = {}
    for a in schema:
        vals = raw[a.name]
        if isinstance(a, Categorical):
            if a.levels is not None:
                levels = list(a.levels)
                bad = sorted({x for x in vals if x is not None and x not in levels})
                if bad:
                    raise GraphFormatError(f"attribute {a.name!r}: undeclared level(s) {bad}")
            else:
                levels = list(dict.fromkeys(x for x in vals if x is not None))
            if any(x is None for x in vals) and NOT_REPORTED not in levels:
                levels.append(NOT_REPORTED)
            pos = {lev: i for i, lev in enumerate(levels)}
            codes = np.array([pos[NOT_REPORTED if x is None else x] for x in vals], dtype=np.int64)
            cats[a.name] = CategoricalColumn(tuple(levels), codes)
        else:
            out = np.empty(g.n)
            for v, x in enumerate(vals):
                if x is None:
                    if a.default is None:
                        raise GraphFormatError(f"numeric attribute {a.name!r} missing for node "
                                               f"{int(g.labels[v])} and no default declared")
                    out[v] = a.default
                else:
                    try:
                        out[v] = float(x)
                    except ValueError:
                        raise GraphFormatError(f"numeric attribute {a.name!r}: bad value {x!r}") from None
            nums[a.name] = out
    return AttributeTable(n=g.n, categorical=cats, numeric=nums, skipped_rows=skipped)


def parse_schema(text: str) -> list[Categorical | Numeric]:
    """Parse ``"sex,race:cat,grade:num=9"``-style declarations (bare names are categorical)."""
    out: list[Categorical | Numeric] = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        name, _, kind = item.partition(":")
        kind, _, default = kind.partition("=")
        if kind in ("", "cat"):
            out.append(Categorical(name))
        elif kind == "num":
            out.append(Numeric(name, float(default) if default else None))
        else:
            raise ValueError(f"unknown attribute kind {kind!r} in {item!r}")
    return out
