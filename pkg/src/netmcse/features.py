"""Per-node feature vectors and their degree-reweighted form.

A :class:`FeatureSpec` is an ordered tuple of components. ``h(v)`` evaluates
each component at node ``v``; ``h*(v)`` replaces the leading degree by 1 and
divides every entry by the degree, which is what the simple random walk
averages before the ratio correction.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .graph_core import AttributeTable, Graph, NodeStats, clustering_coefficients


@dataclass(frozen=True)
class Degree:
    @property
    def name(self) -> str:
        return "degree"


@dataclass(frozen=True)
class DegreeIndicator:
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("degree threshold must be non-negative")

    @property
    def name(self) -> str:
        return f"deg={self.k}"


@dataclass(frozen=True)
class LocalClustering:
    @property
    def name(self) -> str:
        return "cc"


@dataclass(frozen=True)
class AttributeIndicator:
    attribute: str
    level: str

    @property
    def name(self) -> str:
        return f"{self.attribute}={self.level}"


@dataclass(frozen=True)
class NumericAttribute:
    attribute: str

    @property
    def name(self) -> str:
        return self.attribute


Component = Union[Degree, DegreeIndicator, LocalClustering, AttributeIndicator, NumericAttribute]


class FeatureSpecError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureSpec:
    components: tuple[Component, ...]

    def __post_init__(self):
        if not self.components:
            raise FeatureSpecError("feature spec needs at least one component")

    @property
    def p(self) -> int:
        return len(self.components)

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.components]

    @property
    def degree_first(self) -> bool:
        return isinstance(self.components[0], Degree)

    @classmethod
    def parse(cls, text: str | Sequence[str]) -> "FeatureSpec":
        """Build a spec from descriptors such as ``"degree,deg=10,cc,attr:sex=F,num:grade"``."""
        items = text.split(",") if isinstance(text, str) else list(text)
        comps: list[Component] = []
        for raw in items:
            s = raw.strip()
            if not s:
                continue
            if s == "degree":
                comps.append(Degree())
            elif s in ("cc", "clustering"):
                comps.append(LocalClustering())
            elif s.startswith(("deg=", "degree=")):
                comps.append(DegreeIndicator(int(s.split("=", 1)[1])))
            elif s.startswith("attr:"):
                attr, sep, level = s[5:].partition("=")
                if not sep or not attr:
                    raise FeatureSpecError(f"attribute indicator needs attr:NAME=LEVEL, got {s!r}")
                comps.append(AttributeIndicator(attr, level))
            elif s.startswith("num:"):
                comps.append(NumericAttribute(s[4:]))
            else:
                raise FeatureSpecError(f"unknown feature descriptor {s!r}")
        return cls(tuple(comps))

    def validate(self, attrs: AttributeTable | None = None, require_degree_first: bool = False) -> None:
        if require_degree_first and not self.degree_first:
            raise FeatureSpecError("the first feature must be degree for simple-random-walk estimation")
        for c in self.components:
            if isinstance(c, AttributeIndicator):
                if attrs is None or c.attribute not in attrs.categorical:
                    raise FeatureSpecError(f"no categorical attribute {c.attribute!r}")
                if c.level not in attrs.categorical[c.attribute].levels:
                    raise FeatureSpecError(f"attribute {c.attribute!r} has no level {c.level!r}")
            elif isinstance(c, NumericAttribute):
                if attrs is None or c.attribute not in attrs.numeric:
                    raise FeatureSpecError(f"no numeric attribute {c.attribute!r}")


def _component_value(c: Component, stats: NodeStats, attrs: AttributeTable | None, v: int) -> float:
    if isinstance(c, Degree):
        return float(stats.degree)
    if isinstance(c, DegreeIndicator):
        return float(stats.degree == c.k)
    if isinstance(c, LocalClustering):
        return stats.clustering_coefficient
    if attrs is None:
        raise KeyError(f"feature {c.name!r} needs an attribute table")
    if isinstance(c, AttributeIndicator):
        col = attrs.categorical[c.attribute]
        return float(col.codes[v] == attrs.level_index(c.attribute, c.level))
    return float(attrs.numeric[c.attribute][v])


def evaluate_h(spec: FeatureSpec, stats: NodeStats, attrs: AttributeTable | None, v: int) -> np.ndarray:
    return np.array([_component_value(c, stats, attrs, v) for c in spec.components])


def evaluate_h_star(spec: FeatureSpec, stats: NodeStats, attrs: AttributeTable | None, v: int) -> np.ndarray:
    if not spec.degree_first:
        raise FeatureSpecError("h* requires degree as the first feature")
    if stats.degree == 0:
        raise ZeroDivisionError(f"node {v} has degree 0")
    h = evaluate_h(spec, stats, attrs, v)
    h[0] = 1.0
    return h / stats.degree


def feature_table(spec: FeatureSpec, g: Graph, attrs: AttributeTable | None = None,
                  transformed: bool = False) -> np.ndarray:
    """``h`` (or ``h*``) for every node at once, shape (n, p)."""
    d = g.degrees.astype(np.float64)
    cols = []
    for c in spec.components:
        if isinstance(c, Degree):
            cols.append(d)
        elif isinstance(c, DegreeIndicator):
            cols.append((g.degrees == c.k).astype(np.float64))
        elif isinstance(c, LocalClustering):
            cols.append(clustering_coefficients(g))
        elif attrs is None:
            raise KeyError(f"feature {c.name!r} needs an attribute table")
        elif isinstance(c, AttributeIndicator):
            code = attrs.level_index(c.attribute, c.level)
            cols.append((attrs.categorical[c.attribute].codes == code).astype(np.float64))
        else:
            cols.append(np.asarray(attrs.numeric[c.attribute], dtype=np.float64))
    table = np.column_stack(cols)
    if transformed:
        if not spec.degree_first:
            raise FeatureSpecError("h* requires degree as the first feature")
        if (d == 0).any():
            raise ZeroDivisionError("h* undefined on isolated nodes")
        table[:, 0] = 1.0
        table /= d[:, None]
    return np.ascontiguousarray(table)
