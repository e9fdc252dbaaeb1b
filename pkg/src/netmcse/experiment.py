"""Replicated sampling experiments: config, parallel execution, CSV output, summaries.

Replication CSV columns (fixed order; ``est_*`` and ``se_*`` repeat per feature)::

    replication, kind, seed, termination_step, budget_flag, ess, ratio_stat,
    unique_nodes, acceptance_rate, covered, est_1..est_p, se_1..se_p,
    wallclock, error

``wallclock`` is left blank unless timing is requested, so that a fixed
config and base seed give byte-identical files.
"""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
import yaml

from .features import FeatureSpec, feature_table
from .graph_core import (
    AttributeTable,
    CategoricalColumn,
    Graph,
    generate_er,
    largest_connected_component,
    load_attributes,
    load_edge_list,
    parse_schema,
)
from .mcse import BatchRule
from .oracle import exact_means
from .stopping import StoppingConfig, TerminationReport, run_until_stop
from .walkers import WalkKind

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    graph_path: str | None = None
    er: tuple[int, float, int] | None = None  # (n, edge_prob, seed)
    lcc: bool = True
    attributes_path: str | None = None
    attribute_schema: str | None = None
    synthetic_attribute: tuple[str, float, int] | None = None  # (name, P(level "1"), seed)
    features: str = "degree,cc"
    walks: tuple[WalkKind, ...] = (WalkKind.SRW, WalkKind.MH)
    stopping: StoppingConfig = field(default_factory=StoppingConfig)
    replications: int = 100
    seed: int = 1
    jobs: int = 1
    truth: bool = True
    histogram_bins: int = 0
    record_time: bool = False
    replications_csv: str | None = "replications.csv"
    summary_csv: str | None = "summary.csv"
    histogram_csv: str | None = None

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError("replications must be at least 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        if (self.graph_path is None) == (self.er is None):
            raise ConfigError("give exactly one graph source: a path or an er generator")
        self.walks = tuple(WalkKind.parse(w) for w in self.walks)

    @classmethod
    def from_mapping(cls, doc: Mapping[str, Any]) -> "ExperimentConfig":
        doc = dict(doc or {})
        known = {"graph", "attributes", "features", "walks", "stopping", "replications", "seed",
                 "jobs", "truth", "histogram_bins", "record_time", "output"}
        extra = set(doc) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        kw: dict[str, Any] = {}
        graph = dict(doc.get("graph") or {})
        if "path" in graph:
            kw["graph_path"] = str(graph["path"])
        if "er" in graph:
            er = graph["er"]
            kw["er"] = (int(er["n"]), float(er["p"]), int(er.get("seed", 0)))
        kw["lcc"] = bool(graph.get("lcc", True))
        attrs = dict(doc.get("attributes") or {})
        if "path" in attrs:
            kw["attributes_path"] = str(attrs["path"])
            kw["attribute_schema"] = str(attrs.get("schema", ""))
        if "synthetic" in attrs:
            s = attrs["synthetic"]
            kw["synthetic_attribute"] = (str(s["name"]), float(s["prob"]), int(s.get("seed", 0)))
        if "features" in doc:
            f = doc["features"]
            kw["features"] = f if isinstance(f, str) else ",".join(f)
        if "walks" in doc:
            w = doc["walks"]
            kw["walks"] = tuple([w] if isinstance(w, str) else w)
        if "stopping" in doc:
            st = dict(doc["stopping"] or {})
            allowed = {f.name for f in fields(StoppingConfig)}
            bad = set(st) - allowed
            if bad:
                raise ConfigError(f"unknown stopping keys: {sorted(bad)}")
            if "batch_rule" in st:
                st["batch_rule"] = BatchRule(st["batch_rule"])
            for k in ("m_star", "check_interval", "max_steps", "burn_in"):
                if k in st:
                    st[k] = int(st[k])
            kw["stopping"] = StoppingConfig(**st)
        for k in ("replications", "seed", "jobs", "histogram_bins"):
            if k in doc:
                kw[k] = int(doc[k])
        for k in ("truth", "record_time"):
            if k in doc:
                kw[k] = bool(doc[k])
        out = dict(doc.get("output") or {})
        for key, attr in (("replications", "replications_csv"), ("summary", "summary_csv"),
                          ("histogram", "histogram_csv")):
            if key in out:
                kw[attr] = out[key]
        try:
            return cls(**kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
        if doc is not None and not isinstance(doc, Mapping):
            raise ConfigError("config must be a mapping")
        return cls.from_mapping(doc or {})


def synthetic_binary_attribute(g: Graph, name: str, prob: float, seed: int) -> AttributeTable:
    """Independent Bernoulli(prob) labels "1"/"0" per node."""
    codes = (np.random.default_rng(seed).random(g.n) < prob).astype(np.int64)
    return AttributeTable(g.n, categorical={name: CategoricalColumn(("0", "1"), codes)})


def build_inputs(cfg: ExperimentConfig) -> tuple[Graph, AttributeTable | None]:
    if cfg.er is not None:
        g = generate_er(*cfg.er)
    else:
        g = load_edge_list(cfg.graph_path)
    if cfg.lcc:
        g, _ = largest_connected_component(g)
    attrs = None
    if cfg.synthetic_attribute is not None:
        attrs = synthetic_binary_attribute(g, *cfg.synthetic_attribute)
    elif cfg.attributes_path is not None:
        attrs = load_attributes(g, cfg.attributes_path, parse_schema(cfg.attribute_schema or ""))
    return g, attrs


# -- execution ---------------------------------------------------------------------

_WORKER: dict[str, Any] = {}


def _init_worker(payload):
    _WORKER.clear()
    _WORKER.update(payload)


def _run_task(task: tuple[int, WalkKind, int]):
    r, kind, seed = task
    w = _WORKER
    try:
        rep = run_until_stop(w["g"], kind, w["spec"], w["cfg"], seed, truth=w["truth"],
                             attrs=w["attrs"], tables=w["tables"][kind])
        return r, kind, seed, rep, None
    except Exception as exc:  # noqa: BLE001 - recorded per row
        return r, kind, seed, None, f"{type(exc).__name__}: {exc}"


@dataclass
class ExperimentResult:
    names: list[str]
    walks: tuple[WalkKind, ...]
    rows: list[tuple[int, WalkKind, int, TerminationReport | None, str | None]]
    truth: np.ndarray | None


def run_experiment(cfg: ExperimentConfig, g: Graph | None = None,
                   attrs: AttributeTable | None = None) -> ExperimentResult:
    if g is None:
        g, attrs = build_inputs(cfg)
    spec = FeatureSpec.parse(cfg.features)
    for kind in cfg.walks:
        spec.validate(attrs, require_degree_first=kind is WalkKind.SRW)
    truth = exact_means(g, spec, attrs) if cfg.truth else None
    h = feature_table(spec, g, attrs)
    tables = {WalkKind.MH: (h, None)}
    if WalkKind.SRW in cfg.walks:
        tables[WalkKind.SRW] = (h, feature_table(spec, g, attrs, transformed=True))
    payload = dict(g=g, spec=spec, cfg=cfg.stopping, truth=truth, attrs=attrs, tables=tables)
    tasks = [(r, kind, cfg.seed + r) for r in range(cfg.replications) for kind in cfg.walks]
    if cfg.jobs == 1:
        _init_worker(payload)
        rows = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=cfg.jobs, initializer=_init_worker,
                                 initargs=(payload,)) as pool:
            rows = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (8 * cfg.jobs))))
    failures = sum(1 for row in rows if row[4] is not None)
    if failures:
        logger.warning("%d of %d replication(s) failed; summaries use the successes", failures, len(rows))
    return ExperimentResult(spec.names, cfg.walks, rows, truth)


# -- output ------------------------------------------------------------------------

def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return "" if math.isnan(x) else repr(x)


def report_header(p: int) -> list[str]:
    return (["replication", "kind", "seed", "termination_step", "budget_flag", "ess", "ratio_stat",
             "unique_nodes", "acceptance_rate", "covered"]
            + [f"est_{j + 1}" for j in range(p)] + [f"se_{j + 1}" for j in range(p)]
            + ["wallclock", "error"])


def report_row(replication: int, kind: WalkKind, seed: int, rep: TerminationReport | None, p: int,
               error: str | None = None, record_time: bool = False) -> list[str]:
    if rep is None:
        return [str(replication), kind.value, str(seed)] + [""] * (len(report_header(p)) - 4) + [error or ""]
    return ([str(replication), kind.value, str(seed), fmt(rep.termination_step), fmt(rep.budget_terminated),
             fmt(rep.ess), fmt(rep.ratio_stat), fmt(rep.unique_nodes), fmt(rep.acceptance_rate),
             fmt(rep.covered)]
            + [fmt(x) for x in rep.estimates] + [fmt(x) for x in rep.std_errors]
            + [fmt(rep.wallclock) if record_time else "", error or ""])


def write_replications(result: ExperimentResult, dest, record_time: bool = False) -> None:
    p = len(result.names)
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(report_header(p))
    for r, kind, seed, rep, err in result.rows:
        w.writerow(report_row(r, kind, seed, rep, p, err, record_time))


@dataclass(frozen=True)
class SummaryRow:
    kind: WalkKind
    metric: str
    mean: float
    se: float
    n: int


def _mean_se(values: Sequence[float]) -> tuple[float, float, int]:
    v = np.asarray([x for x in values if x is not None and not math.isnan(float(x))], dtype=np.float64)
    if len(v) == 0:
        return math.nan, math.nan, 0
    se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else math.nan
    return float(v.mean()), se, len(v)


def summarize(result: ExperimentResult) -> list[SummaryRow]:
    """Mean and standard error (sd / sqrt(R)) across successful replications, per walk."""
    out: list[SummaryRow] = []
    for kind in result.walks:
        reps = [row[3] for row in result.rows if row[1] is kind and row[3] is not None]
        metrics: list[tuple[str, list]] = [
            (name, [rp.estimates[j] for rp in reps]) for j, name in enumerate(result.names)]
        metrics += [
            ("termination_step", [rp.termination_step for rp in reps]),
            ("ess", [rp.ess for rp in reps]),
            ("unique_nodes", [rp.unique_nodes for rp in reps]),
            ("ratio_stat", [rp.ratio_stat for rp in reps]),
            ("budget_terminated", [float(rp.budget_terminated) for rp in reps]),
        ]
        if result.truth is not None:
            metrics.append(("coverage", [None if rp.covered is None else float(rp.covered) for rp in reps]))
        if kind is WalkKind.MH:
            metrics.append(("acceptance_rate", [rp.acceptance_rate for rp in reps]))
        for name, vals in metrics:
            mean, se, n = _mean_se(vals)
            out.append(SummaryRow(kind, name, mean, se, n))
    return out


def write_summary(rows: Iterable[SummaryRow], dest) -> None:
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(["kind", "metric", "mean", "se", "n"])
    for s in rows:
        w.writerow([s.kind.value, s.metric, fmt(s.mean), fmt(s.se), s.n])


def _cell(mean: float, se: float) -> str:
    if math.isnan(mean):
        return "-"
    spec = ".2f" if abs(mean) >= 100 else ".4f"
    if math.isnan(se):
        return format(mean, spec)
    return f"{mean:{spec}} ({se:{spec}})"


def format_table(result: ExperimentResult, rows: Sequence[SummaryRow]) -> str:
    """Text table in the 'mean (se)' style, one line per walk plus the truth."""
    metrics = list(dict.fromkeys(s.metric for s in rows))
    by = {(s.kind, s.metric): s for s in rows}
    header = ["Type", *metrics]
    body = []
    if result.truth is not None:
        body.append(["Truth", *[f"{x:.4f}" for x in result.truth]]
                    + ["" for _ in metrics[len(result.names):]])
    for kind in result.walks:
        line = [kind.name]
        for m in metrics:
            s = by.get((kind, m))
            line.append(_cell(s.mean, s.se) if s else "")
        body.append(line)
    widths = [max(len(r[i]) for r in [header, *body]) for i in range(len(header))]
    fmt_line = lambda r: "  ".join(c.rjust(w) for c, w in zip(r, widths))  # noqa: E731
    n_reps = max((s.n for s in rows), default=0)
    return "\n".join([fmt_line(header), *map(fmt_line, body),
                      f"Replications = {n_reps}; standard errors in parentheses."])


def histograms(result: ExperimentResult, bins: int) -> list[tuple[str, str, float, float, int]]:
    out = []
    for kind in result.walks:
        reps = [row[3] for row in result.rows if row[1] is kind and row[3] is not None]
        if not reps:
            continue
        est = np.array([rp.estimates for rp in reps])
        for j, name in enumerate(result.names):
            counts, edges = np.histogram(est[:, j], bins=bins)
            out += [(kind.value, name, float(edges[i]), float(edges[i + 1]), int(counts[i]))
                    for i in range(bins)]
    return out


def write_histograms(hist, dest) -> None:
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(["kind", "metric", "bin_lo", "bin_hi", "count"])
    for kind, name, lo, hi, c in hist:
        w.writerow([kind, name, fmt(lo), fmt(hi), c])


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    kw = {k: v for k, v in kw.items() if v is not None}
    return replace(cfg, **kw) if kw else cfg

