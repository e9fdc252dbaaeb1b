"""Command-line entry point: ``netmcse {gen,stats,sample,experiment,miness}``.

Exit status: 0 on success, 1 on usage errors, 2 on runtime errors.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
import warnings

from . import __version__
from ._backend import BACKEND
from .experiment import (
    ConfigError,
    ExperimentConfig,
    format_table,
    histograms,
    report_header,
    report_row,
    run_experiment,
    summarize,
    synthetic_binary_attribute,
    with_overrides,
    write_histograms,
    write_replications,
    write_summary,
)
from .features import FeatureSpec, FeatureSpecError
from .graph_core import (
    generate_er,
    largest_connected_component,
    load_attributes,
    load_edge_list,
    parse_schema,
    write_edge_list,
)
from .mcse import BatchRule, min_ess
from .oracle import exact_means
from .stopping import StoppingConfig, run_until_stop
from .walkers import WalkKind, write_trace

EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _read_graph(args):
    src = sys.stdin.buffer if args.graph == "-" else args.graph
    g = load_edge_list(src)
    if getattr(args, "lcc", False):
        g, keep = largest_connected_component(g)
    return g


def _read_attrs(args, g):
    if args.attrs is None:
        return None
    return load_attributes(g, args.attrs, parse_schema(args.schema or ""), delimiter=args.delimiter)


def _add_graph_args(p):
    p.add_argument("graph", help="edge-list path, or '-' for standard input")
    p.add_argument("--lcc", action="store_true", help="restrict to the largest connected component")
    p.add_argument("--attrs", help="delimited attribute file with a header row")
    p.add_argument("--schema", help="attribute declarations, e.g. 'sex,race,grade:num'")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--features", default="degree,cc",
                   help="comma list of degree, deg=K, cc, attr:NAME=LEVEL, num:NAME")


def cmd_gen(args) -> int:
    if args.er is None:
        raise UsageError("gen needs --er N P")
    n, p = int(args.er[0]), float(args.er[1])
    if n < 2 or not 0 < p < 1:
        raise UsageError("--er needs N >= 2 and 0 < P < 1")
    g = generate_er(n, p, args.seed)
    if args.lcc:
        g, _ = largest_connected_component(g)
    fh, close = _open_out(args.output)
    try:
        write_edge_list(g, fh, original_labels=False)
    finally:
        if close:
            fh.close()
    if args.binary_attr:
        name, _, prob = args.binary_attr.partition(":")
        if not args.attr_out:
            raise UsageError("--binary-attr needs --attr-out")
        table = synthetic_binary_attribute(g, name, float(prob or 0.5), args.seed)
        with open(args.attr_out, "w", encoding="utf-8", newline="") as fh:
            table.to_csv(range(g.n), fh)
    print(f"n={g.n} n_e={g.n_e}", file=sys.stderr if args.output in (None, "-") else sys.stdout)
    return 0


def cmd_stats(args) -> int:
    g = _read_graph(args)
    attrs = _read_attrs(args, g)
    spec = FeatureSpec.parse(args.features)
    spec.validate(attrs)
    means = exact_means(g, spec, attrs)
    print(f"n={g.n} n_e={g.n_e}")
    for name, x in zip(spec.names, means):
        print(f"{name} {round(float(x), args.precision)}")
    if args.csv:
        fh, close = _open_out(args.csv)
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["feature", "mean"])
            for name, x in zip(spec.names, means):
                w.writerow([name, repr(float(x))])
        finally:
            if close:
                fh.close()
    return 0


def _stopping_from_args(args) -> StoppingConfig:
    return StoppingConfig(eps=args.eps, alpha=args.alpha, m_star=args.mstar,
                          check_interval=args.check_interval, max_steps=args.max_steps,
                          batch_rule=BatchRule(args.batch_rule), burn_in=args.burn_in)


def cmd_sample(args) -> int:
    g = _read_graph(args)
    if not g.is_connected():
        raise RuntimeError("graph is not connected; rerun with --lcc")
    attrs = _read_attrs(args, g)
    spec = FeatureSpec.parse(args.features)
    kind = WalkKind.parse(args.walk)
    spec.validate(attrs, require_degree_first=kind is WalkKind.SRW)
    cfg = _stopping_from_args(args)
    truth = exact_means(g, spec, attrs) if args.truth_from_graph else None
    rep = run_until_stop(g, kind, spec, cfg, args.seed, truth=truth, attrs=attrs,
                         keep_trace=args.trace_out is not None)
    status = "budget-terminated" if rep.budget_terminated else "rule-terminated"
    print(f"walk={kind.value} seed={rep.seed} start={int(g.labels[rep.start])} backend={BACKEND}")
    print(f"termination_step={rep.termination_step} ({status}, check_interval={rep.check_interval})")
    print(f"ess={rep.ess:.2f} ratio_stat={rep.ratio_stat:.4f} unique_nodes={rep.unique_nodes}")
    if kind is WalkKind.MH:
        print(f"acceptance_rate={rep.acceptance_rate:.4f}")
    for j, name in enumerate(rep.names):
        line = f"{name} {rep.estimates[j]:.6g} (se {rep.std_errors[j]:.3g})"
        if truth is not None:
            line += f" truth {truth[j]:.6g}"
        print(line)
    if truth is not None:
        print(f"covered={rep.covered}")
    if rep.note:
        print(f"note: {rep.note}")
    if args.csv:
        fh, close = _open_out(args.csv)
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(report_header(rep.p))
            w.writerow(report_row(0, kind, args.seed, rep, rep.p, record_time=True))
        finally:
            if close:
                fh.close()
    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8", newline="") as fh:
            write_trace(rep.trace_nodes, rep.trace_accepted, fh, labels=g.labels)
    return 0


def cmd_experiment(args) -> int:
    try:
        cfg = ExperimentConfig.load(args.config)
    except OSError as exc:
        raise RuntimeError(str(exc)) from exc
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc
    try:
        cfg = with_overrides(cfg, replications=args.replications, seed=args.seed, jobs=args.jobs,
                             replications_csv=args.out, summary_csv=args.summary,
                             histogram_csv=args.hist, histogram_bins=args.hist_bins)
        if args.record_time:
            cfg = with_overrides(cfg, record_time=True)
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc
    result = run_experiment(cfg)
    if cfg.replications_csv:
        fh, close = _open_out(cfg.replications_csv)
        try:
            write_replications(result, fh, record_time=cfg.record_time)
        finally:
            if close:
                fh.close()
    summary = summarize(result)
    if cfg.summary_csv:
        fh, close = _open_out(cfg.summary_csv)
        try:
            write_summary(summary, fh)
        finally:
            if close:
                fh.close()
    if cfg.histogram_bins and cfg.histogram_csv:
        fh, close = _open_out(cfg.histogram_csv)
        try:
            write_histograms(histograms(result, cfg.histogram_bins), fh)
        finally:
            if close:
                fh.close()
    print(format_table(result, summary))
    return 0


def cmd_miness(args) -> int:
    if args.p < 1 or not 0 < args.alpha < 1 or args.eps <= 0:
        raise UsageError("need -p >= 1, 0 < alpha < 1, eps > 0")
    print(min_ess(args.p, args.alpha, args.eps))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="netmcse", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND})")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="write an Erdos-Renyi edge list")
    p.add_argument("--er", nargs=2, metavar=("N", "P"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lcc", action="store_true")
    p.add_argument("-o", "--output", help="edge-list path (default stdout)")
    p.add_argument("--binary-attr", metavar="NAME:PROB", help="also draw a Bernoulli node attribute")
    p.add_argument("--attr-out", help="path for the --binary-attr CSV")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("stats", help="exact population means of the features")
    _add_graph_args(p)
    p.add_argument("--precision", type=int, default=4)
    p.add_argument("--csv", help="also write feature,mean CSV")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("sample", help="one walk run to the stopping rule")
    _add_graph_args(p)
    p.add_argument("--walk", choices=["srw", "mh"], default="srw")
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--mstar", type=int, default=10_000)
    p.add_argument("--check-interval", type=int, default=1_000)
    p.add_argument("--max-steps", type=int, default=10_000_000)
    p.add_argument("--batch-rule", choices=[r.value for r in BatchRule], default="sqrt")
    p.add_argument("--burn-in", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--truth-from-graph", action="store_true",
                   help="compute exact means and report region coverage")
    p.add_argument("--csv", help="write the report as a CSV row")
    p.add_argument("--trace-out", help="write per-step t,node,accepted records")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("experiment", help="replicated runs from a YAML config")
    p.add_argument("config")
    p.add_argument("-R", "--replications", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("-j", "--jobs", type=int)
    p.add_argument("--out", help="replication CSV path")
    p.add_argument("--summary", help="summary CSV path")
    p.add_argument("--hist", help="histogram bin-count CSV path")
    p.add_argument("--hist-bins", type=int)
    p.add_argument("--record-time", action="store_true", help="fill the wallclock column")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("miness", help="minimum effective sample size")
    p.add_argument("-p", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--eps", type=float, default=0.05)
    p.set_defaults(func=cmd_miness)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    warnings.simplefilter("default")
    try:
        return args.func(args)
    except (UsageError, FeatureSpecError) as exc:
        print(f"netmcse {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"netmcse {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
