"""Command-line entry point: ``credal <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 infeasible query.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bench
from .geometry import InfeasibleError, k_reduction
from .inference import ReductionPolicy, ZeroEvidenceError, credal_ve
from .io import (
    BenchmarkRecord,
    ParseError,
    from_hcredal,
    parse_hcredal,
    read_network,
    serialize_hcredal,
    serialize_vcredal,
    to_hcredal,
    write_benchmark_csv,
)
from .model import ConditionalCredalTable, CredalNetwork, CredalSet, Query, validate_network

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INFEASIBLE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class UsageError(Exception):
    pass


def _evidence(items) -> dict[int, int]:
    out = {}
    for item in items or []:
        var, eq, state = item.partition("=")
        if not eq or not var.strip().isdigit() or not state.strip().isdigit():
            raise UsageError(f"bad evidence {item!r}; expected var=state")
        out[int(var)] = int(state)
    return out


def _load(path) -> CredalNetwork:
    net = read_network(path)
    problems = validate_network(net)
    if problems:
        raise ValueError("; ".join(map(str, problems[:5])))
    return net


def cmd_infer(args) -> int:
    net = _load(args.model)
    q = Query(args.target, _evidence(args.evidence))
    try:
        q.check(net)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.method == "exact":
        policy = ReductionPolicy.exact()
    else:
        if args.k is None:
            raise UsageError("--method k-reduce needs --k")
        policy = ReductionPolicy.k_reduce(args.k, args.metric)
    res = credal_ve(net, q, policy)
    for state, (lo, hi) in enumerate(res.intervals()):
        print(f"P(X{q.target}={state}) in [{lo:.10f}, {hi:.10f}]")
    print(f"method {res.method}, {res.time_ms:.2f} ms")
    if args.csv:
        task = "marginal" if q.is_marginal else "conditional"
        recs = [
            BenchmarkRecord(Path(args.model).stem, task, q.target, dict(q.evidence), res.method, s, lo, hi, res.time_ms)
            for s, (lo, hi) in enumerate(res.intervals())
        ]
        write_benchmark_csv(args.csv, recs)
    return EXIT_OK


def cmd_convert(args) -> int:
    text = Path(args.input).read_text()
    is_h = text.lstrip().startswith("H-CREDAL")
    if args.to == "h":
        net = from_hcredal(parse_hcredal(text)) if is_h else read_network(args.input)
        Path(args.out).write_text(serialize_hcredal(to_hcredal(net)))
    else:
        net = from_hcredal(parse_hcredal(text)) if is_h else read_network(args.input)
        Path(args.out).write_text(serialize_vcredal(net))
    return EXIT_OK


def cmd_generate(args) -> int:
    entries = bench.generate_suite(
        args.out,
        args.n_models,
        args.nodes,
        args.seed,
        max_indegree=args.max_indegree,
        vertex_range=(args.min_vertices, args.max_vertices),
        max_factor_tables=args.max_factor_tables or None,
    )
    print(f"wrote {len(entries)} models and {bench.MANIFEST} to {args.out}")
    return EXIT_OK


def cmd_reduce(args) -> int:
    net = _load(args.input)
    tables = []
    for table in net.tables:
        sets = tuple(CredalSet(k_reduction(cs.vertices, args.k, args.metric)) for cs in table.sets)
        tables.append(ConditionalCredalTable(table.child, table.parents, sets))
    out = CredalNetwork(net.variables, net.dag, tuple(tables))
    text = serialize_vcredal(out)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        try:
            bench.parse_method(m)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    summaries = bench.run_benchmark(
        args.suite, methods, args.out, extern=args.extern or (), metric=args.metric, repeats=args.repeats
    )
    print(bench.format_summary(summaries))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="credal", description="Credal network inference with k-reduction.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("infer", help="lower/upper probabilities of a target variable")
    p.add_argument("--model", required=True)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--evidence", action="append", metavar="VAR=STATE")
    p.add_argument("--method", choices=["exact", "k-reduce"], default="exact")
    p.add_argument("--k", type=int)
    p.add_argument("--metric", choices=["euclidean", "sym-kl"], default="euclidean")
    p.add_argument("--csv", help="also write the result as benchmark CSV")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("convert", help="convert between V- and H-form files")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--to", choices=["v", "h"], required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("generate", help="write a random model suite with a task manifest")
    p.add_argument("--n-models", type=int, required=True)
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--max-indegree", type=int, default=2)
    p.add_argument("--min-vertices", type=int, default=2)
    p.add_argument("--max-vertices", type=int, default=4)
    p.add_argument("--max-factor-tables", type=int, default=256, help="0 disables the tractability filter")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("reduce", help="k-reduce every credal set of a model")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--metric", choices=["euclidean", "sym-kl"], default="euclidean")
    p.add_argument("--out")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("benchmark", help="RMSE / speed-up table against exact CVE")
    p.add_argument("--suite", required=True)
    p.add_argument("--methods", default="exact,k10,k5")
    p.add_argument("--extern", action="append", help="CSV of externally computed results")
    p.add_argument("--metric", choices=["euclidean", "sym-kl"], default="euclidean")
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"credal: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ZeroEvidenceError as exc:
        print(f"credal: infeasible query: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ParseError, InfeasibleError, ValueError, OSError) as exc:
        print(f"credal: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
