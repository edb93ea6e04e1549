"""Command-line interface: info, rewrite, derive and check workflows.

Exit codes are a stable contract: 0 success (check: no violation), 1 check
found a violation, 2 graph parse error, 3 structural-condition or c-degree
error, 4 cost guard tripped, 5 distribution error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .constraints import (
    ConditionsError,
    DeriveOptions,
    derive_all,
    evaluate,
    report_to_json,
    result_to_json,
)
from .fixtures import write_examples
from .graph import GraphParseError, load_graph, validate_conditions
from .independence import enumerate_ci
from .response import ColumnLimitError
from .tables import TableError, load_table
from .transform import (
    RewriteError,
    hlp_add_edge,
    merge_district_latents,
    normalize,
    replace_latent_with_edges,
    strong_face_split,
)

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_PARSE = 2
EXIT_CONDITIONS = 3
EXIT_COST = 4
EXIT_TABLE = 5


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="obscon",
        description="Derive and test the observable constraints of hidden-variable causal DAGs.",
    )
    parser.add_argument(
        "--emit-examples",
        metavar="DIR",
        help="write the bundled example graphs and distributions to DIR and exit",
    )
    sub = parser.add_subparsers(dest="command")

    p_info = sub.add_parser("info", help="print variables, conditions, districts and CIs")
    p_info.add_argument("graph")
    p_info.add_argument("--max-ci-size", type=int, default=None)

    p_rewrite = sub.add_parser("rewrite", help="apply a graph rewrite and print the result")
    p_rewrite.add_argument("graph")
    group = p_rewrite.add_mutually_exclusive_group(required=True)
    group.add_argument("--normalize", action="store_true")
    group.add_argument("--merge-latents", action="store_true")
    group.add_argument("--hlp", nargs=2, metavar=("W1", "W2"))
    group.add_argument("--replace", metavar="U")
    group.add_argument("--face-split", nargs="+", metavar="U")
    p_rewrite.add_argument("--c-set", nargs="+", default=[], metavar="C")
    p_rewrite.add_argument("--d-set", nargs="+", default=[], metavar="D")

    p_derive = sub.add_parser("derive", help="derive the constraint set")
    p_derive.add_argument("graph")
    p_derive.add_argument("-o", "--output", default="-", help="output path ('-' = stdout)")
    p_derive.add_argument("--format", choices=("json", "cdd"), default="json",
                          help="JSON derivation record, or the conventional "
                               "polyhedral text format for cross-checking")
    p_derive.add_argument("--merge", action="store_true",
                          help="merge multi-latent districts first (valid but possibly incomplete)")
    p_derive.add_argument("--max-ci-size", type=int, default=None)
    p_derive.add_argument("--column-limit", type=int, default=10_000_000)
    p_derive.add_argument("--jobs", type=int, default=1)
    p_derive.add_argument("--timings", action="store_true")
    p_derive.add_argument("--seed", type=int, default=None,
                          help="recorded in output metadata")

    p_check = sub.add_parser("check", help="evaluate a distribution against the constraints")
    p_check.add_argument("graph")
    p_check.add_argument("table")
    p_check.add_argument("--merge", action="store_true")
    p_check.add_argument("--max-ci-size", type=int, default=None)
    p_check.add_argument("--column-limit", type=int, default=10_000_000)
    p_check.add_argument("--jobs", type=int, default=1)
    p_check.add_argument("--tolerance", default=None,
                         help="slack for (in)equality checks, e.g. 1/1000000 or 1e-9")
    p_check.add_argument("--json", dest="json_path", default=None,
                         help="also write the machine-readable report here")
    return parser


def _load(path: str):
    try:
        return load_graph(path)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_PARSE)
    except GraphParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_PARSE)


def cmd_info(args) -> int:
    dag = _load(args.graph)
    obs = " ".join(f"{v.name}({v.cardinality})" for v in dag.variables if v.observed)
    lat = " ".join(dag.latent_names()) or "none"
    print(f"variables: {obs}")
    print(f"latents: {lat}")
    report = validate_conditions(dag)
    for line in report.lines():
        print(line)
    districts = dag.districts()
    rendered = ", ".join(
        "{%s} (c=%d)" % (",".join(d.members), d.c_degree) for d in districts
    )
    print(f"districts: {rendered}")
    statements = enumerate_ci(dag, args.max_ci_size)
    if statements:
        print("ci:")
        for stmt in statements:
            print(f"  {stmt.render()}")
    else:
        print("ci: none")
    if not report.ok:
        print("hint: run 'obscon rewrite --normalize' first", file=sys.stderr)
        return EXIT_CONDITIONS
    return EXIT_OK


def cmd_rewrite(args) -> int:
    dag = _load(args.graph)
    try:
        if args.normalize:
            out, log = normalize(dag)
        elif args.merge_latents:
            out, log = merge_district_latents(dag)
        elif args.hlp:
            out, log = hlp_add_edge(dag, args.hlp[0], args.hlp[1]), None
        elif args.replace:
            if not args.c_set or not args.d_set:
                print("error: --replace needs --c-set and --d-set", file=sys.stderr)
                return EXIT_PARSE
            out = replace_latent_with_edges(
                dag, args.replace, set(args.c_set), set(args.d_set)
            )
            log = None
        else:
            out, log = strong_face_split(dag, args.face_split), None
    except (RewriteError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONDITIONS
    sys.stdout.write(out.to_text())
    if log is not None:
        for line in log.lines():
            print(line, file=sys.stderr)
    return EXIT_OK


def _derive(args):
    dag = _load(args.graph)
    options = DeriveOptions(
        merge=args.merge,
        max_ci_size=args.max_ci_size,
        column_limit=args.column_limit,
        jobs=args.jobs,
        timings=getattr(args, "timings", False),
        seed=getattr(args, "seed", None),
    )
    try:
        result = derive_all(dag, options)
    except ConditionsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_CONDITIONS)
    except ColumnLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_COST)
    return dag, result


def cmd_derive(args) -> int:
    dag, result = _derive(args)
    if args.format == "cdd":
        chunks = []
        for record in result.districts:
            if record.hrep is None:
                continue
            chunks.append("* district {%s}" % ",".join(record.members))
            chunks.append(record.hrep.to_cdd().rstrip("\n"))
        payload = "\n".join(chunks) + "\n"
    else:
        payload = json.dumps(result_to_json(result, dag), indent=2) + "\n"
    if args.output == "-":
        print(result.summary(), file=sys.stderr)
        sys.stdout.write(payload)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(payload)
        print(result.summary())
    ci = len(result.ci_statements)
    print(f"ci statements: {ci}", file=sys.stderr if args.output == "-" else sys.stdout)
    return EXIT_OK


def cmd_check(args) -> int:
    dag, result = _derive(args)
    try:
        table = load_table(args.table, dag)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TABLE
    except TableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TABLE
    tolerance = None
    if args.tolerance is not None:
        try:
            tolerance = Fraction(args.tolerance)
        except ValueError:
            print(f"error: cannot parse tolerance {args.tolerance!r}", file=sys.stderr)
            return EXIT_TABLE
    report = evaluate(result, dag, table, tolerance)
    for line in report.lines():
        print(line)
    if args.json_path:
        with open(args.json_path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(report_to_json(report), indent=2) + "\n")
    return EXIT_VIOLATED if report.falsified else EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.emit_examples:
        for path in write_examples(args.emit_examples):
            print(path)
        return EXIT_OK
    if not args.command:
        parser.print_help()
        return EXIT_PARSE
    handler = {
        "info": cmd_info,
        "rewrite": cmd_rewrite,
        "derive": cmd_derive,
        "check": cmd_check,
    }[args.command]
    try:
        return handler(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
