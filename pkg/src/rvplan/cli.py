"""Command-line entry point: ``rvplan {validate,plan,explain,export,bench}``.

Exit codes: 0 success, 1 domain error (validation, coverage, unknown
tenant/RVC, bad bench spec), 2 I/O or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from rvplan.allocation import Mode
from rvplan.explain import UnknownEntity, explain
from rvplan.io import BundleFormatError, BundlePaths, load_bundle
from rvplan.model import Bundle, validate_bundle
from rvplan.pipeline import PlanResult, default_exact_limit, plan
from rvplan.reporting import AssemblyError, export_dot, render_report
from rvplan.simulator import specs_from_json, sweep, write_csv

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_IO = 2


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _add_bundle_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("bundle", nargs="?", help="directory holding catalog.json, template.json, ...")
    p.add_argument("--catalog", type=Path)
    p.add_argument("--template", type=Path, action="append", dest="templates")
    p.add_argument("--registry", type=Path)
    p.add_argument("--functional", type=Path)
    p.add_argument("--deployment", type=Path)


def _bundle_paths(args: argparse.Namespace) -> BundlePaths:
    if args.bundle:
        base = BundlePaths.from_dir(args.bundle)
    else:
        missing = [
            n for n in ("catalog", "templates", "registry", "functional", "deployment")
            if getattr(args, n) is None
        ]
        if missing:
            raise CliError(f"no bundle directory and missing --{', --'.join(missing)}", EXIT_IO)
        base = None
    return BundlePaths(
        catalog=args.catalog or base.catalog,
        templates=tuple(args.templates) if args.templates else base.templates,
        registry=args.registry or base.registry,
        functional=args.functional or base.functional,
        deployment=args.deployment or base.deployment,
    )


def _load_valid(args: argparse.Namespace) -> Bundle:
    try:
        bundle = load_bundle(_bundle_paths(args))
    except BundleFormatError as exc:
        raise CliError(str(exc), EXIT_IO) from exc
    report = validate_bundle(bundle)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if not report.ok:
        for e in report.errors:
            print(f"error: {e}", file=sys.stderr)
        raise CliError(f"{len(report.errors)} validation error(s)", EXIT_DOMAIN)
    return bundle


def _run_plan(bundle: Bundle, mode: str, exact_limit: int | None) -> PlanResult:
    try:
        return plan(bundle, mode=mode, exact_limit=exact_limit)
    except AssemblyError as exc:
        raise CliError(str(exc), EXIT_DOMAIN) from exc
    except ValueError as exc:
        raise CliError(str(exc), EXIT_IO) from exc


def _write(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        out.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"{out}: {exc.strerror or exc}", EXIT_IO) from exc


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        bundle = load_bundle(_bundle_paths(args))
    except BundleFormatError as exc:
        raise CliError(str(exc), EXIT_IO) from exc
    report = validate_bundle(bundle)
    print(report.render())
    return EXIT_OK if report.ok else EXIT_DOMAIN


def cmd_plan(args: argparse.Namespace) -> int:
    bundle = _load_valid(args)
    result = _run_plan(bundle, args.mode, args.exact_limit)
    text = render_report(result.distribution, result.summary, args.format, result.optimality)
    _write(text, args.out)
    return EXIT_OK


def cmd_explain(args: argparse.Namespace) -> int:
    bundle = _load_valid(args)
    result = _run_plan(bundle, args.mode, args.exact_limit)
    try:
        sys.stdout.write(explain(result, bundle, args.tenant, args.rvc))
    except UnknownEntity as exc:
        raise CliError(str(exc), EXIT_DOMAIN) from exc
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    bundle = _load_valid(args)
    result = _run_plan(bundle, Mode.SHARED_POOL.value, 0)
    rp = result.rvcs.get(args.rvc)
    if rp is None:
        raise CliError(f"unknown RVC {args.rvc!r}", EXIT_DOMAIN)
    graph = rp.relationship if args.kind == "relationship" else rp.conflict
    _write(export_dot(graph, args.kind), args.out)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        doc = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError(f"{args.spec}: {exc.strerror or exc}", EXIT_IO) from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"{args.spec}: invalid JSON: {exc}", EXIT_IO) from exc
    try:
        specs = specs_from_json(doc)
    except (TypeError, ValueError) as exc:
        raise CliError(f"invalid bench spec: {exc}", EXIT_DOMAIN) from exc
    limit = args.exact_limit if args.exact_limit is not None else doc.get("exact_limit")
    if limit is None:
        limit = default_exact_limit()
    rows = sweep(specs, exact_limit=int(limit))
    if args.out is None:
        write_csv(rows, sys.stdout)
    else:
        try:
            with open(args.out, "w", newline="", encoding="utf-8") as fp:
                write_csv(rows, fp)
        except OSError as exc:
            raise CliError(f"{args.out}: {exc.strerror or exc}", EXIT_IO) from exc
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rvplan", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a bundle's cross-references")
    _add_bundle_args(p)
    p.set_defaults(func=cmd_validate)

    modes = [m.value for m in Mode]
    p = sub.add_parser("plan", help="compute the instance distribution")
    _add_bundle_args(p)
    p.add_argument("--mode", choices=modes, default=Mode.SHARED_POOL.value)
    p.add_argument("--exact-limit", type=int, default=None, help="default: $RV_EXACT_LIMIT or 12")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("explain", help="trace one tenant's requirements on one RVC")
    _add_bundle_args(p)
    p.add_argument("--tenant", required=True)
    p.add_argument("--rvc", required=True)
    p.add_argument("--mode", choices=modes, default=Mode.SHARED_POOL.value)
    p.add_argument("--exact-limit", type=int, default=0)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("export", help="write a relationship or conflict graph as DOT")
    _add_bundle_args(p)
    p.add_argument("--rvc", required=True)
    p.add_argument("--kind", choices=("relationship", "conflict"), default="relationship")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("bench", help="run a seeded scenario sweep")
    p.add_argument("--spec", type=Path, required=True)
    p.add_argument("--out", type=Path)
    p.add_argument("--exact-limit", type=int, default=None)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"rvplan: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
