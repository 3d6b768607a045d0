"""Command-line front end.

Exit codes: 0 success, 1 when ``--fail-on`` is triggered, 2 on usage,
parse or validation errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import io
from .engine import EvaluationContext, Result
from .graph import GraphError, LogModel
from .knowledge import Category, CategoryMismatch, KnowledgeBase, Selector
from .status import SecurityStatus

EXIT_OK, EXIT_FINDINGS, EXIT_ERROR = 0, 1, 2


class CliError(Exception):
    pass


def parse_disclosure(text: str) -> tuple[Category, Selector]:
    """``category:selector``, e.g. ``sw-malicious:vertex=4``."""
    category, sep, selector = text.partition(":")
    if not sep:
        raise CliError(f"disclosure must look like category:selector, got {text!r}")
    try:
        cat, sel = Category(category), Selector.parse(selector)
    except ValueError as exc:
        raise CliError(f"bad disclosure {text!r}: {exc}") from None
    if cat.is_host and sel.kind == "vertex":
        sel = Selector.host(sel.vertex_id)  # type: ignore[arg-type]
    return cat, sel


def _load_model(path: str) -> LogModel:
    try:
        return io.load_graph(Path(path))
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    except io.FormatError as exc:
        raise CliError(f"{path}: {exc}") from None


def _load_kb(path: Optional[str]) -> KnowledgeBase:
    if path is None:
        return KnowledgeBase()
    try:
        return io.load_knowledge(Path(path))
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    except io.FormatError as exc:
        raise CliError(f"{path}: {exc}") from None


def _evaluate(model: LogModel, kb: KnowledgeBase, target: str) -> Result:
    if target not in model:
        raise CliError(f"unknown target vertex {target!r}")
    return EvaluationContext(model, kb, validate=False).evaluate(target)


def _fails(args: argparse.Namespace, status: SecurityStatus) -> bool:
    threshold = getattr(args, "fail_on", None)
    return threshold is not None and status >= SecurityStatus.parse(threshold)


def run_validate(args: argparse.Namespace) -> tuple[int, str]:
    try:
        model = io.load_graph(Path(args.graph), validate=False)
    except OSError as exc:
        raise CliError(f"cannot read {args.graph}: {exc.strerror}") from None
    except io.ValidationError as exc:
        return EXIT_ERROR, f"{exc.report}\n"
    except io.FormatError as exc:
        raise CliError(f"{args.graph}: {exc}") from None
    report = model.validate()
    return (EXIT_OK if report.ok else EXIT_ERROR), f"{report}\n"


def run_status(args: argparse.Namespace) -> tuple[int, str]:
    model = _load_model(args.graph)
    res = _evaluate(model, _load_kb(args.knowledge), args.target)
    text = io.render_for(res.status, model.vertex(args.target).kind)
    return (EXIT_FINDINGS if _fails(args, res.status) else EXIT_OK), text + "\n"


def run_report(args: argparse.Namespace) -> tuple[int, str]:
    model = _load_model(args.graph)
    kb = _load_kb(args.knowledge)
    res = _evaluate(model, kb, args.target)
    report = io.export_report(res, model, args.target, kb)
    return (EXIT_FINDINGS if _fails(args, res.status) else EXIT_OK), io.report_json(report)


def _diff_lines(before: Result, after: Result) -> list[str]:
    lines = []
    for name, old, new in zip(io.SET_NAMES, before.sets, after.sets):
        added = io.sorted_ids(new - old)
        removed = io.sorted_ids(old - new)
        if added or removed:
            parts = [f"+{x}" for x in added] + [f"-{x}" for x in removed]
            lines.append(f"  {name}: {' '.join(parts)}")
    return lines


def run_what_if(args: argparse.Namespace) -> tuple[int, str]:
    model = _load_model(args.graph)
    kb = _load_kb(args.knowledge)
    before = _evaluate(model, kb, args.target)
    changed = kb
    for text in args.disclose or []:
        category, sel = parse_disclosure(text)
        try:
            changed = changed.add(category, sel)
        except CategoryMismatch as exc:
            raise CliError(str(exc)) from None
    after = _evaluate(model, changed, args.target)
    kind = model.vertex(args.target).kind
    out = [
        f"target: {args.target}",
        f"before: {io.render_for(before.status, kind)}",
        f"after: {io.render_for(after.status, kind)}",
    ]
    diff = _diff_lines(before, after)
    if diff or before.status != after.status:
        out.append("changes:")
        out.extend(diff or ["  (status only)"])
    else:
        out.append("no change")
    return (EXIT_FINDINGS if _fails(args, after.status) else EXIT_OK), "\n".join(out) + "\n"


def run_dot(args: argparse.Namespace) -> tuple[int, str]:
    model = _load_model(args.graph)
    results = None
    if args.knowledge is not None or args.target is not None:
        kb = _load_kb(args.knowledge)
        if args.target is not None:
            results = {args.target: _evaluate(model, kb, args.target)}
        else:
            ctx = EvaluationContext(model, kb, validate=False)
            results = {vid: ctx.evaluate(vid) for vid in model.vertices}
    return EXIT_OK, io.export_dot(model, results)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainlog",
        description="Validate supply-chain log models and propagate security status.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, target: bool, knowledge: bool = True) -> None:
        p.add_argument("graph", help="graph document (.lm.json)")
        if target:
            p.add_argument("target", help="vertex id to evaluate")
        if knowledge:
            p.add_argument("-k", "--knowledge", help="knowledge document (default: empty)")
        p.add_argument("-o", "--out", help="write output here instead of stdout")

    def fail_on(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--fail-on",
            choices=["vulnerable", "malicious"],
            help="exit 1 when the target status reaches this level",
        )

    p = sub.add_parser("validate", help="check graph invariants")
    common(p, target=False, knowledge=False)
    p.set_defaults(func=run_validate)

    p = sub.add_parser("status", help="print the status of one vertex")
    common(p, target=True)
    fail_on(p)
    p.set_defaults(func=run_status)

    p = sub.add_parser("report", help="status plus contributing elements, as JSON")
    common(p, target=True)
    fail_on(p)
    p.set_defaults(func=run_report)

    p = sub.add_parser("what-if", help="compare results before and after extra disclosures")
    common(p, target=True)
    p.add_argument(
        "-d",
        "--disclose",
        action="append",
        metavar="CATEGORY:SELECTOR",
        help="e.g. sw-malicious:vertex=4 or sw-vulnerable:identity=name@version (repeatable)",
    )
    fail_on(p)
    p.set_defaults(func=run_what_if)

    p = sub.add_parser("dot", help="export the graph as DOT")
    common(p, target=False)
    p.add_argument("-t", "--target", help="style from this vertex's evaluation only")
    p.set_defaults(func=run_dot)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, text = args.func(args)
    except (CliError, GraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
