#!/usr/bin/env python3
"""
CLI entry point for the spaced-module analysis pipeline.

Given a matrix presentation of a module over an aggregate, the pipeline
computes triangular bases, classifies the basis morphisms, builds the layer
poset and the arrow graph, checks every necessary condition for the
existence of a multiplicative basis and, when they all hold, rescales the
reduced normed basis into a multiplicative one of rank at most 2.

Subcommands:

* ``analyze``   run every check, no synthesis;
* ``normalize`` run every check and emit the multiplicative basis;
* ``certify``   list all weight functions of the rescaling system with residuals;
* ``verify``    re-check a ``normalize`` result from its JSON alone;
* ``witness``   build an infinite family and test its members pairwise.

The JSON result goes to stdout (or ``--output``), diagnostics to stderr.
Exit codes: 0 all checks pass, 2 certified violation, 1 unusable input or
configuration.

Usage examples:

```bash
python main.py analyze data/presentations/two_step.json
python main.py normalize data/presentations/one_double.json --mode symbolic
python main.py certify data/presentations/two_step.json --field F7
python main.py witness --family two_step_pair --params 0,1,2
```
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.utils.config import ConfigError, Settings, load_settings
from src.utils.logging import get_logger
from src.utils.run_context import (
    append_notes_log,
    ensure_directories,
    init_run,
    update_manifest,
)


@dataclass
class RunContext:
    settings: Settings
    run_id: str
    run_dir: Path
    manifest: Dict[str, Any]
    logs_root: Path
    logger: Any


def _start_run(base_dir: Path, args: argparse.Namespace) -> Optional[RunContext]:
    """Load settings with the CLI overrides, open the run directory and logger."""
    ensure_directories(base_dir)
    config_dir = Path(args.config_dir) if args.config_dir else base_dir / "config"
    try:
        settings = load_settings(config_dir).with_overrides(
            mode=args.mode, field=args.field, seed=args.seed
        )
    except (ConfigError, FileNotFoundError) as exc:
        print(f"Error loading configuration: {exc}", file=sys.stderr)
        return None
    logs_root = Path(args.logs_dir) if args.logs_dir else base_dir / "logs"
    input_path = Path(args.input) if getattr(args, "input", None) else None
    run_id, run_dir, manifest = init_run(
        args.command,
        logs_root,
        input_path=input_path,
        mode=settings.mode,
        field=settings.field,
        seed=settings.seed,
    )
    logger = get_logger(run_id, run_dir, log_level=settings.log_level)
    logger.info("Initialising %s run %s", args.command, run_id)
    return RunContext(settings, run_id, run_dir, manifest, logs_root, logger)


def _finish(ctx: RunContext, args: argparse.Namespace, data: Dict[str, Any], markdown: str, code: int, summary: str) -> int:
    from src.pipeline.report import write_report

    write_report(markdown, ctx.run_dir / "report.md")
    update_manifest(ctx.run_dir, ctx.manifest, exit_code=code)
    append_notes_log(
        logs_root=ctx.logs_root,
        run_id=ctx.run_id,
        started_at=ctx.manifest["started_at"],
        command=args.command,
        summary=summary,
    )
    text = json.dumps(data, indent=2, ensure_ascii=False)
    if args.output:
        out = Path(args.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text + "\n", encoding="utf-8")
        print(f"Result written to {out}", file=sys.stderr)
    else:
        print(text)
    ctx.logger.info("%s finished with exit code %d: %s", args.command, code, summary)
    return code


def _fail(ctx: RunContext, message: str) -> int:
    print(f"Error: {message}", file=sys.stderr)
    ctx.logger.error(message)
    update_manifest(ctx.run_dir, ctx.manifest, exit_code=1, error=message)
    return 1


def _load_presentation(ctx: RunContext, path: Path):
    """Read, parse and move a presentation to the configured field."""
    from src.algebra.scalars import FieldSpec
    from src.pipeline.presentation import change_field, parse

    raw = path.read_bytes()
    p = parse(raw)
    if ctx.settings.field:
        p = change_field(p, FieldSpec.from_label(ctx.settings.field))
    if p.field.is_prime_field and p.field.p > ctx.settings.fp_max_modulus:
        raise ValueError(f"prime {p.field.p} exceeds fp_max_modulus {ctx.settings.fp_max_modulus}")
    return p


def run_pipeline_command(base_dir: Path, args: argparse.Namespace) -> int:
    """
    Execute ``analyze``, ``normalize`` or ``certify`` on one presentation.

    Returns
    -------
    int
        The report's exit code, or 1 when input or configuration is unusable.
    """
    from src.pipeline.presentation import PresentationFormatError
    from src.pipeline.report import render_markdown
    from src.pipeline.runner import run_pipeline

    ctx = _start_run(base_dir, args)
    if ctx is None:
        return 1
    path = Path(args.input)
    try:
        p = _load_presentation(ctx, path)
    except OSError as exc:
        return _fail(ctx, f"cannot read {path}: {exc}")
    except (PresentationFormatError, ValueError) as exc:
        return _fail(ctx, f"invalid presentation {path}: {exc}")
    ctx.logger.info("Loaded %s: %d object(s) over %s", path, len(p.objects), p.field.label)
    report = run_pipeline(
        p,
        command=args.command,
        mode=ctx.settings.mode,
        max_product_length=ctx.settings.max_product_length,
        input_path=str(path),
        logger_=ctx.logger,
    )
    code = report.exit_code
    data = report.model_dump(mode="json")
    data["exit_code"] = code
    statuses = ", ".join(f"{s.name}={s.status}" for s in report.stages)
    return _finish(ctx, args, data, render_markdown(report), code, statuses)


def run_verify(base_dir: Path, args: argparse.Namespace) -> int:
    """Re-check a ``normalize`` result; exit 0 when it is accepted, 2 otherwise."""
    from src.pipeline.runner import verify_normalized

    ctx = _start_run(base_dir, args)
    if ctx is None:
        return 1
    path = Path(args.input)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
        result = verify_normalized(document, ctx.settings.max_product_length)
    except OSError as exc:
        return _fail(ctx, f"cannot read {path}: {exc}")
    except (ValueError, KeyError) as exc:
        return _fail(ctx, f"cannot verify {path}: {exc}")
    code = 0 if result.accepted else 2
    data = result.model_dump(mode="json")
    data["accepted"] = result.accepted
    data["exit_code"] = code
    lines = [
        "# Verification report",
        "",
        f"- Input: {path}",
        f"- Accepted: {result.accepted}",
        f"- Multiplicative: {result.multiplicative} (rank {result.rank})",
        f"- Exact re-check: {result.exact}",
        "",
    ]
    lines.extend(f"- {problem}" for problem in result.problems)
    return _finish(ctx, args, data, "\n".join(lines), code, f"accepted={result.accepted}")


def run_witness(base_dir: Path, args: argparse.Namespace) -> int:
    """
    Build a witness family at the requested parameters and compare them.

    Without ``--input`` the family's default context is used. Exit code 0
    means every pair of distinct parameters gave nonisomorphic spaces.
    """
    from src.algebra.scalars import FieldSpec, ScalarFormatError
    from src.pipeline.presentation import PresentationFormatError
    from src.pipeline.report import render_witness_markdown
    from src.pipeline.triangular import triangulate
    from src.pipeline.witnesses import ContextMismatch, ScaleExceeded, family_context, run_family

    ctx = _start_run(base_dir, args)
    if ctx is None:
        return 1
    params = [x.strip() for x in args.params.split(",") if x.strip()]
    if not params:
        return _fail(ctx, "--params needs at least one value")
    objects = [x.strip() for x in args.objects.split(",")] if args.objects else None
    try:
        layers = [int(x) for x in args.layers.split(",")] if args.layers else None
    except ValueError:
        return _fail(ctx, f"--layers must be integers, got {args.layers!r}")
    try:
        if args.input:
            tri = triangulate(_load_presentation(ctx, Path(args.input)), ctx.logger)
            if not tri.complete:
                return _fail(ctx, "the context presentation has no triangular basis")
            context = tri.presentation
        else:
            spec = FieldSpec.from_label(ctx.settings.field) if ctx.settings.field else None
            context = family_context(args.family, spec)
        report = run_family(
            args.family,
            params,
            context,
            objects=objects,
            layers=layers,
            seed=ctx.settings.seed,
            trials=ctx.settings.random_trials,
            max_space_dim=ctx.settings.max_space_dim,
            max_target_dim=ctx.settings.max_target_dim,
            exhaustive_limit=ctx.settings.exhaustive_limit,
            logger_=ctx.logger,
        )
    except OSError as exc:
        return _fail(ctx, f"cannot read {args.input}: {exc}")
    except (ContextMismatch, ScaleExceeded, ScalarFormatError, PresentationFormatError, ValueError) as exc:
        return _fail(ctx, str(exc))
    code = 0 if report.all_distinct else 2
    data = report.model_dump(mode="json")
    data["all_distinct"] = report.all_distinct
    data["exit_code"] = code
    summary = f"{args.family}: {len(report.spaces)} space(s), all distinct={report.all_distinct}"
    return _finish(ctx, args, data, render_witness_markdown(report), code, summary)


def _common_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=["numeric", "symbolic", "prime"], default=None, help="Rescaling mode (overrides settings).")
    p.add_argument("--field", default=None, help="Field override such as Q or F5.")
    p.add_argument("--seed", type=int, default=None, help="Seed for the randomised isomorphism trials.")
    p.add_argument("--output", default=None, help="Write the JSON result to this file instead of stdout.")
    p.add_argument("--logs-dir", default=None, help="Root of the run logs (default: <repo>/logs).")
    p.add_argument("--config-dir", default=None, help="Directory holding settings.json (default: <repo>/config).")


def build_parser() -> argparse.ArgumentParser:
    from src.pipeline.witnesses import FAMILIES

    parser = argparse.ArgumentParser(
        description="Multiplicative bases of finitely spaced modules.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("analyze", "Run every check on a presentation."),
        ("normalize", "Run every check and emit a multiplicative basis."),
        ("certify", "List the weight functions of the rescaling system."),
        ("verify", "Re-check the JSON result of normalize."),
    ):
        p = sub.add_parser(name, help=text, formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        p.add_argument("input", help="Presentation document (or normalize result for verify).")
        _common_options(p)
    p = sub.add_parser("witness", help="Build a witness family and test it.", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--family", required=True, choices=sorted(FAMILIES), help="Family kind.")
    p.add_argument("--params", required=True, help="Comma-separated parameter values, e.g. 0,1,2.")
    p.add_argument("--objects", default=None, help="Comma-separated context objects in family order.")
    p.add_argument("--layers", default=None, help="Comma-separated layer indices, e.g. 3,1.")
    p.add_argument("--input", default=None, help="Context presentation (default: the family's own).")
    _common_options(p)
    return parser


def main(argv: List[str] | None = None) -> int:
    """
    Main entry point invoked by the command line.

    Parameters
    ----------
    argv : list of str, optional
        Command-line arguments; defaults to ``sys.argv[1:]``.

    Returns
    -------
    int
        Exit status code.
    """
    args = build_parser().parse_args(argv)
    base_dir = Path(__file__).resolve().parent
    if args.command == "witness":
        return run_witness(base_dir, args)
    if args.command == "verify":
        return run_verify(base_dir, args)
    return run_pipeline_command(base_dir, args)


if __name__ == "__main__":
    sys.exit(main())
