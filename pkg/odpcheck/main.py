from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from rich.console import Console
from rich.logging import RichHandler

from odpcheck import TOOL_NAME, __version__
from odpcheck.config_schema import load_config
from odpcheck.errors import OdpCheckError, UsageError
from odpcheck.pipeline.core.config import CliConfig, Command
from odpcheck.pipeline.runner import EXIT_ERROR, StepRunner

logger = logging.getLogger(TOOL_NAME)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=str, help="Path to config file (.toml/.json/.yaml)")
    p.add_argument("--format", choices=["text", "json"], default=None, help="Report format (default: text)")
    p.add_argument("--rules", type=str, default=None, help="Comma-separated rule ids to report, e.g. W1,C6")
    p.add_argument("--debug", action="store_true", default=None, help="Verbose logs and debug dumps")
    p.add_argument("--debug-dir", type=str, default=None, help="Override [io].debug_dir")
    p.add_argument("--progress", action="store_true", default=None, help="Show progress bars on stderr")
    p.add_argument("--max-workers", type=int, default=None, help="Thread pool size for multi-file runs")


def _model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", type=str, default=None, help="Model file; skips the search path")
    p.add_argument(
        "--model-path",
        type=str,
        default=None,
        help="Directories searched for <modelRef>.odpm, separated like PATH (default: $ODPCHECK_MODEL_PATH)",
    )


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog=TOOL_NAME,
        description="odp-check: parse, check and animate engineering-viewpoint models and systems.",
    )
    p.add_argument("--version", action="version", version=f"{TOOL_NAME} {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    cm = sub.add_parser(Command.CHECK_MODEL.value, help="Well-formedness of model files (W-rules)")
    cm.add_argument("inputs", nargs="+", metavar="FILE.odpm")
    _common(cm)

    cs = sub.add_parser(Command.CHECK_SYSTEM.value, help="Well-formedness of system or trace files (I-rules)")
    cs.add_argument("inputs", nargs="+", metavar="FILE.odps|FILE.odpt")
    _common(cs)

    co = sub.add_parser(Command.CONFORM.value, help="Conformance of systems to their models (C, S and E rules)")
    co.add_argument("inputs", nargs="+", metavar="FILE.odps")
    co.add_argument("--paper-literal-c6", action="store_true", default=None, help="Literal reading of the cardinality rule")
    _model_flags(co)
    _common(co)

    si = sub.add_parser(Command.SIMULATE.value, help="Seeded random run of the dynamic schemas")
    si.add_argument("inputs", nargs=1, metavar="FILE.odps")
    si.add_argument("--steps", type=int, default=None, help="Maximum number of steps")
    si.add_argument("--seed", type=int, default=None, help="Random seed")
    si.add_argument("--output", type=str, default=None, help="Trace file to write (default: stdout)")
    _model_flags(si)
    _common(si)

    vt = sub.add_parser(Command.VERIFY_TRACE.value, help="Replay traces against their models (D-rules)")
    vt.add_argument("inputs", nargs="+", metavar="FILE.odpt")
    _model_flags(vt)
    _common(vt)

    fm = sub.add_parser(Command.FMT.value, help="Rewrite files in canonical form")
    fm.add_argument("inputs", nargs="+", metavar="FILE")
    fm.add_argument("--check", dest="check_only", action="store_true", default=None, help="Only report files that would change")
    _common(fm)
    return p


def setup_logging(debug: bool) -> None:
    handler = RichHandler(console=Console(stderr=True), show_path=False, markup=False, rich_tracebacks=debug)
    logging.basicConfig(
        level=logging.DEBUG if debug else logging.WARNING,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[handler],
        force=True,
    )


def config_from_args(args: argparse.Namespace) -> CliConfig:
    app = load_config(args.config)
    command = Command(args.command)
    search_path = None
    if getattr(args, "model_path", None):
        search_path = [Path(p) for p in args.model_path.split(os.pathsep) if p]
    return CliConfig.from_app(
        app,
        command,
        input_paths=[Path(p) for p in args.inputs],
        model=Path(args.model) if getattr(args, "model", None) else None,
        model_search_path=search_path,
        format=args.format,
        rule_filter=args.rules,
        seed=getattr(args, "seed", None),
        steps=getattr(args, "steps", None),
        paper_literal_c6=getattr(args, "paper_literal_c6", None),
        output=Path(args.output) if getattr(args, "output", None) else None,
        check_only=getattr(args, "check_only", None),
        debug=args.debug,
        debug_dir=Path(args.debug_dir) if args.debug_dir else None,
        progress=args.progress,
        executor_max_workers=args.max_workers,
    )


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(bool(args.debug))
    try:
        cfg = config_from_args(args)
        setup_logging(cfg.debug)
        code = StepRunner(cfg).run()
    except (UsageError, OdpCheckError, OSError, ValueError, RuntimeError) as err:
        if args.debug:
            logger.exception("%s failed", TOOL_NAME)
        else:
            Console(stderr=True).print(f"{TOOL_NAME}: {err}", markup=False, highlight=False)
        code = EXIT_ERROR
    return code


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
