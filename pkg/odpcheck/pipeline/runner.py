from __future__ import annotations

import logging
import sys
from typing import Dict, Optional, TextIO

from rich.console import Console
from rich.text import Text

from odpcheck.checks.rules import filter_rules
from odpcheck.errors import UsageError

from .core.artifacts import ArtifactStore
from .core.config import CliConfig, Command, ReportFormat
from .core.context import RunContext
from .core.executor_provider import ExecutorProvider
from .core.progress import NoopProgressReporter, ProgressReporter, RichProgressReporter
from .core.resolver import ModelResolver
from .export import JSONExporter, TextExporter
from .stages import (
    CheckModelStage,
    CheckSystemStage,
    ConformStage,
    EngineeringStage,
    FmtStage,
    ParseStage,
    ResolveModelStage,
    SimulateStage,
    VerifyStage,
)

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_VIOLATIONS, EXIT_ERROR = 0, 1, 2


class StepRunner:
    def __init__(
        self,
        config: CliConfig,
        *,
        stdout: Optional[TextIO] = None,
        console: Optional[Console] = None,
    ):
        self.cfg = config
        self.stdout = stdout or sys.stdout
        self.console = console or Console(stderr=True)

        self.store = ArtifactStore(debug_root=config.debug_dir, run_name=config.run_name, enable_debug=config.debug)
        self.executor = ExecutorProvider(max_workers=config.executor_max_workers)
        self.resolver = ModelResolver(config.model, config.model_search_path)

        self.stages: Dict[str, object] = {
            ParseStage.NAME: ParseStage(),
            ResolveModelStage.NAME: ResolveModelStage(self.resolver),
            CheckModelStage.NAME: CheckModelStage(),
            CheckSystemStage.NAME: CheckSystemStage(),
            ConformStage.NAME: ConformStage(),
            EngineeringStage.NAME: EngineeringStage(),
            SimulateStage.NAME: SimulateStage(),
            VerifyStage.NAME: VerifyStage(),
            FmtStage.NAME: FmtStage(),
        }
        unknown = [s for s in config.stages if s not in self.stages]
        if unknown:
            raise UsageError(f"unknown pipeline stages: {', '.join(unknown)}")

        self.text_exporter = TextExporter()
        self.json_exporter = JSONExporter()

    def _progress(self) -> ProgressReporter:
        return RichProgressReporter(self.console) if self.cfg.progress else NoopProgressReporter()

    def execute(self) -> RunContext:
        ctx = RunContext()
        with self._progress() as progress:
            for name in self.cfg.stages:
                ctx = self.stages[name].run(ctx, self.cfg, self.store, progress, executor=self.executor)
        for item in ctx.inputs:
            item.violations = filter_rules(item.violations, self.cfg.rule_filter)
        self.store.save_debug("stats.json", [{"name": s.name, **s.details} for s in ctx.stats])
        return ctx

    def exit_code(self, ctx: RunContext) -> int:
        if ctx.any_error:
            return EXIT_ERROR
        changed = self.cfg.command is Command.FMT and self.cfg.check_only and any(i.changed for i in ctx.inputs)
        return EXIT_VIOLATIONS if ctx.violations() or changed else EXIT_OK

    def run(self) -> int:
        ctx = self.execute()
        for item in ctx.inputs:
            if item.error:
                self.console.print(Text.assemble(("error ", "bold red"), item.error))
        if self.cfg.command is Command.SIMULATE and self.cfg.output is None:
            for item in ctx.inputs:
                if item.output_text:
                    self.stdout.write(item.output_text)
        exporter = self.json_exporter if self.cfg.format is ReportFormat.JSON else self.text_exporter
        self.stdout.write(exporter.render(ctx, self.cfg))
        self.stdout.flush()
        code = self.exit_code(ctx)
        logger.debug("exit %d", code)
        return code
