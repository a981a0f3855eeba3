from __future__ import annotations

from odpcheck.checks.conformance import conform

from ..core.artifacts import ArtifactStore
from ..core.config import CliConfig
from ..core.context import InputResult, RunContext
from ..core.executor_provider import ExecutorProvider
from ..core.progress import ProgressReporter


class ConformStage:
    NAME = "conform"

    def run(
        self,
        ctx: RunContext,
        cfg: CliConfig,
        store: ArtifactStore,
        progress: ProgressReporter,
        *,
        executor: ExecutorProvider,
    ) -> RunContext:
        items = [i for i in ctx.usable() if i.model is not None]
        task = progress.start("Conformance", total=len(items))

        def process(item: InputResult):
            report = conform(item.value, item.model, paper_literal_c6=cfg.paper_literal_c6)
            item.violations.extend(report.violations)
            store.save_debug(
                store.debug_name(item.path, "conform"),
                {"verdict": report.verdict.value, "violations": [v.to_dict() for v in report.violations]},
            )

        executor.map_ordered(process, items, on_done=lambda: progress.advance(task))
        progress.finish(task)
        ctx.add_stats(self.NAME, systems=len(items))
        return ctx
