from __future__ import annotations

from odpcheck.engineering.checks import check_engineering

from ..core.artifacts import ArtifactStore
from ..core.config import CliConfig
from ..core.context import RunContext
from ..core.executor_provider import ExecutorProvider
from ..core.progress import ProgressReporter


class EngineeringStage:
    NAME = "engineering"

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
        task = progress.start("Engineering rules", total=len(items))
        for item in items:
            item.violations.extend(check_engineering(item.value, item.model))
            progress.advance(task)
        progress.finish(task)
        ctx.add_stats(self.NAME, systems=len(items))
        return ctx
