from __future__ import annotations

from odpcheck.checks.wellformed import check_model
from odpcheck.metamodel import Model

from ..core.artifacts import ArtifactStore
from ..core.config import CliConfig
from ..core.context import InputResult, RunContext
from ..core.executor_provider import ExecutorProvider
from ..core.progress import ProgressReporter


class CheckModelStage:
    NAME = "check_model"

    def run(
        self,
        ctx: RunContext,
        cfg: CliConfig,
        store: ArtifactStore,
        progress: ProgressReporter,
        *,
        executor: ExecutorProvider,
    ) -> RunContext:
        items = [i for i in ctx.usable() if isinstance(i.value, Model)]
        task = progress.start("Checking models", total=len(items))

        def process(item: InputResult):
            item.violations.extend(check_model(item.value))
            store.save_debug(store.debug_name(item.path, "check_model"), [v.to_dict() for v in item.violations])

        executor.map_ordered(process, items, on_done=lambda: progress.advance(task))
        progress.finish(task)
        ctx.add_stats(self.NAME, models=len(items), violations=sum(len(i.violations) for i in items))
        return ctx
