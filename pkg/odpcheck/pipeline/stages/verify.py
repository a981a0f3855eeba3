from __future__ import annotations

from odpcheck.dynamics.trace import Trace
from odpcheck.dynamics.verify import verify_trace

from ..core.artifacts import ArtifactStore
from ..core.config import CliConfig
from ..core.context import InputResult, RunContext
from ..core.executor_provider import ExecutorProvider
from ..core.progress import ProgressReporter


class VerifyStage:
    NAME = "verify"

    def run(
        self,
        ctx: RunContext,
        cfg: CliConfig,
        store: ArtifactStore,
        progress: ProgressReporter,
        *,
        executor: ExecutorProvider,
    ) -> RunContext:
        items = [i for i in ctx.usable() if isinstance(i.value, Trace) and i.model is not None]
        task = progress.start("Verifying traces", total=len(items))

        def process(item: InputResult):
            item.violations.extend(verify_trace(item.model, item.value))

        executor.map_ordered(process, items, on_done=lambda: progress.advance(task))
        progress.finish(task)
        ctx.add_stats(self.NAME, traces=len(items))
        return ctx
