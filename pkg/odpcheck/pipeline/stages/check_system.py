from __future__ import annotations

from odpcheck.checks.wellformed import check_system_wf, check_trace_wf
from odpcheck.dynamics.trace import Trace
from odpcheck.instance import System

from ..core.artifacts import ArtifactStore
from ..core.config import CliConfig
from ..core.context import InputResult, RunContext
from ..core.executor_provider import ExecutorProvider
from ..core.progress import ProgressReporter


class CheckSystemStage:
    """I-rules on systems, and on every snapshot and step of a trace."""

    NAME = "check_system"

    def run(
        self,
        ctx: RunContext,
        cfg: CliConfig,
        store: ArtifactStore,
        progress: ProgressReporter,
        *,
        executor: ExecutorProvider,
    ) -> RunContext:
        items = [i for i in ctx.usable() if isinstance(i.value, (System, Trace))]
        task = progress.start("Checking systems", total=len(items))

        def process(item: InputResult):
            check = check_trace_wf if isinstance(item.value, Trace) else check_system_wf
            item.violations.extend(check(item.value))

        executor.map_ordered(process, items, on_done=lambda: progress.advance(task))
        progress.finish(task)
        ctx.add_stats(self.NAME, inputs=len(items))
        return ctx
