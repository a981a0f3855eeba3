from __future__ import annotations

import logging

from odpcheck.dsl.serializer import serialize

from ..core.artifacts import ArtifactStore
from ..core.config import CliConfig
from ..core.context import RunContext
from ..core.executor_provider import ExecutorProvider
from ..core.progress import ProgressReporter

logger = logging.getLogger(__name__)


class FmtStage:
    """Rewrites each input in canonical form; with ``check_only`` nothing is written."""

    NAME = "fmt"

    def run(
        self,
        ctx: RunContext,
        cfg: CliConfig,
        store: ArtifactStore,
        progress: ProgressReporter,
        *,
        executor: ExecutorProvider,
    ) -> RunContext:
        items = ctx.usable()
        task = progress.start("Formatting", total=len(items))
        for item in items:
            item.output_text = serialize(item.value)
            current = item.path.read_text(encoding="utf-8-sig")
            item.changed = current != item.output_text
            if item.changed and not cfg.check_only:
                store.write_text(item.path, item.output_text)
                logger.info("reformatted %s", item.path)
            progress.advance(task)
        progress.finish(task)
        ctx.add_stats(self.NAME, changed=sum(1 for i in items if i.changed))
        return ctx
