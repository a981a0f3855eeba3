from __future__ import annotations

import logging

from odpcheck.errors import ModelResolutionError

from ..core.artifacts import ArtifactStore
from ..core.config import CliConfig
from ..core.context import RunContext
from ..core.executor_provider import ExecutorProvider
from ..core.progress import ProgressReporter
from ..core.resolver import ModelResolver

logger = logging.getLogger(__name__)


class ResolveModelStage:
    NAME = "resolve_model"

    def __init__(self, resolver: ModelResolver):
        self.resolver = resolver

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
        task = progress.start("Resolving models", total=len(items))
        for item in items:
            try:
                item.model = self.resolver.resolve(item.value.model_ref)
            except ModelResolutionError as err:
                item.error = str(err)
                logger.error("%s: %s", item.path, err)
            progress.advance(task)
        progress.finish(task)
        ctx.add_stats(self.NAME, resolved=sum(1 for i in items if i.model is not None))
        return ctx
