from __future__ import annotations

import logging

from odpcheck.dsl.serializer import serialize
from odpcheck.dynamics.simulate import simulate
from odpcheck.errors import DynamicsError, InitialNonConforming

from ..core.artifacts import ArtifactStore
from ..core.config import CliConfig
from ..core.context import RunContext
from ..core.executor_provider import ExecutorProvider
from ..core.progress import ProgressReporter

logger = logging.getLogger(__name__)


class SimulateStage:
    NAME = "simulate"

    def run(
        self,
        ctx: RunContext,
        cfg: CliConfig,
        store: ArtifactStore,
        progress: ProgressReporter,
        *,
        executor: ExecutorProvider,
    ) -> RunContext:
        for item in [i for i in ctx.usable() if i.model is not None]:
            task = progress.start(f"Simulating {item.path.name}", total=1)
            try:
                trace = simulate(item.model, item.value, cfg.effective_steps, cfg.effective_seed)
            except InitialNonConforming as err:
                logger.error("%s: %s", item.path, err)
                item.violations.extend(err.report.violations)
                continue
            except DynamicsError as err:
                item.error = f"simulation of {item.path} failed: {err}"
                continue
            finally:
                progress.finish(task)
            item.output_text = serialize(trace)
            if cfg.output is not None:
                store.write_text(cfg.output, item.output_text)
                logger.info("trace with %d steps written to %s", len(trace.steps), cfg.output)
            ctx.add_stats(self.NAME, steps=len(trace.steps), seed=cfg.effective_seed)
        return ctx
