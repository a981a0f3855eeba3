from __future__ import annotations

import logging
from typing import Tuple, Type

from odpcheck.dsl.parser import read_any
from odpcheck.dsl.spans import Severity
from odpcheck.dynamics.trace import Trace
from odpcheck.instance import System
from odpcheck.metamodel import Model

from ..core.artifacts import ArtifactStore
from ..core.config import CliConfig, Command
from ..core.context import InputResult, RunContext
from ..core.executor_provider import ExecutorProvider
from ..core.progress import ProgressReporter

logger = logging.getLogger(__name__)

EXPECTED: dict = {
    Command.CHECK_MODEL: (Model,),
    Command.CHECK_SYSTEM: (System, Trace),
    Command.CONFORM: (System,),
    Command.SIMULATE: (System,),
    Command.VERIFY_TRACE: (Trace,),
    Command.FMT: (Model, System, Trace),
}

_KIND_NAMES = {Model: "model", System: "system", Trace: "trace"}


def _kinds(types: Tuple[Type, ...]) -> str:
    return " or ".join(_KIND_NAMES[t] for t in types)


class ParseStage:
    NAME = "parse"

    def _parse(self, item: InputResult, expected: Tuple[Type, ...], store: ArtifactStore) -> None:
        try:
            text = item.path.read_text(encoding="utf-8-sig")
        except OSError as err:
            item.error = f"cannot read {item.path}: {err.strerror or err}"
            return
        result = read_any(text, str(item.path))
        item.diagnostics.extend(result.report.entries)
        for d in result.report.entries:
            log = logger.error if d.severity is Severity.ERROR else logger.warning
            log("%s: %s", d.span, d.message)
        if not result.ok:
            item.error = f"{item.path} does not parse ({len(result.report.errors)} errors)"
            return
        if not isinstance(result.value, expected):
            found = _KIND_NAMES[type(result.value)]
            item.error = f"{item.path} holds a {found}; this command expects a {_kinds(expected)}"
            return
        item.value = result.value
        store.save_debug(
            store.debug_name(item.path, "parsed"),
            {"path": str(item.path), "kind": _KIND_NAMES[type(item.value)], "name": item.value.name,
             "diagnostics": [d.to_dict() for d in item.diagnostics]},
        )

    def run(
        self,
        ctx: RunContext,
        cfg: CliConfig,
        store: ArtifactStore,
        progress: ProgressReporter,
        *,
        executor: ExecutorProvider,
    ) -> RunContext:
        if not ctx.inputs:
            ctx.inputs = [InputResult(path=p) for p in cfg.input_paths]
        expected = EXPECTED[cfg.command]
        task = progress.start("Parsing", total=len(ctx.inputs))
        executor.map_ordered(lambda item: self._parse(item, expected, store), ctx.inputs, on_done=lambda: progress.advance(task))
        progress.finish(task)
        ctx.add_stats(self.NAME, files=len(ctx.inputs), failed=sum(1 for i in ctx.inputs if i.failed))
        return ctx
