from __future__ import annotations

import json
from typing import Any, Dict

from odpcheck import TOOL_NAME, __version__
from odpcheck.checks.conformance import Verdict

from ..core.config import CliConfig, Command
from ..core.context import InputResult, RunContext

ERROR_VERDICT = "ERROR"


def _kind(item: InputResult) -> str:
    return type(item.value).__name__.lower() if item.value is not None else "unknown"


def verdict_of(ctx: RunContext, cfg: CliConfig) -> str:
    if ctx.any_error:
        return ERROR_VERDICT
    changed = cfg.command is Command.FMT and cfg.check_only and any(i.changed for i in ctx.inputs)
    return (Verdict.VIOLATES if ctx.violations() or changed else Verdict.CONFORMS).value


class JSONExporter:
    def document(self, ctx: RunContext, cfg: CliConfig) -> Dict[str, Any]:
        inputs = []
        for item in ctx.inputs:
            entry: Dict[str, Any] = {"path": str(item.path), "kind": _kind(item), "error": item.error}
            if cfg.command is Command.FMT:
                entry["changed"] = item.changed
            inputs.append(entry)
        return {
            "tool": TOOL_NAME,
            "version": __version__,
            "command": cfg.command.value,
            "inputs": inputs,
            "violations": [
                {**v.to_dict(), "input": str(item.path)} for item in ctx.inputs for v in item.violations
            ],
            "verdict": verdict_of(ctx, cfg),
            "diagnostics": [
                {**d.to_dict(), "input": str(item.path)} for item in ctx.inputs for d in item.diagnostics
            ],
        }

    def render(self, ctx: RunContext, cfg: CliConfig) -> str:
        return json.dumps(self.document(ctx, cfg), indent=2, ensure_ascii=False) + "\n"
