from __future__ import annotations

from typing import List

from odpcheck.checks.rules import Violation

from ..core.config import CliConfig, Command
from ..core.context import InputResult, RunContext


def violation_line(v: Violation, item: InputResult) -> str:
    where = str(v.span) if v.span is not None else str(item.path)
    return f"{v.rule.value} {where} {','.join(v.subjects)} — {v.message}"


class TextExporter:
    """One line per violation, in checker order, inputs in command-line order."""

    def render(self, ctx: RunContext, cfg: CliConfig) -> str:
        lines: List[str] = []
        for item in ctx.inputs:
            lines.extend(violation_line(v, item) for v in item.violations)
            if cfg.command is Command.FMT and cfg.check_only and item.changed:
                lines.append(f"would reformat {item.path}")
        return "".join(f"{line}\n" for line in lines)
