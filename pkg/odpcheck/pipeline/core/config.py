from __future__ import annotations

from enum import Enum
from pathlib import Path
from typing import FrozenSet, List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from odpcheck.checks.rules import RuleId
from odpcheck.config_schema import AppConfig
from odpcheck.errors import UsageError


class Command(str, Enum):
    CHECK_MODEL = "check-model"
    CHECK_SYSTEM = "check-system"
    CONFORM = "conform"
    SIMULATE = "simulate"
    VERIFY_TRACE = "verify-trace"
    FMT = "fmt"


class ReportFormat(str, Enum):
    TEXT = "text"
    JSON = "json"


class CliConfig(BaseModel):
    """
    Runtime config resolved from the command line and the AppConfig.

    Flags win over the config file, which wins over the environment.
    """

    model_config = ConfigDict(frozen=True, protected_namespaces=())

    command: Command
    input_paths: List[Path]
    model: Optional[Path] = None
    model_search_path: List[Path] = Field(default_factory=list)
    format: ReportFormat = ReportFormat.TEXT
    rule_filter: Optional[FrozenSet[RuleId]] = None
    seed: Optional[int] = None
    steps: Optional[int] = None
    paper_literal_c6: bool = False
    output: Optional[Path] = None
    check_only: bool = False

    stages: List[str] = Field(default_factory=list)
    run_name: str = "run"
    debug: bool = False
    debug_dir: Path = Path("debug")
    progress: bool = False
    executor_max_workers: Optional[int] = None

    @field_validator("rule_filter", mode="before")
    @classmethod
    def _known_rules(cls, value):
        if value is None or isinstance(value, frozenset):
            return value or None
        if isinstance(value, str):
            return RuleId.parse_list(value) or None
        return RuleId.parse_list(",".join(str(v) for v in value)) or None

    @field_validator("input_paths")
    @classmethod
    def _some_inputs(cls, value: List[Path]) -> List[Path]:
        if not value:
            raise ValueError("at least one input file is required")
        return value

    @model_validator(mode="after")
    def _command_flags(self) -> "CliConfig":
        if self.command is not Command.SIMULATE:
            if self.seed is not None or self.steps is not None:
                raise ValueError("--seed and --steps are only valid with simulate")
            if self.output is not None:
                raise ValueError("--output is only valid with simulate")
        else:
            if len(self.input_paths) != 1:
                raise ValueError("simulate takes exactly one system file")
            if self.steps is not None and self.steps < 0:
                raise ValueError("--steps must not be negative")
            if self.format is ReportFormat.JSON and self.output is None:
                raise ValueError("simulate --format json needs --output for the trace")
        if self.check_only and self.command is not Command.FMT:
            raise ValueError("--check is only valid with fmt")
        return self

    @classmethod
    def build(cls, **values) -> "CliConfig":
        """Validates ``values``; any problem is a usage error."""
        try:
            return cls(**values)
        except ValidationError as err:
            problems = "; ".join(e["msg"].removeprefix("Value error, ") for e in err.errors())
            raise UsageError(problems) from None

    @classmethod
    def from_app(cls, app: AppConfig, command: Command, **overrides) -> "CliConfig":
        values = dict(
            command=command,
            model_search_path=[Path(p) for p in app.io.model_path],
            format=app.report.format,
            rule_filter=app.report.rules or None,
            paper_literal_c6=app.conformance.paper_literal_c6,
            stages=app.presets.named.get(command.value, []),
            run_name=app.io.run_name or command.value,
            debug=app.runtime.debug,
            debug_dir=Path(app.io.debug_dir),
            progress=app.runtime.progress,
            executor_max_workers=app.runtime.executor_max_workers,
        )
        if command is Command.SIMULATE:
            values.update(steps=app.simulate.steps, seed=app.simulate.seed)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls.build(**values)

    @property
    def effective_steps(self) -> int:
        return self.steps if self.steps is not None else 10

    @property
    def effective_seed(self) -> int:
        return self.seed if self.seed is not None else 0
