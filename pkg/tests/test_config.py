from __future__ import annotations

import os
from pathlib import Path

import pytest

from conftest import ROOT
from odpcheck.checks.rules import RuleId
from odpcheck.config_schema import MAX_WORKERS_ENV, MODEL_PATH_ENV, AppConfig, load_config
from odpcheck.errors import UsageError
from odpcheck.pipeline.core.config import CliConfig, Command, ReportFormat


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    monkeypatch.delenv(MODEL_PATH_ENV, raising=False)
    monkeypatch.delenv(MAX_WORKERS_ENV, raising=False)


def test_defaults_without_a_file():
    app = load_config(None)
    assert app == AppConfig()
    assert app.io.model_path == []
    assert app.presets.named["conform"] == ["parse", "resolve_model", "conform", "engineering"]


def test_shipped_config_file():
    app = load_config(str(ROOT / "config.toml"))
    assert app.io.model_path == ["corpus"]
    assert app.runtime.executor_max_workers == 4
    assert app.presets.named["verify-trace"] == ["parse", "resolve_model", "check_system", "verify"]


def test_missing_config_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(str(tmp_path / "absent.toml"))


def test_json_config(tmp_path):
    path = tmp_path / "odp.json"
    path.write_text('{"report": {"format": "json", "rules": ["C6"]}}', encoding="utf-8")
    app = load_config(str(path))
    assert app.report.format == "json"
    assert app.report.rules == ["C6"]


def test_environment_fills_unset_values(monkeypatch, tmp_path):
    monkeypatch.setenv(MODEL_PATH_ENV, f"models{os.pathsep}more")
    monkeypatch.setenv(MAX_WORKERS_ENV, "3")
    app = load_config(None)
    assert app.io.model_path == ["models", "more"]
    assert app.runtime.executor_max_workers == 3


def test_file_wins_over_environment(monkeypatch):
    monkeypatch.setenv(MODEL_PATH_ENV, "elsewhere")
    monkeypatch.setenv(MAX_WORKERS_ENV, "9")
    app = load_config(str(ROOT / "config.toml"))
    assert app.io.model_path == ["corpus"]
    assert app.runtime.executor_max_workers == 4


def _cli(command, **overrides):
    overrides.setdefault("input_paths", [Path("x.odps")])
    return CliConfig.from_app(AppConfig(), command, **overrides)


def test_flags_win_over_the_config():
    cfg = _cli(Command.CONFORM, format="json", rule_filter="c6, s1")
    assert cfg.format is ReportFormat.JSON
    assert cfg.rule_filter == frozenset({RuleId.C6, RuleId.S1})
    assert cfg.stages == ["parse", "resolve_model", "conform", "engineering"]
    assert cfg.run_name == "conform"


def test_simulate_takes_defaults_from_the_config():
    cfg = _cli(Command.SIMULATE)
    assert (cfg.effective_steps, cfg.effective_seed) == (10, 0)
    assert _cli(Command.SIMULATE, seed=5, steps=3).effective_seed == 5


@pytest.mark.parametrize(
    "command, overrides, fragment",
    [
        (Command.CONFORM, {"seed": 1}, "only valid with simulate"),
        (Command.VERIFY_TRACE, {"output": Path("t.odpt")}, "only valid with simulate"),
        (Command.SIMULATE, {"input_paths": [Path("a.odps"), Path("b.odps")]}, "exactly one"),
        (Command.SIMULATE, {"format": "json"}, "needs --output"),
        (Command.SIMULATE, {"steps": -1}, "must not be negative"),
        (Command.CHECK_MODEL, {"check_only": True}, "only valid with fmt"),
        (Command.CHECK_MODEL, {"input_paths": []}, "at least one input"),
        (Command.CONFORM, {"rule_filter": "C6,Z9"}, "unknown rule id Z9"),
    ],
)
def test_usage_errors(command, overrides, fragment):
    with pytest.raises(UsageError) as info:
        _cli(command, **overrides)
    assert fragment in str(info.value)


def test_rule_ids_parse_case_insensitively():
    assert RuleId.parse_list(" w1,,E5 ") == frozenset({RuleId.W1, RuleId.E5})
