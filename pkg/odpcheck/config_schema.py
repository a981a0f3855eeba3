from __future__ import annotations

import json
import logging
import os
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

# --- TOML/YAML loaders --------------------------------------------------------
try:
    import tomllib as _toml  # Python 3.11+
except Exception:
    _toml = None
try:
    import toml as _toml_backport
except Exception:
    _toml_backport = None
try:
    import yaml as _yaml
except Exception:
    _yaml = None

logger = logging.getLogger(__name__)

MODEL_PATH_ENV = "ODPCHECK_MODEL_PATH"
MAX_WORKERS_ENV = "ODPCHECK_MAX_WORKERS"


# =============================================================================
# CONFIG MODELS
# =============================================================================

class IOConfig(BaseModel):
    # Directories searched for <modelRef>.odpm when --model is not given
    model_path: List[str] = Field(default_factory=list)
    # Debug dumps land under <debug_dir>/<run_name>/
    debug_dir: str = "debug"
    run_name: Optional[str] = None


class ReportConfig(BaseModel):
    format: str = "text"  # text | json
    rules: List[str] = Field(default_factory=list)


class SimulateConfig(BaseModel):
    steps: int = 10
    seed: int = 0


class ConformanceConfig(BaseModel):
    # Reads the cardinality rule literally: fewer links than the upper bound is a violation
    paper_literal_c6: bool = False


class RuntimeConfig(BaseModel):
    debug: bool = False
    progress: bool = False
    executor_max_workers: Optional[int] = None


class PresetsConfig(BaseModel):
    """Stage list per command."""

    named: Dict[str, List[str]] = {
        "check-model": ["parse", "check_model"],
        "check-system": ["parse", "check_system"],
        "conform": ["parse", "resolve_model", "conform", "engineering"],
        "simulate": ["parse", "resolve_model", "simulate"],
        "verify-trace": ["parse", "resolve_model", "check_system", "verify"],
        "fmt": ["parse", "fmt"],
    }


class AppConfig(BaseModel):
    io: IOConfig = IOConfig()
    report: ReportConfig = ReportConfig()
    simulate: SimulateConfig = SimulateConfig()
    conformance: ConformanceConfig = ConformanceConfig()
    runtime: RuntimeConfig = RuntimeConfig()
    presets: PresetsConfig = PresetsConfig()


# =============================================================================
# LOAD & NORMALIZE
# =============================================================================

def _load_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8-sig")
    except UnicodeDecodeError as e:
        raise ValueError(f"Could not read {path} as UTF-8.") from e


def _parse_config_text(text: str, suffix: str) -> dict:
    if suffix == ".json":
        return json.loads(text)
    if suffix == ".toml":
        if _toml:
            return _toml.loads(text)
        if _toml_backport:
            return _toml_backport.loads(text)
        raise RuntimeError("TOML requested but no tomllib/toml available. Install 'toml'.")
    if suffix in (".yaml", ".yml"):
        if not _yaml:
            raise RuntimeError("YAML requested but PyYAML not installed. Install 'pyyaml'.")
        return _yaml.safe_load(text)
    return json.loads(text)


def _apply_environment(raw: dict) -> dict:
    """Environment values fill in what the file leaves unset."""
    io = raw.setdefault("io", {}) or {}
    env_path = os.getenv(MODEL_PATH_ENV, "").strip()
    if env_path and not io.get("model_path"):
        io["model_path"] = [p for p in env_path.split(os.pathsep) if p]
    runtime = raw.setdefault("runtime", {}) or {}
    env_workers = os.getenv(MAX_WORKERS_ENV, "").strip()
    if env_workers.isdigit() and runtime.get("executor_max_workers") is None:
        runtime["executor_max_workers"] = int(env_workers)
    raw["io"], raw["runtime"] = io, runtime
    return raw


def load_config(path_like: Optional[str]) -> AppConfig:
    raw: dict = {}
    if path_like:
        p = Path(path_like)
        if not p.exists():
            raise FileNotFoundError(f"Config file not found: {path_like}")
        raw = _parse_config_text(_load_text(p), p.suffix.lower()) or {}
        logger.debug("loaded config %s", p)
    return AppConfig(**_apply_environment(raw))
