from __future__ import annotations

from pathlib import Path

import pytest

from odpcheck.dsl.parser import read_any

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
FIXTURES = ROOT / "fixtures"
SCHEMA = ROOT / "docs" / "report.schema.json"

SOURCE_SUFFIXES = (".odpm", ".odps", ".odpt")


def source_files():
    """Every corpus and fixture file the parser should accept."""
    return sorted(p for d in (CORPUS, FIXTURES) for p in d.iterdir() if p.suffix in SOURCE_SUFFIXES)


def load(path: Path):
    result = read_any(path.read_text(encoding="utf-8"), str(path))
    assert result.ok, f"{path} does not parse:\n{result.report}"
    return result.value


def rule_ids(violations):
    return sorted({v.rule.value for v in violations})


@pytest.fixture(scope="session")
def dbms():
    return load(CORPUS / "dbms.odpm")


@pytest.fixture(scope="session")
def dbms_base():
    return load(CORPUS / "dbms_base.odps")


@pytest.fixture(scope="session")
def counter():
    return load(FIXTURES / "Counter.odpm")


@pytest.fixture(scope="session")
def counter_start():
    return load(FIXTURES / "counter_start.odps")
