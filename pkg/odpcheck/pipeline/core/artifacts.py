from __future__ import annotations

import json
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict

from odpcheck import TOOL_NAME, __version__


class ArtifactStore:
    """
    Debug dumps under <debug_root>/<run_name>/, written only with --debug.

    Inputs with the same file stem (fixtures/a.odps, corpus/a.odps) get
    distinct dump names: the second one is a.2.conform.json and so on.
    """

    def __init__(self, debug_root: Path, run_name: str, enable_debug: bool):
        self.run_name = run_name
        self.debug_dir = (Path(debug_root) / run_name).resolve()
        self.enable_debug = enable_debug
        self._stems: Dict[Path, str] = {}
        self._lock = threading.Lock()
        if enable_debug:
            self.debug_dir.mkdir(parents=True, exist_ok=True)

    def debug_name(self, input_path: Path, suffix: str) -> str:
        key = Path(input_path).resolve()
        with self._lock:
            stem = self._stems.get(key)
            if stem is None:
                taken = set(self._stems.values())
                stem, n = key.stem, 1
                while stem in taken:
                    n += 1
                    stem = f"{key.stem}.{n}"
                self._stems[key] = stem
        return f"{stem}.{suffix}.json"

    def save_debug(self, name: str, payload: Any) -> None:
        if not self.enable_debug:
            return
        doc = {
            "tool": TOOL_NAME,
            "version": __version__,
            "run_name": self.run_name,
            "created_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "payload": payload,
        }
        (self.debug_dir / name).write_text(json.dumps(doc, indent=2, ensure_ascii=False), encoding="utf-8")

    @staticmethod
    def write_text(path: Path, text: str) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
