from __future__ import annotations

import logging
import threading
from pathlib import Path
from typing import Dict, List, Optional

from odpcheck.dsl.parser import read_model
from odpcheck.errors import ModelResolutionError
from odpcheck.metamodel import Model

logger = logging.getLogger(__name__)

MODEL_SUFFIX = ".odpm"


class ModelResolver:
    """
    Finds and parses the model a system or trace claims.

    ``--model`` wins; otherwise each search directory is probed for
    ``<modelRef>.odpm``, then for its lowercase spelling. Two different hits
    are ambiguous. Parsed models are cached per path.
    """

    def __init__(self, explicit: Optional[Path], search_path: List[Path]):
        self.explicit = explicit
        self.search_path = search_path
        self._cache: Dict[Path, Model] = {}
        self._lock = threading.Lock()

    def locate(self, model_ref: str) -> Path:
        if self.explicit is not None:
            return self.explicit
        hits: List[Path] = []
        stems = dict.fromkeys([model_ref, model_ref.lower()])
        for directory in self.search_path:
            for stem in stems:
                candidate = (directory / f"{stem}{MODEL_SUFFIX}").resolve()
                if candidate.is_file() and not any(candidate.samefile(h) for h in hits):
                    hits.append(candidate)
        if not hits:
            searched = ", ".join(str(d) for d in self.search_path) or "no directories"
            raise ModelResolutionError(f"no {model_ref}{MODEL_SUFFIX} found (searched {searched}); pass --model")
        if len(hits) > 1:
            raise ModelResolutionError(f"model {model_ref} is ambiguous: {', '.join(map(str, hits))}")
        return hits[0]

    def load(self, path: Path) -> Model:
        with self._lock:
            if path in self._cache:
                return self._cache[path]
        try:
            text = path.read_text(encoding="utf-8-sig")
        except OSError as err:
            raise ModelResolutionError(f"cannot read model {path}: {err}") from err
        result = read_model(text, str(path))
        for d in result.report.warnings:
            logger.warning("%s: %s", d.span, d.message)
        if not result.ok:
            raise ModelResolutionError(f"model {path} does not parse:\n{result.report}")
        with self._lock:
            self._cache[path] = result.value
        logger.debug("model %s loaded from %s", result.value.name, path)
        return result.value

    def resolve(self, model_ref: str) -> Model:
        model = self.load(self.locate(model_ref))
        if self.explicit is None and model.name != model_ref:
            raise ModelResolutionError(f"{model_ref}{MODEL_SUFFIX} declares model {model.name}")
        return model
