from __future__ import annotations

import logging
from typing import Dict, Optional

from rich.console import Console
from rich.progress import BarColumn, MofNCompleteColumn, Progress, SpinnerColumn, TaskID, TextColumn, TimeElapsedColumn

logger = logging.getLogger(__name__)


class ProgressReporter:
    """One task per stage: start it with the number of inputs, advance once per input."""

    def __enter__(self) -> "ProgressReporter":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.close()

    def start(self, description: str, total: Optional[int] = None) -> int:
        return 0

    def advance(self, task: int, step: int = 1) -> None:
        pass

    def finish(self, task: int) -> None:
        pass

    def close(self) -> None:
        pass


NoopProgressReporter = ProgressReporter


class RichProgressReporter(ProgressReporter):
    """Transient bars on stderr, so reports on stdout stay clean."""

    def __init__(self, console: Optional[Console] = None):
        self._bars = Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            MofNCompleteColumn(),
            TimeElapsedColumn(),
            console=console or Console(stderr=True),
            transient=True,
        )
        self._open = False
        self._labels: Dict[TaskID, str] = {}

    def __enter__(self) -> "RichProgressReporter":
        self._bars.start()
        self._open = True
        return self

    def start(self, description: str, total: Optional[int] = None) -> TaskID:
        task = self._bars.add_task(description, total=total)
        self._labels[task] = description
        return task

    def advance(self, task: TaskID, step: int = 1) -> None:
        self._bars.advance(task, step)

    def finish(self, task: TaskID) -> None:
        state = self._bars.tasks[task]
        if state.total is not None:
            self._bars.update(task, completed=state.total)
        logger.debug("%s: %d done in %.2fs", self._labels.pop(task, "?"), state.completed, state.elapsed or 0.0)

    def close(self) -> None:
        if self._open:
            self._bars.stop()
            self._open = False
