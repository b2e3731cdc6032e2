"""Base class for reasoning backends: one counted request per completion."""

from __future__ import annotations

import threading
from typing import Any


class CountingBackend:
    """Reasoning backend whose ``call_counter`` grows by one per request.

    Subclasses implement ``_complete``. The counter is bumped before the
    request is attempted, so failed requests are counted too.
    """

    def __init__(self, name: str):
        self.name = name
        self._lock = threading.Lock()
        self._calls = 0
        self._by_task: dict[str, int] = {}

    @property
    def call_counter(self) -> int:
        with self._lock:
            return self._calls

    def calls_by_task(self) -> dict[str, int]:
        with self._lock:
            return dict(self._by_task)

    def complete(self, task: str, prompt: str, request: Any) -> str:
        with self._lock:
            self._calls += 1
            self._by_task[task] = self._by_task.get(task, 0) + 1
        return self._complete(task, prompt, request)

    def _complete(self, task: str, prompt: str, request: Any) -> str:
        raise NotImplementedError
