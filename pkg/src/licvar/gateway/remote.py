"""Chat-completion HTTP backends and their configuration."""

from __future__ import annotations

import configparser
import logging
import os
import threading
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Mapping

import httpx
import numpy as np

from licvar.errors import BackendError, TransportError
from licvar.gateway.backend import CountingBackend

log = logging.getLogger(__name__)

_ENV_KEYS = {
    "endpoint": "LICVAR_ENDPOINT",
    "model": "LICVAR_MODEL",
    "api_key": "LICVAR_API_KEY",
    "max_in_flight": "LICVAR_MAX_IN_FLIGHT",
    "timeout": "LICVAR_TIMEOUT",
    "max_retries": "LICVAR_MAX_RETRIES",
    "embedding_model": "LICVAR_EMBEDDING_MODEL",
}


@dataclass(frozen=True)
class RemoteConfig:
    endpoint: str = ""
    model: str = ""
    api_key: str = ""
    max_in_flight: int = 4
    timeout: float = 60.0
    max_retries: int = 4
    backoff_base: float = 0.5
    embedding_model: str = ""

    @classmethod
    def load(
        cls, path: str | Path | None = None, env: Mapping[str, str] | None = None
    ) -> RemoteConfig:
        """Read the ``[licvar]`` section of an INI file, then let the environment override."""
        env = os.environ if env is None else env
        values: dict[str, Any] = {}
        if path is not None:
            parser = configparser.ConfigParser()
            if not parser.read(path, encoding="utf-8"):
                raise BackendError(f"cannot read config file {path}")
            if parser.has_section("licvar"):
                values.update(parser["licvar"])
        for key, var in _ENV_KEYS.items():
            if env.get(var):
                values[key] = env[var]
        cfg = cls()
        typed: dict[str, Any] = {}
        for key, raw in values.items():
            if not hasattr(cfg, key):
                continue
            current = getattr(cfg, key)
            try:
                typed[key] = type(current)(raw)
            except ValueError:
                raise BackendError(f"config key {key}: cannot parse {raw!r}") from None
        return replace(cfg, **typed)


class _Transport:
    """Shared HTTP plumbing: bounded concurrency, retries with exponential backoff."""

    def __init__(self, cfg: RemoteConfig, client: httpx.Client | None = None):
        if not cfg.endpoint:
            raise BackendError("remote backend needs an endpoint (LICVAR_ENDPOINT)")
        self.cfg = cfg
        self._slots = threading.BoundedSemaphore(max(1, cfg.max_in_flight))
        headers = {"Authorization": f"Bearer {cfg.api_key}"} if cfg.api_key else {}
        self._client = client or httpx.Client(timeout=cfg.timeout, headers=headers)

    def post(self, path: str, payload: dict[str, Any]) -> dict[str, Any]:
        url = self.cfg.endpoint.rstrip("/") + path
        last: Exception | None = None
        retry_after: float | None = None
        for attempt in range(1, self.cfg.max_retries + 2):
            with self._slots:
                try:
                    resp = self._client.post(url, json=payload)
                except httpx.TransportError as exc:
                    last, retry_after = exc, None
                else:
                    if resp.status_code == 429 or resp.status_code >= 500:
                        last = BackendError(f"HTTP {resp.status_code}")
                        retry_after = _retry_after(resp)
                    elif resp.status_code >= 400:
                        raise BackendError(f"HTTP {resp.status_code}: {resp.text[:200]}")
                    else:
                        return resp.json()
            if attempt > self.cfg.max_retries:
                break
            delay = retry_after if retry_after is not None else self.cfg.backoff_base * 2 ** (attempt - 1)
            log.warning("request to %s failed (%s); retry %d in %.1fs", url, last, attempt, delay)
            time.sleep(delay)
        raise TransportError(
            f"{url} unreachable after {self.cfg.max_retries + 1} attempts: {last}",
            attempts=self.cfg.max_retries + 1,
            retry_after=retry_after,
        )


def _retry_after(resp: httpx.Response) -> float | None:
    raw = resp.headers.get("retry-after")
    try:
        return float(raw) if raw is not None else None
    except ValueError:
        return None


class RemoteReasoner(CountingBackend):
    """Instruction-following model behind an OpenAI-style chat-completions endpoint."""

    def __init__(self, cfg: RemoteConfig, client: httpx.Client | None = None):
        super().__init__(f"remote:{cfg.model or 'default'}")
        self._transport = _Transport(cfg, client)
        self.cfg = cfg

    def _complete(self, task: str, prompt: str, request: Any) -> str:
        payload = {
            "model": self.cfg.model,
            "temperature": 0,
            "messages": [{"role": "user", "content": prompt}],
        }
        data = self._transport.post("/chat/completions", payload)
        try:
            return str(data["choices"][0]["message"]["content"])
        except (KeyError, IndexError, TypeError):
            return ""  # treated as a malformed reply by the gateway


class RemoteEmbedder:
    """Embedding model behind an OpenAI-style embeddings endpoint."""

    def __init__(self, cfg: RemoteConfig, dimension: int, client: httpx.Client | None = None):
        self._transport = _Transport(cfg, client)
        self.cfg = cfg
        self.dimension = dimension
        self.name = f"remote:{cfg.embedding_model or cfg.model}-{dimension}"

    def embed(self, text: str) -> np.ndarray:
        if not text.strip():
            return np.zeros(self.dimension)
        data = self._transport.post(
            "/embeddings", {"model": self.cfg.embedding_model or self.cfg.model, "input": text}
        )
        try:
            vec = np.asarray(data["data"][0]["embedding"], dtype=np.float64)
        except (KeyError, IndexError, TypeError, ValueError):
            raise BackendError("embedding response missing data[0].embedding") from None
        if vec.shape != (self.dimension,):
            raise BackendError(f"expected {self.dimension} dimensions, got {vec.shape}")
        norm = float(np.linalg.norm(vec))
        return vec / norm if norm else vec
