from __future__ import annotations

import json
from pathlib import Path

import pytest

from licvar import kb as kbmod
from licvar.gateway import Gateway, MockReasoner

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def kb() -> kbmod.KnowledgeBase:
    return kbmod.load()


@pytest.fixture
def gateway(kb):
    """A fresh mock gateway, so call counters start at zero."""
    return Gateway(MockReasoner(kb), kb.default_embedder())


@pytest.fixture(scope="session")
def variants() -> list[dict]:
    entries = json.loads((FIXTURES / "variants" / "manifest.json").read_text())["variants"]
    for entry in entries:
        entry["text"] = (FIXTURES / "variants" / entry["file"]).read_text(encoding="utf-8")
    return entries


def read_fixture(*parts: str) -> str:
    return FIXTURES.joinpath(*parts).read_text(encoding="utf-8")
