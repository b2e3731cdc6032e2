"""Access to embedding and reasoning models, with offline stand-ins."""

from __future__ import annotations

from licvar.gateway.backend import CountingBackend
from licvar.gateway.core import Gateway, ReasoningBackend
from licvar.gateway.embedding import EmbeddingBackend, NgramEmbedder, cosine, embedding_backend
from licvar.gateway.mock import MockReasoner
from licvar.gateway.protocol import (
    ClassificationRequest,
    ClassificationResult,
    Component,
    ComponentKind,
    SegmentationResult,
    TermExample,
    ValuationRequest,
    ValuationResult,
)
from licvar.gateway.remote import RemoteConfig, RemoteEmbedder, RemoteReasoner

__all__ = [
    "ClassificationRequest",
    "ClassificationResult",
    "Component",
    "ComponentKind",
    "CountingBackend",
    "EmbeddingBackend",
    "Gateway",
    "MockReasoner",
    "NgramEmbedder",
    "ReasoningBackend",
    "RemoteConfig",
    "RemoteEmbedder",
    "RemoteReasoner",
    "SegmentationResult",
    "TermExample",
    "ValuationRequest",
    "ValuationResult",
    "cosine",
    "embedding_backend",
]
