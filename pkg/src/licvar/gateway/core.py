"""The gateway: prompt construction, reply validation and re-asks."""

from __future__ import annotations

import logging
from typing import Any, Callable, Protocol, TypeVar

import numpy as np

from licvar.errors import ProtocolError
from licvar.gateway.embedding import EmbeddingBackend, NgramEmbedder
from licvar.gateway.protocol import (
    ClassificationRequest,
    ClassificationResult,
    Component,
    ComponentKind,
    ReplyFormatError,
    SegmentationRequest,
    SegmentationResult,
    ValuationRequest,
    ValuationResult,
    classification_prompt,
    parse_labels,
    parse_segments,
    parse_value,
    reask_prompt,
    segmentation_prompt,
    valuation_prompt,
)
from licvar.model import TermKind, default_value

log = logging.getLogger(__name__)

T = TypeVar("T")

MAX_REASKS = 2


class ReasoningBackend(Protocol):
    name: str

    @property
    def call_counter(self) -> int: ...

    def complete(self, task: str, prompt: str, request: Any) -> str: ...


class Gateway:
    """Single entry point for embedding and reasoning requests.

    Malformed or out-of-domain replies are re-asked up to ``max_reasks``
    times; after that a :class:`ProtocolError` carries the attempt count.
    Every attempt is one backend request.
    """

    def __init__(
        self,
        reasoner: ReasoningBackend,
        embedder: EmbeddingBackend | None = None,
        max_reasks: int = MAX_REASKS,
    ):
        self.reasoner = reasoner
        self.embedder = embedder or NgramEmbedder()
        self.max_reasks = max_reasks

    @property
    def call_counter(self) -> int:
        return self.reasoner.call_counter

    def embed(self, text: str) -> np.ndarray:
        return self.embedder.embed(text)

    def _ask(
        self, task: str, prompt: str, request: Any, parse: Callable[[str], T]
    ) -> tuple[T, int]:
        current = prompt
        reply = ""
        for attempt in range(1, self.max_reasks + 2):
            reply = self.reasoner.complete(task, current, request)
            try:
                return parse(reply), attempt
            except ReplyFormatError as exc:
                log.info("%s reply rejected (attempt %d): %s", task, attempt, exc)
                current = reask_prompt(prompt, str(exc))
        raise ProtocolError(
            f"{task}: no usable reply after {self.max_reasks + 1} attempts",
            attempts=self.max_reasks + 1,
            last_reply=reply,
        )

    def classify_sentence(self, req: ClassificationRequest) -> ClassificationResult:
        if not req.sentence.strip():
            raise ValueError("cannot classify an empty sentence")
        labels, attempts = self._ask("classify", classification_prompt(req), req, parse_labels)
        return ClassificationResult(labels, attempts)

    def value_term(self, req: ValuationRequest) -> ValuationResult:
        if not req.clause_text.strip():
            if req.kind is TermKind.COPYRIGHT:
                raise ValueError("copyright needs clause text to be valued")
            # nothing said about the term: its "not mentioned" value, no request needed
            return ValuationResult(default_value(req.kind), "no clauses", attempts=0)
        (value, rationale), attempts = self._ask(
            "value", valuation_prompt(req), req, lambda r: parse_value(r, req.kind)
        )
        return ValuationResult(value, rationale, attempts)

    def segment_license_file(self, text: str) -> SegmentationResult:
        """Split a license file into components; falls back to one primary component."""
        if not text.strip():
            return SegmentationResult((Component(ComponentKind.PRIMARY, text),) if text else (), 0)
        req = SegmentationRequest(text)
        try:
            comps, attempts = self._ask(
                "segment", segmentation_prompt(req), req, lambda r: parse_segments(r, text)
            )
        except ProtocolError as exc:
            log.warning("segmentation failed, keeping the file whole: %s", exc)
            return SegmentationResult((Component(ComponentKind.PRIMARY, text),), exc.attempts)
        return SegmentationResult(comps, attempts)
