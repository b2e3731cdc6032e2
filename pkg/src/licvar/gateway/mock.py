"""Offline reasoning backend with fixed, rule-driven answers.

Sentence labels come from the knowledge base when the sentence is a KB
sentence, otherwise from keyword rules. Term values come from value rules,
then the most similar retrieved example, then a conservative fallback.
Replies use the same fenced format as a real model, so the gateway's reply
parsing is exercised end to end.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Protocol

from licvar.fingerprint import normalized, text_similarity
from licvar.gateway.backend import CountingBackend
from licvar.gateway.protocol import (
    ClassificationRequest,
    ComponentKind,
    SegmentationRequest,
    ValuationRequest,
    render_labels,
    render_segments,
    render_value,
)
from licvar.model import (
    TermKind,
    TermValue,
    most_restrictive_value,
)

log = logging.getLogger(__name__)


class SentenceLookup(Protocol):
    def lookup_sentence(self, normalized_text: str) -> tuple[Any, frozenset[TermKind]] | None: ...


@dataclass(frozen=True)
class MockRules:
    classify: dict[TermKind, tuple[re.Pattern[str], ...]]
    classify_other: tuple[re.Pattern[str], ...]
    value: dict[TermKind, tuple[tuple[re.Pattern[str], int], ...]]
    tags: dict[TermKind, tuple[tuple[re.Pattern[str], str], ...]]
    nearest_example_threshold: float
    near_duplicate_threshold: float
    segment: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> MockRules:
        seg = data.get("segment", {})
        return cls(
            classify={
                TermKind(k): tuple(re.compile(p) for p in pats)
                for k, pats in data["classify"].items()
            },
            classify_other=tuple(re.compile(p) for p in data.get("classify_other", [])),
            value={
                TermKind(k): tuple((re.compile(p), v) for p, v in rules)
                for k, rules in data.get("value", {}).items()
            },
            tags={
                TermKind(k): tuple((re.compile(p), t) for p, t in rules)
                for k, rules in data.get("tags", {}).items()
            },
            nearest_example_threshold=float(data.get("nearest_example_threshold", 0.5)),
            near_duplicate_threshold=float(data.get("near_duplicate_threshold", 0.8)),
            segment={
                "separator": re.compile(seg.get("separator", r"^\s*([=\-*_])\1{4,}\s*$")),
                "third_party_heading": re.compile(seg.get("third_party_heading", "third.party")),
                "reference": re.compile(seg.get("reference", "^licensed under")),
                "reference_max_chars": int(seg.get("reference_max_chars", 300)),
                "notice": re.compile(seg.get("notice", "^copyright")),
            },
        )


@lru_cache(maxsize=None)
def default_rules() -> MockRules:
    text = (resources.files("licvar") / "data" / "mock_rules.json").read_text(encoding="utf-8")
    return MockRules.from_json(json.loads(text))


def load_rules(path: str | Path) -> MockRules:
    return MockRules.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


class MockReasoner(CountingBackend):
    """Deterministic stand-in for an instruction-following model."""

    def __init__(self, kb: SentenceLookup | None = None, rules: MockRules | None = None):
        super().__init__("mock")
        self.kb = kb
        self.rules = rules or default_rules()

    # ------------------------------------------------------------ classify

    def labels_for(self, sentence: str) -> frozenset[TermKind]:
        norm = normalized(sentence)
        if self.kb is not None:
            hit = self.kb.lookup_sentence(norm)
            if hit is not None:
                return frozenset(hit[1])
        if any(p.search(norm) for p in self.rules.classify_other):
            return frozenset()
        return frozenset(
            kind
            for kind, patterns in self.rules.classify.items()
            if any(p.search(norm) for p in patterns)
        )

    # --------------------------------------------------------------- value

    def value_for(self, req: ValuationRequest) -> tuple[TermValue, str]:
        """Answer order: near-copy of an example (scalars), tag or value rules,
        closest example, conservative fallback."""
        kind = req.kind
        norm = normalized(req.clause_text)
        best: tuple[float, int] | None = None
        for i, ex in enumerate(req.examples):
            score = text_similarity(req.clause_text, ex.clause_text)
            if best is None or score > best[0]:
                best = (score, i)

        def from_example() -> tuple[TermValue, str]:
            assert best is not None
            ex = req.examples[best[1]]
            return ex.value, f"closest example {ex.license_id} ({best[0]:.2f})"

        if kind.is_scalar and best is not None and best[0] >= self.rules.near_duplicate_threshold:
            return from_example()
        for pattern, value in self.rules.value.get(kind, ()):
            if pattern.search(norm):
                return value, f"rule {pattern.pattern!r}"
        if kind in self.rules.tags:
            found = sorted(
                {tag for pattern, tag in self.rules.tags[kind] if pattern.search(norm)}
            )
            if found:
                return tuple(found), "tag rules"
        if best is not None and best[0] >= self.rules.nearest_example_threshold:
            return from_example()
        if kind is TermKind.COPYRIGHT:
            return 2, "grant wording not recognized"
        if kind is TermKind.EXCEPTION or kind.holds_licenses:
            return None, "no identifiable licenses or exceptions"
        return most_restrictive_value(kind), "unrecognized clause, conservative value"

    # ------------------------------------------------------------- segment

    def segment_ranges(self, text: str) -> list[tuple[ComponentKind, int, int]]:
        seg = self.rules.segment
        lines = text.splitlines()
        if not lines:
            return []
        # block starts: separator lines and third-party headings
        starts: dict[int, bool] = {0: False}
        for i, line in enumerate(lines):
            stripped = line.strip()
            if (
                seg["separator"].match(line)
                and (i == 0 or not lines[i - 1].strip())
                and not _opens_box(lines, i)
            ):
                # rules under headings and comment-box borders are not separators
                starts.setdefault(i, False)
            elif (
                stripped
                and len(stripped) <= 80
                and seg["third_party_heading"].search(stripped.lower())
                and not stripped.endswith((".", ",", ";"))
                and any(ln.strip() for ln in lines[:i])
            ):
                starts[_block_start(lines, i)] = True
        bounds = sorted(starts)
        ranges: list[tuple[ComponentKind, int, int]] = []
        third_party = False
        for n, first in enumerate(bounds):
            last = (bounds[n + 1] if n + 1 < len(bounds) else len(lines)) - 1
            third_party = third_party or starts[first]
            body = "\n".join(lines[first : last + 1])
            kind = self._component_kind(body, third_party, bool(ranges))
            if kind is None:
                if ranges:  # decoration only: fold into the previous component
                    k, a, _ = ranges[-1]
                    ranges[-1] = (k, a, last + 1)
                    continue
                kind = ComponentKind.PRIMARY
            ranges.append((kind, first + 1, last + 1))
        # a leading decoration-only block was kept; merge it into the next one
        if len(ranges) > 1 and not normalized("\n".join(lines[: ranges[0][2]])):
            k, _, b = ranges[1]
            ranges[1:2] = [(k, 1, b)]
            ranges.pop(0)
        return ranges

    def _component_kind(self, body: str, third_party: bool, seen: bool) -> ComponentKind | None:
        seg = self.rules.segment
        content = [ln.strip() for ln in body.splitlines() if normalized(ln)]
        if not content:
            return None
        lowered = [ln.lower() for ln in content]
        if len(body.strip()) <= seg["reference_max_chars"] and seg["reference"].search(
            lowered[0]
        ):
            return ComponentKind.REFERENCE
        if all(seg["notice"].search(ln) for ln in lowered):
            return ComponentKind.NOTICE
        return ComponentKind.THIRD_PARTY if third_party else ComponentKind.PRIMARY

    # --------------------------------------------------------------- entry

    def _complete(self, task: str, prompt: str, request: Any) -> str:
        if task == "classify":
            assert isinstance(request, ClassificationRequest)
            return render_labels(self.labels_for(request.sentence))
        if task == "value":
            assert isinstance(request, ValuationRequest)
            value, why = self.value_for(request)
            return render_value(value, why)
        if task == "segment":
            assert isinstance(request, SegmentationRequest)
            return render_segments(self.segment_ranges(request.text))
        raise ValueError(f"unknown task {task!r}")


def _opens_box(lines: list[str], i: int) -> bool:
    nxt = lines[i + 1].strip() if i + 1 < len(lines) else ""
    return len(nxt) > 1 and nxt.startswith("*") and nxt.endswith("*")


def _block_start(lines: list[str], i: int) -> int:
    """Move a heading boundary up over a directly preceding separator line."""
    j = i
    while j > 0 and lines[j - 1].strip() and not normalized(lines[j - 1]):
        j -= 1
    return j
