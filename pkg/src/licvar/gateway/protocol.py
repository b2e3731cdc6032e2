"""Requests, results and the fenced line format spoken with reasoning models."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from string import Template

from licvar.model import (
    DOMAINS,
    TermKind,
    TermValue,
    canonical_value,
    value_violation,
)

PROMPT_VERSION = "v1"


class ComponentKind(str, Enum):
    PRIMARY = "primary-license"
    THIRD_PARTY = "third-party-license"
    NOTICE = "notice"
    REFERENCE = "reference"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ClassificationRequest:
    sentence: str


@dataclass(frozen=True)
class ClassificationResult:
    labels: frozenset[TermKind]
    attempts: int = 1

    @property
    def is_other(self) -> bool:
        return not self.labels


@dataclass(frozen=True)
class TermExample:
    license_id: str
    clause_text: str
    value: TermValue


@dataclass(frozen=True)
class ValuationRequest:
    kind: TermKind
    clause_text: str
    examples: tuple[TermExample, ...] = ()


@dataclass(frozen=True)
class ValuationResult:
    value: TermValue
    rationale: str = ""
    attempts: int = 1


@dataclass(frozen=True)
class SegmentationRequest:
    text: str


@dataclass(frozen=True)
class Component:
    kind: ComponentKind
    text: str


@dataclass(frozen=True)
class SegmentationResult:
    components: tuple[Component, ...]
    attempts: int = 1


class ReplyFormatError(ValueError):
    """The reply does not follow the fenced line format."""


# ---------------------------------------------------------------- prompts


@lru_cache(maxsize=None)
def _template(name: str) -> Template:
    path = resources.files("licvar.gateway") / "prompts" / f"{name}_{PROMPT_VERSION}.txt"
    return Template(path.read_text(encoding="utf-8"))


@lru_cache(maxsize=None)
def term_definitions() -> dict[TermKind, str]:
    path = resources.files("licvar.gateway") / "prompts" / f"term_definitions_{PROMPT_VERSION}.txt"
    out: dict[TermKind, str] = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if ":" in line:
            name, text = line.split(":", 1)
            out[TermKind(name.strip())] = text.strip()
    return out


def _definitions_block() -> str:
    return "\n".join(f"- {k.value}: {d}" for k, d in term_definitions().items())


def _domain_text(kind: TermKind) -> str:
    if kind.is_scalar:
        return ", ".join(str(v) for v in DOMAINS[kind])
    what = "SPDX license identifiers" if kind.holds_licenses else "tags"
    return f"none, or a bracketed comma-separated list of {what}"


def format_value(value: TermValue) -> str:
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return "[" + ", ".join(value) + "]"
    return str(value)


def classification_prompt(req: ClassificationRequest) -> str:
    return _template("classify").substitute(
        definitions=_definitions_block(), sentence=req.sentence
    )


def valuation_prompt(req: ValuationRequest) -> str:
    if req.examples:
        examples = "\n".join(
            f"{i}. [{ex.license_id}] value = {format_value(ex.value)}\n   {ex.clause_text}"
            for i, ex in enumerate(req.examples, 1)
        )
    else:
        examples = "(none)"
    return _template("value").substitute(
        kind=req.kind.value,
        definition=term_definitions()[req.kind],
        domain=_domain_text(req.kind),
        clause_text=req.clause_text,
        examples=examples,
    )


def segmentation_prompt(req: SegmentationRequest) -> str:
    lines = req.text.splitlines()
    width = len(str(len(lines)))
    numbered = "\n".join(f"{i:>{width}}| {line}" for i, line in enumerate(lines, 1))
    return _template("segment").substitute(numbered_text=numbered)


def reask_prompt(original: str, problem: str) -> str:
    return original + "\n\n" + _template("reask").substitute(problem=problem)


# ---------------------------------------------------------------- replies

_FENCE = re.compile(r"```[a-zA-Z0-9_-]*[ \t]*\n(.*?)```", re.DOTALL)


def fenced_lines(reply: str) -> list[str]:
    m = _FENCE.search(reply)
    if m is None:
        raise ReplyFormatError("no fenced block in reply")
    lines = [ln.strip() for ln in m.group(1).splitlines() if ln.strip()]
    if not lines:
        raise ReplyFormatError("fenced block is empty")
    return lines


def _field(lines: list[str], key: str) -> str | None:
    prefix = key.upper() + ":"
    for ln in lines:
        if ln.upper().startswith(prefix):
            return ln[len(prefix) :].strip()
    return None


def parse_labels(reply: str) -> frozenset[TermKind]:
    raw = _field(fenced_lines(reply), "LABELS")
    if raw is None:
        raise ReplyFormatError("missing LABELS line")
    names = [p.strip().lower() for p in raw.split(",") if p.strip()]
    if not names or names == ["other"]:
        return frozenset()
    labels = set()
    for name in names:
        try:
            labels.add(TermKind(name))
        except ValueError:
            raise ReplyFormatError(f"unknown term {name!r}") from None
    return frozenset(labels)


def parse_value(reply: str, kind: TermKind) -> tuple[TermValue, str]:
    lines = fenced_lines(reply)
    raw = _field(lines, "VALUE")
    if raw is None:
        raise ReplyFormatError("missing VALUE line")
    rationale = _field(lines, "RATIONALE") or ""
    value: object
    if raw.lower() in ("none", "null", "[]"):
        value = None
    elif kind.is_scalar:
        try:
            value = int(raw)
        except ValueError:
            raise ReplyFormatError(f"{kind.value} needs an integer, got {raw!r}") from None
    else:
        inner = raw[1:-1] if raw.startswith("[") and raw.endswith("]") else raw
        value = [p.strip().strip("'\"") for p in inner.split(",") if p.strip()]
    try:
        canon = canonical_value(kind, value)
    except (TypeError, ValueError) as exc:
        raise ReplyFormatError(str(exc)) from None
    problem = value_violation(kind, canon)
    if problem:
        raise ReplyFormatError(problem)
    return canon, rationale


_RANGE = re.compile(r"^([a-z-]+)\s*:\s*(\d+)\s*-\s*(\d+)$")


def parse_segments(reply: str, text: str) -> tuple[Component, ...]:
    """Turn line ranges into components that exactly partition ``text``."""
    source = text.splitlines(keepends=True)
    expected = 1
    comps: list[Component] = []
    for ln in fenced_lines(reply):
        m = _RANGE.match(ln.lower())
        if m is None:
            raise ReplyFormatError(f"bad segment line {ln!r}")
        try:
            kind = ComponentKind(m.group(1))
        except ValueError:
            raise ReplyFormatError(f"unknown component kind {m.group(1)!r}") from None
        first, last = int(m.group(2)), int(m.group(3))
        if first != expected or last < first or last > len(source):
            raise ReplyFormatError(f"range {first}-{last} does not continue at line {expected}")
        comps.append(Component(kind, "".join(source[first - 1 : last])))
        expected = last + 1
    if expected != len(source) + 1:
        raise ReplyFormatError(f"lines {expected}-{len(source)} not covered")
    return tuple(comps)


def render_labels(labels: frozenset[TermKind] | set[TermKind]) -> str:
    names = sorted(k.value for k in labels) or ["other"]
    return "```\nLABELS: " + ", ".join(names) + "\n```"


def render_value(value: TermValue, rationale: str) -> str:
    return f"```\nVALUE: {format_value(value)}\nRATIONALE: {rationale}\n```"


def render_segments(ranges: list[tuple[ComponentKind, int, int]]) -> str:
    body = "\n".join(f"{k.value}: {a}-{b}" for k, a, b in ranges)
    return "```\n" + body + "\n```"

