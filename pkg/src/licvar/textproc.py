"""Sentence segmentation of license prose and exact sentence-level diffing."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

from licvar.fingerprint import normalized

ABBREVIATIONS = frozenset(
    """
    sec secs e.g eg i.e ie etc inc ltd co corp no nos vs v cf fig figs art para pp
    mr mrs ms dr st u.s u.s.a jan feb mar apr jun jul aug sep sept oct nov dec
    ver approx resp incl viz al seq ch
    """.split()
)

_BLOCK_BREAK = re.compile(r"\n[ \t\r\f\v]*\n")
_LIST_MARKER = re.compile(
    r"""^[ \t]*(?:
        \(?\d{1,3}(?:\.\d{1,3})*[.)]      # 1.  1.2.  2)  (3)
      | \([a-zA-Z]{1,4}\)                 # (a)  (iv)
      | [a-z][.)]                         # a.  b)
      | [-*•·‣–]      # bullets
    )[ \t]+\S""",
    re.VERBOSE,
)
_MARKER_TOKEN = re.compile(r"^\(?(?:\d{1,3}(?:\.\d{1,3})*|[a-zA-Z]|[ivxlcIVXLC]{1,5})\)?$")
_SENTENCE_END = re.compile(
    r"""[.!?;]["'”’)\]]*     # terminator plus closing quotes/brackets
        (?=\s+["'“‘(\[•*\-]?[A-Z0-9])""",
    re.VERBOSE,
)
_NUMBERED_TITLE = re.compile(r"^\(?\d{1,3}(?:\.\d{1,3})*[.)]?\s+[A-Z][^.;:]{0,60}\.?$")


@dataclass(frozen=True)
class SentenceUnit:
    text: str
    normalized: str
    index: int
    section_hint: str | None = None


@dataclass(frozen=True)
class SentenceDiff:
    matched: list[tuple[int, int]] = field(default_factory=list)
    candidate_only: list[int] = field(default_factory=list)
    standard_only: list[int] = field(default_factory=list)


def _is_heading_line(line: str, previous: str | None) -> bool:
    s = line.strip()
    letters = [c for c in s if c.isalpha()]
    if previous is not None and previous.rstrip()[-1:] not in (".", ":", "!", "?"):
        return False  # wrapped continuation of the previous line
    return (
        2 <= len(letters)
        and len(s) <= 50
        and all(c.isupper() for c in letters)
        and s[-1] not in ",;:-."
    )


def _regions(doc: str) -> list[tuple[int, int, bool]]:
    """Spans that no sentence may cross, flagged when they are heading lines."""
    spans: list[tuple[int, int, bool]] = []
    block_start = 0
    blocks = []
    for m in _BLOCK_BREAK.finditer(doc):
        blocks.append((block_start, m.start()))
        block_start = m.end()
    blocks.append((block_start, len(doc)))
    for b_start, b_end in blocks:
        cuts = [b_start]
        headings: set[int] = set()
        pos = b_start
        previous: str | None = None
        for line in doc[b_start:b_end].splitlines(keepends=True):
            if pos > b_start and _LIST_MARKER.match(line):
                cuts.append(pos)
            if _is_heading_line(line, previous):
                if pos > b_start:
                    cuts.append(pos)
                headings.add(pos)
                cuts.append(pos + len(line))
            pos += len(line)
            previous = line
        cuts.append(b_end)
        cuts = sorted(set(c for c in cuts if b_start <= c <= b_end))
        for a, b in zip(cuts, cuts[1:]):
            if doc[a:b].strip():
                spans.append((a, b, a in headings))
    return spans


def _split_sentences(doc: str, start: int, end: int) -> list[tuple[int, int]]:
    region = doc[start:end]
    out: list[tuple[int, int]] = []
    unit_start = 0
    for m in _SENTENCE_END.finditer(region):
        cut = m.end()
        before = region[unit_start : m.start() + 1]
        token_match = re.search(r"(\S+)$", before)
        token = token_match.group(1) if token_match else ""
        bare = token.lstrip("(\"'“").rstrip(".").lower()
        if before.count("(") > before.count(")"):
            continue  # inside a parenthetical
        if region[m.start()] == ".":
            if bare in ABBREVIATIONS:
                continue
            if len(bare) == 1 and bare.isalpha() and token.rstrip(".")[-1:].isupper():
                continue  # initials
            if not before[: len(before) - len(token)].strip() and _MARKER_TOKEN.match(
                token.rstrip(".")
            ):
                continue  # leading list marker
        out.append((start + unit_start, start + cut))
        unit_start = cut
    if region[unit_start:].strip():
        out.append((start + unit_start, end))
    return out


_BOX_LINE = re.compile(r"^([ \t]*\*)(.*?)(\*[ \t]*)$", re.MULTILINE)


def _strip_box(doc: str) -> str:
    """Blank out ``*`` comment-box borders, keeping every offset in place."""

    def repl(m: re.Match[str]) -> str:
        inner = m.group(2)
        if not inner.strip("* \t"):
            return " " * len(m.group(0))
        return " " * len(m.group(1)) + inner + " " * len(m.group(3))

    return _BOX_LINE.sub(repl, doc)


def segment(doc: str) -> list[SentenceUnit]:
    """Split a license document into self-contained sentence units.

    Blank lines, list items and all-caps heading lines always start a new
    unit. Fragments without any alphanumeric content are folded into the
    neighbouring unit so the units still cover the whole document.
    """
    doc = _strip_box(doc)
    pieces: list[list[int]] = []
    heading_flags: list[bool] = []
    for r_start, r_end, is_heading in _regions(doc):
        for s, e in _split_sentences(doc, r_start, r_end):
            pieces.append([s, e])
            heading_flags.append(is_heading)

    merged: list[list[int]] = []
    merged_flags: list[bool] = []
    carry: int | None = None
    for (s, e), flag in zip(pieces, heading_flags):
        if not normalized(doc[s:e]):
            if merged:
                merged[-1][1] = e
            elif carry is None:
                carry = s
            continue
        if carry is not None:
            s, carry = carry, None
        merged.append([s, e])
        merged_flags.append(flag)

    units: list[SentenceUnit] = []
    hint: str | None = None
    for i, ((s, e), flag) in enumerate(zip(merged, merged_flags)):
        text = " ".join(doc[s:e].split())
        units.append(SentenceUnit(text, normalized(text), i, hint))
        if flag or _NUMBERED_TITLE.match(text):
            hint = text
    return units


def _lcs_pairs(a: Sequence[str], b: Sequence[str]) -> list[tuple[int, int]]:
    n, m = len(a), len(b)
    prefix = 0
    while prefix < n and prefix < m and a[prefix] == b[prefix]:
        prefix += 1
    suffix = 0
    while suffix < n - prefix and suffix < m - prefix and a[n - 1 - suffix] == b[m - 1 - suffix]:
        suffix += 1
    pairs = [(i, i) for i in range(prefix)]
    mid_a, mid_b = a[prefix : n - suffix], b[prefix : m - suffix]
    rows, cols = len(mid_a), len(mid_b)
    if rows and cols:
        # table[i][j] = LCS length of mid_a[i:], mid_b[j:]
        table = [[0] * (cols + 1) for _ in range(rows + 1)]
        for i in range(rows - 1, -1, -1):
            row, below = table[i], table[i + 1]
            ai = mid_a[i]
            for j in range(cols - 1, -1, -1):
                if ai == mid_b[j]:
                    row[j] = below[j + 1] + 1
                else:
                    row[j] = below[j] if below[j] >= row[j + 1] else row[j + 1]
        i = j = 0
        while i < rows and j < cols:
            if mid_a[i] == mid_b[j]:
                pairs.append((prefix + i, prefix + j))
                i += 1
                j += 1
            elif table[i + 1][j] >= table[i][j + 1]:
                i += 1
            else:
                j += 1
    pairs.extend((n - suffix + t, m - suffix + t) for t in range(suffix))
    return pairs


def diff_sentences(
    candidate: Sequence[SentenceUnit], standard: Sequence[SentenceUnit]
) -> SentenceDiff:
    """Exact matches between two segmented documents via longest common subsequence."""
    pairs = _lcs_pairs([u.normalized for u in candidate], [u.normalized for u in standard])
    matched = [(candidate[i].index, standard[j].index) for i, j in pairs]
    seen_c = {i for i, _ in pairs}
    seen_s = {j for _, j in pairs}
    return SentenceDiff(
        matched=matched,
        candidate_only=[u.index for k, u in enumerate(candidate) if k not in seen_c],
        standard_only=[u.index for k, u in enumerate(standard) if k not in seen_s],
    )
