"""Text normalization, Winnowing fingerprints and the shared-signature score."""

from __future__ import annotations

from dataclasses import dataclass

from licvar import _kernels
from licvar.errors import IncompatibleFingerprintError

DEFAULT_K = 8
DEFAULT_W = 4


@dataclass(frozen=True)
class NormalizedText:
    """Lowercased alphanumeric text with single spaces between runs.

    ``offset_map[i]`` is the offset in the original string of the character
    that produced ``text[i]``; separators map to the first character of the
    punctuation/whitespace run they replace.
    """

    text: str
    offset_map: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.text)

    def __str__(self) -> str:
        return self.text


def normalize(raw: str) -> NormalizedText:
    chars: list[str] = []
    offsets: list[int] = []
    pending_sep: int | None = None
    for pos, ch in enumerate(raw):
        if ch.isalnum():
            lowered = [c for c in ch.lower() if c.isalnum()]
            if not lowered:
                if pending_sep is None:
                    pending_sep = pos
                continue
            if pending_sep is not None and chars:
                chars.append(" ")
                offsets.append(pending_sep)
            pending_sep = None
            for c in lowered:
                chars.append(c)
                offsets.append(pos)
        elif pending_sep is None:
            pending_sep = pos
    return NormalizedText("".join(chars), tuple(offsets))


def normalized(raw: str) -> str:
    return normalize(raw).text


@dataclass(frozen=True)
class FingerprintSet:
    signatures: frozenset[int]
    k: int = DEFAULT_K
    w: int = DEFAULT_W

    @property
    def params(self) -> tuple[int, int]:
        return (self.k, self.w)

    def __len__(self) -> int:
        return len(self.signatures)


def winnow(t: NormalizedText | str, k: int = DEFAULT_K, w: int = DEFAULT_W) -> FingerprintSet:
    """Fingerprint already-normalized text.

    Every window of ``w`` consecutive k-gram hashes contributes its minimum.
    Plain strings are taken as already normalized.
    """
    if k < 2:
        raise ValueError("k-gram length must be >= 2")
    if w < 1:
        raise ValueError("window size must be >= 1")
    text = t.text if isinstance(t, NormalizedText) else t
    return FingerprintSet(frozenset(_kernels.winnow(text, k, w)), k, w)


def fingerprint(raw: str, k: int = DEFAULT_K, w: int = DEFAULT_W) -> FingerprintSet:
    """Normalize ``raw`` then winnow it."""
    return winnow(normalize(raw), k, w)


def matching_score(a: FingerprintSet, b: FingerprintSet) -> float:
    """Shared signatures over all signatures: |A & B| / |A | B|.

    Two empty sets score 1.0 (identical empty texts).
    """
    if a.params != b.params:
        raise IncompatibleFingerprintError(
            f"fingerprints built with different (k, w): {a.params} vs {b.params}"
        )
    union = len(a.signatures | b.signatures)
    if union == 0:
        return 1.0
    return len(a.signatures & b.signatures) / union


def text_similarity(a: str, b: str, k: int = DEFAULT_K, w: int = DEFAULT_W) -> float:
    return matching_score(fingerprint(a, k, w), fingerprint(b, k, w))
