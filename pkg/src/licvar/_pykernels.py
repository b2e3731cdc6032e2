"""Pure-Python text hashing kernels.

Reference implementation of the hot loops used by fingerprinting and the
fallback embedder. ``_ckernels.pyx`` must produce bit-identical results.

Every k-gram is hashed with 64-bit FNV-1a over the UTF-32-LE bytes of its
code points, which keeps the values independent of platform and of the
Python build's internal string representation.
"""

from __future__ import annotations

from collections import deque

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK64 = 0xFFFFFFFFFFFFFFFF


def _fnv1a(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & MASK64
    return h


def kgram_hashes(text: str, k: int) -> list[int]:
    """Hash every k-gram of ``text``, in order."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n = len(text) - k + 1
    if n <= 0:
        return []
    raw = text.encode("utf-32-le")
    width = 4 * k
    return [_fnv1a(raw[4 * i : 4 * i + width]) for i in range(n)]


def winnow(text: str, k: int, w: int) -> set[int]:
    """Window-minimum k-gram hashes of ``text``.

    Texts with fewer than ``w`` k-grams form a single window.
    """
    if w < 1:
        raise ValueError("w must be >= 1")
    hashes = kgram_hashes(text, k)
    if not hashes:
        return set()
    if len(hashes) <= w:
        return {min(hashes)}
    selected: set[int] = set()
    window: deque[int] = deque()  # indices, hash values increasing
    for i, h in enumerate(hashes):
        while window and hashes[window[-1]] > h:
            window.pop()
        window.append(i)
        if window[0] <= i - w:
            window.popleft()
        if i >= w - 1:
            selected.add(hashes[window[0]])
    return selected


def ngram_counts(text: str, n: int, dim: int) -> list[int]:
    """Hashed character n-gram term frequencies, folded into ``dim`` buckets."""
    counts = [0] * dim
    for h in kgram_hashes(text, n):
        counts[h % dim] += 1
    return counts
