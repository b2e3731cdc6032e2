"""License variant parsing, compatibility checking and dependency scanning."""

from __future__ import annotations

from licvar.compat import CompatibilityVerdict, VerdictKind, check
from licvar.kb import KnowledgeBase, load as load_kb
from licvar.model import LicenseId, Provenance, TermKind, TermVector
from licvar.parser import ParserConfig, ParseResult, parse, parse_baseline
from licvar.pipeline import ScanReport, scan

__version__ = "0.1.0"

__all__ = [
    "CompatibilityVerdict",
    "KnowledgeBase",
    "LicenseId",
    "ParseResult",
    "ParserConfig",
    "Provenance",
    "ScanReport",
    "TermKind",
    "TermVector",
    "VerdictKind",
    "check",
    "load_kb",
    "parse",
    "parse_baseline",
    "scan",
]
