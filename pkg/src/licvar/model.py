"""Structured license representation: term kinds, value domains and the
restrictiveness order used to merge conflicting values."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import Any, Iterable, Mapping, Union

from licvar.errors import ValidationError, ValueDomainError

SCHEMA_VERSION = 1


class TermKind(str, Enum):
    # scalar-valued
    COPYRIGHT = "copyright"
    COPYLEFT = "copyleft"
    CHANGE_STATEMENT = "change_statement"
    PATENT_GRANT = "patent_grant"
    TRADEMARK_LIMITATION = "trademark_limitation"
    NETWORK_USE = "network_use"
    ATTRIBUTION_RETENTION = "attribution_retention"
    ENHANCED_ATTRIBUTION = "enhanced_attribution"
    PATENT_LITIGATION_TERMINATION = "patent_litigation_termination"
    EXPLICIT_ACCEPTANCE = "explicit_acceptance"
    # list-valued
    SECONDARY_LICENSE = "secondary_license"
    COMPATIBLE_VERSION = "compatible_version"
    GPL_COMBINATION = "gpl_combination"
    USAGE_LIMITATION = "usage_limitation"
    EXCEPTION = "exception"

    def __str__(self) -> str:
        return self.value

    @property
    def is_scalar(self) -> bool:
        return self in SCALAR_KINDS

    @property
    def holds_licenses(self) -> bool:
        return self in LICENSE_LIST_KINDS


ALL_KINDS: tuple[TermKind, ...] = tuple(TermKind)
SCALAR_KINDS: tuple[TermKind, ...] = ALL_KINDS[:10]
LIST_KINDS: tuple[TermKind, ...] = ALL_KINDS[10:]
LICENSE_LIST_KINDS = frozenset(
    {TermKind.SECONDARY_LICENSE, TermKind.COMPATIBLE_VERSION, TermKind.GPL_COMBINATION}
)
TAG_LIST_KINDS = frozenset({TermKind.USAGE_LIMITATION, TermKind.EXCEPTION})
# permissions: conservative merge keeps only what both sides allow
INTERSECTION_KINDS = LICENSE_LIST_KINDS
# restrictions: conservative merge keeps everything either side lists
UNION_KINDS = TAG_LIST_KINDS

DOMAINS: dict[TermKind, tuple[int, ...]] = {
    kind: (0, 1) for kind in SCALAR_KINDS
}
DOMAINS[TermKind.COPYRIGHT] = (0, 1, 2, 3)
DOMAINS[TermKind.COPYLEFT] = (0, 1, 2, 3)
DOMAINS[TermKind.PATENT_GRANT] = (-1, 0, 1)

# rank: higher means more restrictive
_RANK: dict[TermKind, dict[int, int]] = {kind: {0: 0, 1: 1} for kind in SCALAR_KINDS}
_RANK[TermKind.COPYRIGHT] = {1: 0, 3: 1, 2: 2, 0: 3}
_RANK[TermKind.COPYLEFT] = {0: 0, 1: 1, 2: 2, 3: 3}
_RANK[TermKind.PATENT_GRANT] = {1: 0, 0: 1, -1: 2}

UNKNOWN_PREFIX = "unknown:"
UNRESOLVED_TAG = "unresolved-restriction"

# Scalars are ints; list kinds hold a sorted tuple of strings or None (unset).
TermValue = Union[int, tuple[str, ...], None]


class Provenance(str, Enum):
    KB_REUSE = "knowledge-base-reuse"
    MODEL = "model-inferred"
    CONFLICT = "conflict-resolved"
    DEFAULT = "default"

    def __str__(self) -> str:
        return self.value


@lru_cache(maxsize=1)
def _spdx_table() -> dict[str, Any]:
    raw = resources.files("licvar").joinpath("data/spdx.json").read_text(encoding="utf-8")
    table = json.loads(raw)
    return {
        "licenses": {i.lower(): i for i in table["licenses"]},
        "exceptions": {i.lower(): i for i in table["exceptions"]},
    }


def spdx_license_id(identifier: str) -> str | None:
    """Return the canonical spelling of an SPDX license id, or None if unknown."""
    return _spdx_table()["licenses"].get(identifier.strip().lower())


def spdx_exception_id(identifier: str) -> str | None:
    return _spdx_table()["exceptions"].get(identifier.strip().lower())


@dataclass(frozen=True)
class LicenseId:
    identifier: str
    name: str = ""
    canonical: bool = False

    def __post_init__(self) -> None:
        if not self.identifier:
            raise ValueError("license identifier must be non-empty")
        if self.canonical and spdx_license_id(self.identifier) != self.identifier:
            raise ValueError(f"{self.identifier!r} is not in the SPDX id table")
        if not self.name:
            object.__setattr__(self, "name", self.identifier)

    @classmethod
    def of(cls, identifier: str, name: str = "") -> LicenseId:
        """Build an id, marking it canonical when it is a known SPDX id."""
        spdx = spdx_license_id(identifier)
        if spdx is not None:
            return cls(spdx, name or spdx, True)
        return cls(identifier.strip(), name, False)

    def __str__(self) -> str:
        return self.identifier


def canonical_value(kind: TermKind, value: Any) -> TermValue:
    """Bring a raw value into canonical form (lists sorted, deduplicated, empty -> None).

    Type or domain problems are left for :func:`validate` to report.
    """
    if kind.is_scalar:
        return value
    if value is None:
        return None
    if isinstance(value, str):
        value = [value]
    if isinstance(value, (list, tuple, set, frozenset)):
        items = []
        for item in value:
            if isinstance(item, str) and kind.holds_licenses and not item.startswith(UNKNOWN_PREFIX):
                item = spdx_license_id(item) or item
            items.append(item)
        try:
            unique = tuple(sorted(set(items)))
        except TypeError:
            return tuple(items)
        return unique or None
    return value


def value_violation(kind: TermKind, value: Any) -> str | None:
    """Describe why ``value`` is invalid for ``kind``; None when it is valid."""
    if kind.is_scalar:
        if isinstance(value, bool) or not isinstance(value, int):
            return f"expected an integer, got {value!r}"
        if value not in DOMAINS[kind]:
            return f"{value!r} not in {list(DOMAINS[kind])}"
        return None
    if value is None:
        return None
    if not isinstance(value, tuple):
        return f"expected a list or null, got {value!r}"
    for item in value:
        if not isinstance(item, str) or not item.strip():
            return f"list entries must be non-empty strings, got {item!r}"
        if kind.holds_licenses and not (
            item.startswith(UNKNOWN_PREFIX) or spdx_license_id(item) == item
        ):
            return f"{item!r} is neither an SPDX id nor '{UNKNOWN_PREFIX}<raw>'"
    return None


def _require_valid(kind: TermKind, value: TermValue) -> None:
    problem = value_violation(kind, value)
    if problem:
        raise ValueDomainError(f"{kind}: {problem}")


def restrictiveness_max(kind: TermKind, a: TermValue, b: TermValue) -> TermValue:
    """The more restrictive of two values of the same kind.

    Scalars follow a per-kind total order. Lists of relicensing permissions
    merge by intersection, lists of restrictions and exceptions by union.
    """
    kind = TermKind(kind)
    a, b = canonical_value(kind, a), canonical_value(kind, b)
    _require_valid(kind, a)
    _require_valid(kind, b)
    if kind.is_scalar:
        rank = _RANK[kind]
        return a if rank[a] >= rank[b] else b
    left, right = set(a or ()), set(b or ())
    merged = left & right if kind in INTERSECTION_KINDS else left | right
    return tuple(sorted(merged)) or None


def is_more_restrictive(kind: TermKind, a: TermValue, b: TermValue) -> bool:
    """True when ``a`` is strictly above ``b`` in the restrictiveness order."""
    return restrictiveness_max(kind, a, b) == canonical_value(kind, a) and canonical_value(
        kind, a
    ) != canonical_value(kind, b)


def default_value(kind: TermKind) -> TermValue:
    """Value assigned when a license says nothing about ``kind``."""
    if kind is TermKind.COPYRIGHT:
        return 2  # no explicit grant: implicit/unclear permissions
    return 0 if kind.is_scalar else None


def most_restrictive_value(kind: TermKind) -> TermValue:
    """Fallback when the model cannot produce a usable value."""
    if kind.is_scalar:
        rank = _RANK[kind]
        return max(rank, key=rank.__getitem__)
    if kind is TermKind.USAGE_LIMITATION:
        return (UNRESOLVED_TAG,)
    # no relicensing permissions; no exception relaxing the license
    return None


@dataclass(frozen=True)
class Violation:
    kind: str
    value: Any
    problem: str

    def __str__(self) -> str:
        return f"{self.kind}={self.value!r}: {self.problem}"


@dataclass(frozen=True, eq=True)
class TermVector:
    """Values of all fifteen term kinds for one license, plus where each came from."""

    values: Mapping[TermKind, TermValue]
    provenance: Mapping[TermKind, Provenance] = field(default_factory=dict)

    def __post_init__(self) -> None:
        vals = {}
        for key, value in self.values.items():
            try:
                kind = TermKind(key)
            except ValueError:
                vals[key] = value
                continue
            vals[kind] = canonical_value(kind, value)
        object.__setattr__(self, "values", vals)
        object.__setattr__(
            self, "provenance", {TermKind(k): Provenance(p) for k, p in self.provenance.items()}
        )

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def from_mapping(
        cls,
        values: Mapping[str, Any],
        provenance: Provenance | Mapping[str, Any] | None = None,
        *,
        fill_defaults: bool = False,
    ) -> TermVector:
        vals: dict[Any, Any] = dict(values)
        if fill_defaults:
            for kind in ALL_KINDS:
                if kind not in vals and kind.value not in vals:
                    vals[kind] = default_value(kind)
        if provenance is None:
            prov: dict[Any, Any] = {}
        elif isinstance(provenance, Provenance):
            prov = {kind: provenance for kind in ALL_KINDS}
        else:
            prov = dict(provenance)
        return cls(vals, prov)

    def __getitem__(self, kind: TermKind | str) -> TermValue:
        return self.values[TermKind(kind)]

    def get(self, kind: TermKind | str, default: Any = None) -> Any:
        return self.values.get(TermKind(kind), default)

    def replace(self, kind: TermKind, value: TermValue, provenance: Provenance) -> TermVector:
        vals = dict(self.values)
        prov = dict(self.provenance)
        vals[kind] = value
        prov[kind] = provenance
        return TermVector(vals, prov)

    def same_terms(self, other: TermVector) -> bool:
        """Value equality, ignoring provenance."""
        return dict(self.values) == dict(other.values)

    @property
    def copyleft(self) -> int:
        return self.values[TermKind.COPYLEFT]  # type: ignore[return-value]

    @property
    def copyright(self) -> int:
        return self.values[TermKind.COPYRIGHT]  # type: ignore[return-value]

    def licenses(self, kind: TermKind) -> tuple[str, ...]:
        return self.values.get(kind) or ()  # type: ignore[return-value]

    def to_json_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"schema_version": SCHEMA_VERSION}
        for kind in ALL_KINDS:
            value = self.values.get(kind)
            out[kind.value] = list(value) if isinstance(value, tuple) else value
        if self.provenance:
            out["provenance"] = {
                k.value: self.provenance[k].value for k in ALL_KINDS if k in self.provenance
            }
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json_dict(cls, data: Mapping[str, Any]) -> TermVector:
        version = data.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported term vector schema_version {version!r}")
        values = {k: v for k, v in data.items() if k not in ("schema_version", "provenance")}
        return cls.from_mapping(values, data.get("provenance") or {})


def validate(v: TermVector) -> list[Violation]:
    """All invariant violations of ``v``; empty when it is a well-formed vector."""
    out: list[Violation] = []
    for key in v.values:
        if not isinstance(key, TermKind):
            out.append(Violation(str(key), v.values[key], "unknown term kind"))
    for kind in ALL_KINDS:
        if kind not in v.values:
            out.append(Violation(kind.value, None, "missing (completeness)"))
            continue
        problem = value_violation(kind, v.values[kind])
        if problem:
            out.append(Violation(kind.value, v.values[kind], problem))
    return out


def check_valid(v: TermVector) -> None:
    problems = validate(v)
    if problems:
        raise ValidationError(problems)


def obligation_set(v: TermVector) -> frozenset[str]:
    """Tokens for the obligations and restrictions ``v`` imposes.

    A binary kind contributes its name when set to 1, patent_grant when it
    is -1 (patents withheld). Copyright and copyleft are graded levels
    rather than obligations and are left out; each usage limitation tag
    contributes ``usage:<tag>``.
    """
    tokens: set[str] = set()
    for kind in SCALAR_KINDS:
        if kind in (TermKind.COPYLEFT, TermKind.COPYRIGHT):
            continue
        value = v.values.get(kind)
        if value is not None and value == most_restrictive_value(kind):
            tokens.add(kind.value)
    for tag in v.values.get(TermKind.USAGE_LIMITATION) or ():
        tokens.add(f"usage:{tag}")
    return frozenset(tokens)


def pointwise_max(a: TermVector, b: TermVector) -> TermVector:
    return TermVector(
        {k: restrictiveness_max(k, a[k], b[k]) for k in ALL_KINDS},
        {k: Provenance.CONFLICT for k in ALL_KINDS},
    )


def parse_kind_list(names: Iterable[str]) -> set[TermKind]:
    return {TermKind(n) for n in names}
