"""Pairwise license compatibility.

``check`` decides which of secondary and combinative compatibility hold when
a downstream work under one license depends on an upstream work under
another. Upstream exceptions are handled by a rule table shipped as data.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

from licvar.errors import SchemaError, UnknownLicenseError
from licvar.model import LicenseId, TermKind, TermVector, check_valid, obligation_set

log = logging.getLogger(__name__)


class VerdictKind(str, Enum):
    SECONDARY = "Secondary"
    COMBINATIVE = "Combinative"
    INCOMPATIBLE = "Incompatible"

    @property
    def symbol(self) -> str:
        return self.value[0]

    def __str__(self) -> str:
        return self.value


S, C, I = VerdictKind.SECONDARY, VerdictKind.COMBINATIVE, VerdictKind.INCOMPATIBLE


@dataclass(frozen=True)
class TraceStep:
    rule: str
    inputs: str
    outcome: str

    def __str__(self) -> str:
        return f"{self.rule}: {self.inputs} -> {self.outcome}"


@dataclass(frozen=True)
class CompatibilityVerdict:
    kinds: frozenset[VerdictKind]
    trace: tuple[TraceStep, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "kinds", frozenset(VerdictKind(k) for k in self.kinds))
        if not self.kinds:
            raise ValueError("a verdict needs at least one kind")
        if I in self.kinds and len(self.kinds) > 1:
            raise ValueError("Incompatible cannot be combined with other kinds")
        if not self.trace:
            raise ValueError("a verdict needs a trace")

    @property
    def compatible(self) -> bool:
        return I not in self.kinds

    @property
    def label(self) -> str:
        """Compact form such as ``{S,C}`` or ``{I}``."""
        order = [k for k in (S, C, I) if k in self.kinds]
        return "{" + ",".join(k.symbol for k in order) + "}"

    def explain(self) -> str:
        return "\n".join(str(step) for step in self.trace)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "kinds": [k.value for k in (S, C, I) if k in self.kinds],
            "trace": [{"rule": t.rule, "inputs": t.inputs, "outcome": t.outcome} for t in self.trace],
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> CompatibilityVerdict:
        return cls(
            frozenset(VerdictKind(k) for k in data["kinds"]),
            tuple(TraceStep(t["rule"], t["inputs"], t["outcome"]) for t in data["trace"]),
        )


@dataclass(frozen=True)
class ExceptionRule:
    id: str
    exception: str
    add: frozenset[VerdictKind]
    remove: frozenset[VerdictKind] = frozenset()
    downstream: frozenset[str] | None = None  # None: any downstream license
    note: str = ""

    def matches(self, upstream_tags: Iterable[str], downstream: LicenseId) -> bool:
        if self.exception not in set(upstream_tags):
            return False
        return self.downstream is None or downstream.identifier in self.downstream

    def apply(self, kinds: set[VerdictKind]) -> set[VerdictKind]:
        return (kinds | self.add) - self.remove


@dataclass(frozen=True)
class ExceptionRuleTable:
    rules: tuple[ExceptionRule, ...]

    @property
    def known_exceptions(self) -> frozenset[str]:
        return frozenset(r.exception for r in self.rules)

    @classmethod
    def from_json(cls, data: Any, source: str | Path = "<rules>") -> ExceptionRuleTable:
        if not isinstance(data, dict) or not isinstance(data.get("rules"), list):
            raise SchemaError(source, "rules", "expected an object with a 'rules' list")
        if data.get("schema_version") != 1:
            raise SchemaError(source, "schema_version", f"unsupported {data.get('schema_version')!r}")
        rules: list[ExceptionRule] = []
        for n, raw in enumerate(data["rules"]):
            where = f"rules[{n}]"
            try:
                effects = {
                    key: frozenset(VerdictKind(k) for k in raw.get(key, ()))
                    for key in ("add", "remove")
                }
                rule = ExceptionRule(
                    id=str(raw["id"]),
                    exception=str(raw["exception"]),
                    add=effects["add"],
                    remove=effects["remove"],
                    downstream=(frozenset(raw["downstream"]) if raw.get("downstream") is not None
                                else None),
                    note=str(raw.get("note", "")),
                )
            except (KeyError, TypeError, ValueError, AttributeError) as exc:
                raise SchemaError(source, where, f"malformed rule ({exc})") from exc
            if I in rule.add | rule.remove:
                raise SchemaError(source, where, "rules may only add or remove Secondary/Combinative")
            rules.append(rule)
        ids = [r.id for r in rules]
        if len(set(ids)) != len(ids):
            raise SchemaError(source, "rules", "duplicate rule id")
        return cls(tuple(sorted(rules, key=lambda r: r.id)))


@lru_cache(maxsize=1)
def default_rules() -> ExceptionRuleTable:
    raw = (resources.files("licvar") / "data" / "exception_rules.json").read_text(encoding="utf-8")
    return ExceptionRuleTable.from_json(json.loads(raw), "exception_rules.json")


def load_rules(path: str | Path) -> ExceptionRuleTable:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(path, "<document>", f"invalid JSON ({exc})") from exc
    return ExceptionRuleTable.from_json(data, path)


# --------------------------------------------------------------------- core


def is_free(v: TermVector) -> bool:
    """Free license: some copyright permission is granted (value 1, 2 or 3)."""
    return v[TermKind.COPYRIGHT] in (1, 2, 3)


def _lists(t1: TermVector) -> tuple[set[str], set[str], set[str]]:
    return (
        set(t1.licenses(TermKind.COMPATIBLE_VERSION)),
        set(t1.licenses(TermKind.SECONDARY_LICENSE)),
        set(t1.licenses(TermKind.GPL_COMBINATION)),
    )


def _secondary(t1: TermVector, t2: TermVector, l2: LicenseId) -> tuple[bool, str]:
    c1, c2 = t1.copyleft, t2.copyleft
    versions, secondary, _ = _lists(t1)
    subset = obligation_set(t1) <= obligation_set(t2)
    in_v = l2.identifier in versions
    in_s = l2.identifier in secondary
    relicensable = subset or in_v or in_s
    if c1 == 0:
        result = relicensable
    else:
        # also require that the downstream grants copyright permissions at all
        result = c2 >= c1 and t2.copyright != 0 and relicensable
    inputs = (f"c1={c1} c2={c2} t1<=t2={subset} L2 in V={in_v} L2 in S={in_s}"
              f" downstream copyright={t2.copyright}")
    return result, inputs


def _combinative(t1: TermVector, t2: TermVector, l2: LicenseId) -> tuple[bool, str]:
    c1, c2 = t1.copyleft, t2.copyleft
    _, _, combinable = _lists(t1)
    in_g = l2.identifier in combinable
    result = (
        (c1 == 0 and c2 in (0, 1))
        or (c1 in (1, 2) and c2 in (0, 1))
        or (c1 > 0 and in_g)
    )
    return result, f"c1={c1} c2={c2} L2 in G={in_g}"


def is_secondary_compatible(t1: TermVector, t2: TermVector, l2: LicenseId) -> bool:
    """Whether the upstream work may be relicensed entirely under ``l2``."""
    return _secondary(t1, t2, l2)[0]


def is_combinative_compatible(t1: TermVector, t2: TermVector, l2: LicenseId) -> bool:
    """Whether the downstream project may keep ``l2`` with the upstream part
    retaining its own license."""
    return _combinative(t1, t2, l2)[0]


def apply_exception_rules(
    verdict: CompatibilityVerdict | frozenset[VerdictKind] | set[VerdictKind],
    t1: TermVector,
    t2: TermVector,
    l2: LicenseId,
    rules: ExceptionRuleTable | None = None,
) -> CompatibilityVerdict:
    """Apply the upstream exception rules, in rule-id order.

    Tags the table does not know leave the verdict unchanged and only add a
    trace note. An empty result becomes Incompatible.
    """
    rules = rules or default_rules()
    if isinstance(verdict, CompatibilityVerdict):
        kinds = set(verdict.kinds) - {I}
        trace = list(verdict.trace)
    else:
        kinds = set(verdict) - {I}
        trace = []
    tags = t1.licenses(TermKind.EXCEPTION)
    for rule in rules.rules:
        if rule.matches(tags, l2):
            before = _label(kinds)
            kinds = rule.apply(kinds)
            trace.append(TraceStep(f"exception:{rule.id}", f"{rule.exception}; {before}",
                                   _label(kinds)))
    for tag in sorted(set(tags) - rules.known_exceptions):
        trace.append(TraceStep("exception-unknown", tag, "no rule, verdict unchanged"))
    return _finish(kinds, trace)


def _label(kinds: set[VerdictKind]) -> str:
    return "{" + ",".join(k.symbol for k in (S, C, I) if k in kinds) + "}"


def _finish(kinds: set[VerdictKind], trace: list[TraceStep]) -> CompatibilityVerdict:
    if not kinds:
        trace.append(TraceStep("no-compatibility", "neither secondary nor combinative", "{I}"))
        kinds = {I}
    if not trace:
        trace.append(TraceStep("verdict", "", _label(kinds)))
    return CompatibilityVerdict(frozenset(kinds), tuple(trace))


def check(
    upstream: tuple[LicenseId, TermVector],
    downstream: tuple[LicenseId, TermVector],
    rules: ExceptionRuleTable | None = None,
) -> CompatibilityVerdict:
    """Compatibility of a downstream work under ``downstream`` that depends on
    an upstream work under ``upstream``."""
    (l1, t1), (l2, t2) = upstream, downstream
    check_valid(t1)
    check_valid(t2)
    if not is_free(t1) and is_free(t2):
        return CompatibilityVerdict(
            frozenset({I}),
            (TraceStep(
                "proprietary-upstream",
                f"{l1} copyright={t1.copyright}; {l2} is free (copyright={t2.copyright})",
                "{I}",
            ),),
        )
    if l1.identifier == l2.identifier:
        return CompatibilityVerdict(
            frozenset({S, C}),
            (TraceStep("identical-license", f"{l1} = {l2}", "{S,C}"),),
        )
    kinds: set[VerdictKind] = set()
    trace: list[TraceStep] = []
    ok, inputs = _secondary(t1, t2, l2)
    trace.append(TraceStep("secondary", inputs, str(ok).lower()))
    if ok:
        kinds.add(S)
    ok, inputs = _combinative(t1, t2, l2)
    trace.append(TraceStep("combinative", inputs, str(ok).lower()))
    if ok:
        kinds.add(C)
    if t1.licenses(TermKind.EXCEPTION):
        return apply_exception_rules(CompatibilityVerdict(frozenset(kinds) or {I}, tuple(trace)),
                                     t1, t2, l2, rules)
    return _finish(kinds, trace)


def check_ids(upstream: str, downstream: str, kb: Any,
              rules: ExceptionRuleTable | None = None) -> CompatibilityVerdict:
    """``check`` for two license ids looked up in a knowledge base.

    Raises :class:`UnknownLicenseError` rather than guessing when either id
    is not in the knowledge base.
    """
    found = []
    for ident in (upstream, downstream):
        lic = kb.get(ident)
        if lic is None:
            raise UnknownLicenseError(f"license {ident!r} is not in the knowledge base")
        found.append((lic.id, lic.term_vector))
    return check(found[0], found[1], rules)
