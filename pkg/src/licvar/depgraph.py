"""Package metadata index and installer-style dependency resolution.

The index is a directory with one JSON metadata file per release at
``<name>/<version>.json``::

    {
      "name": "example-pkg",
      "version": "1.2.0",
      "requires_dist": ["requests>=2.0", "rich[jupyter]; extra == 'ui'"],
      "license": "MIT",
      "classifiers": ["License :: OSI Approved :: MIT License"],
      "license_file": "MIT License\\n\\nCopyright (c) ..."
    }

Only ``name`` and ``version`` are required. Resolution walks requirements
breadth first and keeps the first version chosen for each name, with no
backtracking.
"""

from __future__ import annotations

import json
import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Iterator

from packaging.requirements import InvalidRequirement, Requirement
from packaging.utils import canonicalize_name
from packaging.version import InvalidVersion, Version

from licvar.errors import NotFoundError, SchemaError

log = logging.getLogger(__name__)


def normalize_name(name: str) -> str:
    return canonicalize_name(name)


@dataclass(frozen=True)
class PackageRelease:
    name: str
    version: str
    requires: tuple[str, ...] = ()
    license_file: str | None = None
    license_field: str | None = None
    classifiers: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "name", normalize_name(self.name))
        Version(self.version)  # raises InvalidVersion

    @property
    def parsed_version(self) -> Version:
        return Version(self.version)

    @property
    def ref(self) -> str:
        return f"{self.name}=={self.version}"

    def requirements(self) -> list[Requirement]:
        return [Requirement(r) for r in self.requires]

    def to_json_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {"name": self.name, "version": self.version,
                                "requires_dist": list(self.requires)}
        if self.license_field is not None:
            data["license"] = self.license_field
        if self.classifiers:
            data["classifiers"] = list(self.classifiers)
        if self.license_file is not None:
            data["license_file"] = self.license_file
        return data


def _release_from_json(data: Any, path: Path) -> PackageRelease:
    if not isinstance(data, dict):
        raise SchemaError(path, "<document>", "expected a JSON object")
    for key in ("name", "version"):
        if not isinstance(data.get(key), str) or not data[key].strip():
            raise SchemaError(path, key, "required non-empty string")
    requires = data.get("requires_dist") or []
    if not isinstance(requires, list) or not all(isinstance(r, str) for r in requires):
        raise SchemaError(path, "requires_dist", "expected a list of strings")
    for n, req in enumerate(requires):
        try:
            Requirement(req)
        except InvalidRequirement as exc:
            raise SchemaError(path, f"requires_dist[{n}]", str(exc)) from exc
    classifiers = data.get("classifiers") or []
    if not isinstance(classifiers, list) or not all(isinstance(c, str) for c in classifiers):
        raise SchemaError(path, "classifiers", "expected a list of strings")
    for key in ("license", "license_file"):
        if data.get(key) is not None and not isinstance(data[key], str):
            raise SchemaError(path, key, "expected a string")
    try:
        return PackageRelease(
            name=data["name"],
            version=data["version"].strip(),
            requires=tuple(requires),
            license_file=data.get("license_file"),
            license_field=data.get("license"),
            classifiers=tuple(classifiers),
        )
    except InvalidVersion as exc:
        raise SchemaError(path, "version", str(exc)) from exc


class PackageIndex:
    """Immutable set of releases keyed by normalized name and version."""

    def __init__(self, releases: list[PackageRelease] = ()):  # type: ignore[assignment]
        by_name: dict[str, dict[Version, PackageRelease]] = {}
        for rel in releases:
            versions = by_name.setdefault(rel.name, {})
            if rel.parsed_version in versions:
                raise ValueError(f"duplicate release {rel.ref}")
            versions[rel.parsed_version] = rel
        self._releases = {
            name: dict(sorted(versions.items())) for name, versions in sorted(by_name.items())
        }

    def __len__(self) -> int:
        return len(self._releases)

    def __contains__(self, name: object) -> bool:
        return isinstance(name, str) and normalize_name(name) in self._releases

    def names(self) -> list[str]:
        return list(self._releases)

    def releases(self, name: str) -> list[PackageRelease]:
        """All releases of ``name``, oldest first."""
        return list(self._releases.get(normalize_name(name), {}).values())

    def __iter__(self) -> Iterator[PackageRelease]:
        for versions in self._releases.values():
            yield from versions.values()

    def get(self, name: str, version: str | None = None) -> PackageRelease:
        """A release by name and version; the newest one when ``version`` is None."""
        versions = self._releases.get(normalize_name(name))
        if not versions:
            raise NotFoundError(f"package {name!r} is not in the index")
        if version is None:
            return next(reversed(versions.values()))
        try:
            return versions[Version(version)]
        except (InvalidVersion, KeyError):
            raise NotFoundError(f"release {name}=={version} is not in the index") from None


def load_index(path: str | Path) -> PackageIndex:
    """Read every ``<name>/<version>.json`` file below ``path``."""
    root = Path(path)
    if not root.is_dir():
        raise NotFoundError(f"index directory {root} does not exist")
    releases: list[PackageRelease] = []
    seen: dict[tuple[str, Version], Path] = {}
    for file in sorted(root.glob("*/*.json")):
        try:
            data = json.loads(file.read_text(encoding="utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise SchemaError(file, "<document>", f"invalid JSON ({exc})") from exc
        rel = _release_from_json(data, file)
        if rel.name != normalize_name(file.parent.name):
            raise SchemaError(file, "name", f"{rel.name!r} does not match directory {file.parent.name!r}")
        key = (rel.name, rel.parsed_version)
        if key in seen:
            raise SchemaError(file, "version", f"duplicate release {rel.ref} (also in {seen[key]})")
        seen[key] = file
        releases.append(rel)
    log.debug("loaded %d releases from %s", len(releases), root)
    return PackageIndex(releases)


# ----------------------------------------------------------------- resolve


@dataclass(frozen=True)
class TreeNode:
    name: str
    version: str
    depth: int
    parent: str | None  # None for the root
    requirement: str | None  # the specifier that selected this node


@dataclass(frozen=True)
class LogEntry:
    parent: str
    requirement: str
    chosen: str | None
    note: str

    def __str__(self) -> str:
        return f"{self.parent}: {self.requirement} -> {self.chosen or '-'} ({self.note})"


@dataclass
class DependencyTree:
    root: PackageRelease
    nodes: list[TreeNode]  # breadth-first order, root first
    resolution_log: list[LogEntry] = field(default_factory=list)

    @property
    def edges(self) -> dict[str, list[TreeNode]]:
        out: dict[str, list[TreeNode]] = {}
        for node in self.nodes[1:]:
            assert node.parent is not None
            out.setdefault(node.parent, []).append(node)
        return out

    def pinned(self) -> dict[str, str]:
        return {n.name: n.version for n in self.nodes}

    def node(self, name: str) -> TreeNode:
        name = normalize_name(name)
        for n in self.nodes:
            if n.name == name:
                return n
        raise NotFoundError(f"{name} is not in the tree")

    def dependencies(self) -> list[TreeNode]:
        return self.nodes[1:]

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "root": {"name": self.root.name, "version": self.root.version},
            "nodes": [
                {"name": n.name, "version": n.version, "depth": n.depth, "parent": n.parent,
                 "requirement": n.requirement}
                for n in self.nodes
            ],
            "resolution_log": [
                {"parent": e.parent, "requirement": e.requirement, "chosen": e.chosen,
                 "note": e.note}
                for e in self.resolution_log
            ],
        }

    def render(self) -> str:
        children = self.edges
        lines: list[str] = []

        def walk(name: str, version: str, indent: int) -> None:
            lines.append(f"{'  ' * indent}{name} {version}")
            for child in children.get(name, []):
                walk(child.name, child.version, indent + 1)

        walk(self.root.name, self.root.version, 0)
        for entry in self.resolution_log:
            if entry.note != "resolved":
                lines.append(f"note: {entry}")
        return "\n".join(lines)


def _applies(req: Requirement, extras: frozenset[str], log_to: list[LogEntry], parent: str) -> bool:
    if req.marker is None:
        return True
    marker = str(req.marker)
    if "extra" in marker:
        # optional dependency: only when the parent was requested with that extra
        if any(req.marker.evaluate({"extra": e}) for e in extras):
            return True
        log_to.append(LogEntry(parent, str(req), None, "skipped, extra not requested"))
        return False
    log_to.append(LogEntry(parent, str(req), None, f"marker '{marker}' assumed true"))
    return True


def resolve(name: str, version: str | None, index: PackageIndex) -> DependencyTree:
    """Breadth-first resolution from ``name``/``version``.

    Each requirement takes the highest index version its specifier allows.
    A name is resolved once; later requirements on it are only logged, even
    when they disagree with the earlier choice.
    """
    root = index.get(name, version)
    nodes = [TreeNode(root.name, root.version, 0, None, None)]
    chosen: dict[str, str] = {root.name: root.version}
    log_entries: list[LogEntry] = []
    queue: deque[tuple[PackageRelease, int, frozenset[str]]] = deque([(root, 0, frozenset())])
    while queue:
        rel, depth, extras = queue.popleft()
        for req in rel.requirements():
            if not _applies(req, extras, log_entries, rel.ref):
                continue
            dep = normalize_name(req.name)
            if req.extras:
                log_entries.append(LogEntry(rel.ref, str(req), None,
                                            f"extras {sorted(req.extras)} requested"))
            if dep in chosen:
                ok = req.specifier.contains(chosen[dep], prereleases=True)
                note = "already resolved" if ok else "conflict ignored, first resolution kept"
                log_entries.append(LogEntry(rel.ref, str(req), f"{dep}=={chosen[dep]}", note))
                continue
            candidates = [r.version for r in index.releases(dep)]
            best = max(req.specifier.filter(candidates), key=Version, default=None)
            if best is None:
                reason = "not in index" if not candidates else "no version satisfies the specifier"
                log_entries.append(LogEntry(rel.ref, str(req), None, f"unresolvable: {reason}"))
                continue
            chosen[dep] = best
            nodes.append(TreeNode(dep, best, depth + 1, rel.name, str(req)))
            log_entries.append(LogEntry(rel.ref, str(req), f"{dep}=={best}", "resolved"))
            queue.append((index.get(dep, best), depth + 1, frozenset(req.extras)))
    return DependencyTree(root, nodes, log_entries)


# ----------------------------------------------------------------- evidence


class EvidenceKind(str, Enum):
    LICENSE_FILE = "license-file"
    METADATA = "metadata-field"
    CLASSIFIER = "classifier"


@dataclass(frozen=True)
class LicenseEvidence:
    kind: EvidenceKind
    text: str
    spdx: str | None = None  # classifier mapped to an SPDX id, when unambiguous


@lru_cache(maxsize=1)
def classifier_table() -> dict[str, str | None]:
    raw = (resources.files("licvar") / "data" / "classifiers.json").read_text(encoding="utf-8")
    return dict(json.loads(raw)["classifiers"])


_PLACEHOLDERS = {"", "unknown", "none", "n/a", "na", "other", "license"}


def extract_license_sources(release: PackageRelease) -> list[LicenseEvidence]:
    """License evidence for a release, strongest first.

    An empty list means the release is unrecognized.
    """
    evidence: list[LicenseEvidence] = []
    if release.license_file and release.license_file.strip():
        evidence.append(LicenseEvidence(EvidenceKind.LICENSE_FILE, release.license_file))
    field_text = (release.license_field or "").strip()
    if field_text.lower() not in _PLACEHOLDERS:
        evidence.append(LicenseEvidence(EvidenceKind.METADATA, field_text))
    table = classifier_table()
    for classifier in release.classifiers:
        if classifier.startswith("License ::"):
            evidence.append(LicenseEvidence(EvidenceKind.CLASSIFIER, classifier,
                                            table.get(classifier)))
    return evidence
