"""package.json parsing, dependency spec classification, lockfile detection."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .semver import RangeExpr, SemverError, Version, parse_range, parse_version


class ManifestError(ValueError):
    pass


class SpecKind(str, Enum):
    REGISTRY_RANGE = "registry_range"
    URL = "url"
    GIT = "git"
    FILE = "file"
    TAG = "tag"
    UNPARSEABLE = "unparseable"


@dataclass(frozen=True)
class ConstraintSpec:
    kind: SpecKind
    raw: str
    range: RangeExpr | None = None

    @property
    def is_registry(self) -> bool:
        return self.kind is SpecKind.REGISTRY_RANGE


@dataclass
class Manifest:
    name: str
    version: Version
    runtime_deps: dict = field(default_factory=dict)
    dev_deps: dict = field(default_factory=dict)
    optional_deps: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)


LOCKFILE_NAMES = {
    "package-lock.json": "package-lock",
    "npm-shrinkwrap.json": "shrinkwrap",
    "yarn.lock": "yarn-lock",
}


@dataclass(frozen=True)
class LockfileStatus:
    present: bool
    which: frozenset = frozenset()


_GIT_PREFIXES = ("git:", "git+ssh:", "git+http:", "git+https:", "git+file:", "github:")
_GIT_SHORTHAND_RE = re.compile(r"^[\w.-]+/[\w.-]+(#.+)?$")
_TAG_RE = re.compile(r"^[A-Za-z][\w.-]*$")
_ALIAS_RE = re.compile(r"^npm:(?P<name>@?[^@]+)@(?P<spec>.+)$")


def classify_spec(raw: str) -> ConstraintSpec:
    """Classify a raw dependency string; total, never raises."""
    text = raw.strip()
    alias = _ALIAS_RE.match(text)
    if alias:
        inner = classify_spec(alias.group("spec"))
        return ConstraintSpec(inner.kind, raw, inner.range)
    lower = text.lower()
    if lower.startswith(_GIT_PREFIXES):
        return ConstraintSpec(SpecKind.GIT, raw)
    if lower.startswith(("http://", "https://")):
        return ConstraintSpec(SpecKind.URL, raw)
    if lower.startswith(("file:", "link:", "./", "../", "/", "~/")):
        return ConstraintSpec(SpecKind.FILE, raw)
    try:
        return ConstraintSpec(SpecKind.REGISTRY_RANGE, raw, parse_range(text))
    except SemverError:
        pass
    if _GIT_SHORTHAND_RE.match(text):  # owner/repo shorthand
        return ConstraintSpec(SpecKind.GIT, raw)
    if _TAG_RE.match(text):  # dist-tags like "latest", "next"
        return ConstraintSpec(SpecKind.TAG, raw)
    return ConstraintSpec(SpecKind.UNPARSEABLE, raw)


def _dep_map(doc: dict, key: str, warnings: list) -> dict:
    section = doc.get(key)
    if section is None:
        return {}
    if not isinstance(section, tuple):
        raise ManifestError(f"{key!r} section is not an object")
    out = {}
    for name, spec in section:
        if name in out:
            warnings.append(f"duplicate dependency key {name!r} in {key}; last wins")
        out[name] = str(spec)
    return out


def _pairs(pairs):
    # Dependency sections keep their raw pairs so key collisions stay
    # visible; a tuple keeps decoded objects distinguishable from arrays.
    return tuple(pairs)


def parse_manifest(document: bytes | str) -> Manifest:
    """Parse a package.json document."""
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        raw = json.loads(document, object_pairs_hook=_pairs)
    except json.JSONDecodeError as e:
        raise ManifestError(f"malformed manifest document: {e}") from e
    if not isinstance(raw, tuple):
        raise ManifestError("manifest document is not an object")
    doc = {}
    for k, v in raw:
        doc[k] = v
    name = doc.get("name")
    if not name or not isinstance(name, str):
        raise ManifestError("manifest is missing a package name")
    try:
        version = parse_version(str(doc.get("version", "")))
    except SemverError as e:
        raise ManifestError(f"manifest has an unparseable version: {e}") from e
    warnings: list = []
    return Manifest(
        name=name,
        version=version,
        runtime_deps=_dep_map(doc, "dependencies", warnings),
        dev_deps=_dep_map(doc, "devDependencies", warnings),
        optional_deps=_dep_map(doc, "optionalDependencies", warnings),
        warnings=warnings,
    )


def serialize_manifest(m: Manifest) -> bytes:
    doc = {"name": m.name, "version": str(m.version)}
    if m.runtime_deps:
        doc["dependencies"] = dict(m.runtime_deps)
    if m.dev_deps:
        doc["devDependencies"] = dict(m.dev_deps)
    if m.optional_deps:
        doc["optionalDependencies"] = dict(m.optional_deps)
    return json.dumps(doc, indent=2).encode("utf-8")


def detect_lockfile(project_dir) -> LockfileStatus:
    """Check the project root (only) for the three npm lockfile names."""
    root = Path(project_dir)
    if not root.is_dir():
        raise OSError(f"not a readable directory: {root}")
    found = frozenset(
        label for fname, label in LOCKFILE_NAMES.items() if (root / fname).is_file()
    )
    return LockfileStatus(present=bool(found), which=found)
