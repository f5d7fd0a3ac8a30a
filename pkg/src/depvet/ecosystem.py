"""Immutable time-stamped ecosystem snapshots.

Holds releases, dependency edges and advisories; supports loading the
line-delimited interchange files, time-travel constraint resolution, and
live packument ingestion from an npm-style registry.
"""

from __future__ import annotations

import json
import urllib.parse
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .manifest import SpecKind, classify_spec
from .semver import (
    RangeExpr,
    SemverError,
    Version,
    max_satisfying,
    parse_range,
    parse_version,
    satisfies,
)

SECONDS_PER_DAY = 86400.0

SEVERITIES = ("critical", "high", "medium", "low")


class SnapshotError(ValueError):
    pass


class RegistryError(RuntimeError):
    pass


class PackageNotFound(RegistryError):
    pass


def parse_timestamp(text: str) -> float:
    """RFC 3339 timestamp -> POSIX seconds (UTC)."""
    try:
        dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError as e:
        raise SnapshotError(f"invalid timestamp {text!r}: {e}") from e
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def format_timestamp(ts: float) -> str:
    dt = datetime.fromtimestamp(ts, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class Release:
    version: Version
    published_at: float  # POSIX seconds, UTC


@dataclass(frozen=True)
class DepEdge:
    dep_name: str
    constraint: str
    kind: str  # runtime | dev | optional


@dataclass(frozen=True)
class Advisory:
    id: str
    package: str
    severity: str
    affected: RangeExpr
    first_fixed: Version
    disclosed_at: float
    fix_released_at: float


@dataclass
class Snapshot:
    releases: dict = field(default_factory=dict)  # name -> [Release] by time
    dep_edges: dict = field(default_factory=dict)  # (name, Version) -> [DepEdge]
    advisories: list = field(default_factory=list)
    horizon: float = 0.0

    _range_cache: dict = field(default_factory=dict, repr=False)

    def parse_range_cached(self, text: str) -> RangeExpr:
        r = self._range_cache.get(text)
        if r is None:
            r = parse_range(text)
            self._range_cache[text] = r
        return r

    def packages(self):
        return self.releases.keys()

    def releases_of(self, pkg: str):
        return self.releases.get(pkg, [])

    def edges_of(self, pkg: str, version: Version):
        return self.dep_edges.get((pkg, version), [])

    def advisory_by_id(self, advisory_id: str) -> Advisory:
        for a in self.advisories:
            if a.id == advisory_id:
                return a
        raise KeyError(f"unknown advisory id {advisory_id!r}")


def _sorted_releases(entries):
    # Same-timestamp ties break toward higher SemVer precedence: the later
    # list position is treated as "current".
    return sorted(entries, key=lambda r: (r.published_at, r.version))


def latest_release_at(s: Snapshot, pkg: str, at: float):
    """The release with the greatest published_at <= at, or None."""
    best = None
    for rel in s.releases_of(pkg):
        if rel.published_at <= at:
            best = rel  # list is (time, version)-sorted
        else:
            break
    return best


def resolve_at(s: Snapshot, pkg: str, r: RangeExpr, at: float,
               include_prerelease: bool = False):
    """max_satisfying over the versions published by `at`."""
    published = [rel.version for rel in s.releases_of(pkg)
                 if rel.published_at <= at]
    return max_satisfying(published, r, include_prerelease)


def dependents_of(s: Snapshot, pkg: str) -> set:
    """Packages with at least one runtime dep edge naming pkg."""
    out = set()
    for (name, _version), edges in s.dep_edges.items():
        if name == pkg:
            continue
        for e in edges:
            if e.dep_name == pkg and e.kind == "runtime":
                out.add(name)
                break
    return out


# --- interchange files --------------------------------------------------------


def _read_records(path):
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as e:
                raise SnapshotError(f"{path}:{lineno}: malformed record: {e}") from e


def _require(rec, key, path, lineno):
    if key not in rec:
        raise SnapshotError(f"{path}:{lineno}: missing field {key!r}")
    return rec[key]


def load_snapshot(releases_file, deps_file, advisories_file=None) -> Snapshot:
    """Load and validate a snapshot from line-delimited record files."""
    s = Snapshot()
    raw_releases: dict = {}
    for lineno, rec in _read_records(releases_file):
        pkg = _require(rec, "package", releases_file, lineno)
        try:
            version = parse_version(_require(rec, "version", releases_file, lineno))
        except SemverError as e:
            raise SnapshotError(f"{releases_file}:{lineno}: {e}") from e
        ts = parse_timestamp(_require(rec, "published_at", releases_file, lineno))
        raw_releases.setdefault(pkg, []).append(Release(version, ts))
    for pkg, entries in raw_releases.items():
        ordered = _sorted_releases(entries)
        s.releases[pkg] = ordered
        for rel in ordered:
            if rel.published_at > s.horizon:
                s.horizon = rel.published_at

    if deps_file is not None:
        for lineno, rec in _read_records(deps_file):
            pkg = _require(rec, "package", deps_file, lineno)
            try:
                version = parse_version(_require(rec, "version", deps_file, lineno))
            except SemverError as e:
                raise SnapshotError(f"{deps_file}:{lineno}: {e}") from e
            key = (pkg, version)
            if pkg not in s.releases or all(r.version != version for r in s.releases[pkg]):
                raise SnapshotError(
                    f"{deps_file}:{lineno}: dangling dependency edge: "
                    f"{pkg}@{version} is not a known release")
            edge = DepEdge(
                _require(rec, "dep_name", deps_file, lineno),
                str(_require(rec, "constraint", deps_file, lineno)),
                rec.get("kind", "runtime"),
            )
            if edge.kind not in ("runtime", "dev", "optional"):
                raise SnapshotError(f"{deps_file}:{lineno}: bad dep kind {edge.kind!r}")
            s.dep_edges.setdefault(key, []).append(edge)

    if advisories_file is not None:
        for lineno, rec in _read_records(advisories_file):
            pkg = _require(rec, "package", advisories_file, lineno)
            if pkg not in s.releases:
                raise SnapshotError(
                    f"{advisories_file}:{lineno}: advisory references unknown "
                    f"package {pkg!r}")
            try:
                affected = parse_range(_require(rec, "affected", advisories_file, lineno))
                first_fixed = parse_version(
                    _require(rec, "first_fixed", advisories_file, lineno))
            except SemverError as e:
                raise SnapshotError(f"{advisories_file}:{lineno}: {e}") from e
            severity = _require(rec, "severity", advisories_file, lineno)
            if severity not in SEVERITIES:
                raise SnapshotError(
                    f"{advisories_file}:{lineno}: bad severity {severity!r}")
            if satisfies(first_fixed, affected, include_prerelease=True):
                raise SnapshotError(
                    f"{advisories_file}:{lineno}: first_fixed {first_fixed} "
                    "satisfies the affected range")
            fix_rel = [r for r in s.releases[pkg] if r.version == first_fixed]
            if not fix_rel:
                raise SnapshotError(
                    f"{advisories_file}:{lineno}: first_fixed {pkg}@{first_fixed} "
                    "is not a release in the snapshot")
            adv = Advisory(
                id=_require(rec, "id", advisories_file, lineno),
                package=pkg,
                severity=severity,
                affected=affected,
                first_fixed=first_fixed,
                disclosed_at=parse_timestamp(
                    _require(rec, "disclosed_at", advisories_file, lineno)),
                fix_released_at=parse_timestamp(
                    _require(rec, "fix_released_at", advisories_file, lineno)),
            )
            s.advisories.append(adv)
            if adv.fix_released_at > s.horizon:
                s.horizon = adv.fix_released_at
    return s


def save_snapshot(s: Snapshot, releases_file, deps_file, advisories_file=None):
    """Write a snapshot back to the interchange format."""
    with open(releases_file, "w", encoding="utf-8") as fh:
        for pkg in sorted(s.releases):
            for rel in s.releases[pkg]:
                fh.write(json.dumps({
                    "package": pkg,
                    "version": str(rel.version),
                    "published_at": format_timestamp(rel.published_at),
                }) + "\n")
    with open(deps_file, "w", encoding="utf-8") as fh:
        for (pkg, version) in sorted(s.dep_edges, key=lambda k: (k[0], k[1])):
            for e in s.dep_edges[(pkg, version)]:
                fh.write(json.dumps({
                    "package": pkg,
                    "version": str(version),
                    "dep_name": e.dep_name,
                    "constraint": e.constraint,
                    "kind": e.kind,
                }) + "\n")
    if advisories_file is not None:
        with open(advisories_file, "w", encoding="utf-8") as fh:
            for a in s.advisories:
                fh.write(json.dumps({
                    "id": a.id,
                    "package": a.package,
                    "severity": a.severity,
                    "affected": a.affected.raw,
                    "first_fixed": str(a.first_fixed),
                    "disclosed_at": format_timestamp(a.disclosed_at),
                    "fix_released_at": format_timestamp(a.fix_released_at),
                }) + "\n")


# --- registry client ----------------------------------------------------------

DEFAULT_REGISTRY = "https://registry.npmjs.org"


def fetch_packument(registry_base: str, pkg: str, session=None, timeout=30.0):
    """Fetch a package's registry metadata document.

    Returns (releases, dep_edges) in snapshot shape for a single package.
    Never partial-merges: raises on any malformed document.
    """
    import requests

    url = f"{registry_base.rstrip('/')}/{urllib.parse.quote(pkg, safe='@')}"
    http = session or requests
    try:
        resp = http.get(url, timeout=timeout,
                        headers={"Accept": "application/json"})
    except Exception as e:  # transport failure
        raise RegistryError(f"request for {pkg!r} failed: {e}") from e
    if resp.status_code == 404:
        raise PackageNotFound(f"package {pkg!r} not found at {registry_base}")
    if resp.status_code != 200:
        raise RegistryError(f"registry returned {resp.status_code} for {pkg!r}")
    doc = resp.json()
    time_map = doc.get("time")
    if not isinstance(time_map, dict):
        raise RegistryError(f"packument for {pkg!r} has no time map")
    versions = doc.get("versions", {})
    releases = []
    dep_edges = {}
    for vtext, vdoc in versions.items():
        try:
            version = parse_version(vtext)
        except SemverError:
            continue  # registries occasionally hold junk version keys
        if vtext not in time_map:
            raise RegistryError(
                f"packument for {pkg!r} lacks a publish time for {vtext}")
        releases.append(Release(version, parse_timestamp(time_map[vtext])))
        edges = []
        for key, kind in (("dependencies", "runtime"),
                          ("devDependencies", "dev"),
                          ("optionalDependencies", "optional")):
            for dep, constraint in (vdoc.get(key) or {}).items():
                edges.append(DepEdge(dep, str(constraint), kind))
        dep_edges[(pkg, version)] = edges
    return _sorted_releases(releases), dep_edges


def merge_packument(s: Snapshot, pkg: str, releases, dep_edges):
    """Merge one fetched package into a snapshot (single-owner builder)."""
    s.releases[pkg] = _sorted_releases(releases)
    for key, edges in dep_edges.items():
        s.dep_edges[key] = list(edges)
    for rel in releases:
        if rel.published_at > s.horizon:
            s.horizon = rel.published_at


def registry_constraint(s: Snapshot, pkg: str, version: Version, dep: str):
    """The parsed registry range a release uses for `dep`, or None."""
    for e in s.edges_of(pkg, version):
        if e.dep_name == dep and e.kind == "runtime":
            spec = classify_spec(e.constraint)
            if spec.kind is SpecKind.REGISTRY_RANGE:
                return spec.range
            return None
    return None
