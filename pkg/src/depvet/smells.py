"""Dependency smell detection (S1-S7) for npm-style projects."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

from .manifest import (
    LockfileStatus,
    Manifest,
    SpecKind,
    classify_spec,
    detect_lockfile,
    parse_manifest,
)
from .semver import SemverError, UpdateExtent, Version, update_extent


class Smell(str, Enum):
    S1_PINNED = "S1"
    S2_URL = "S2"
    S3_RESTRICTIVE = "S3"
    S4_PERMISSIVE = "S4"
    S5_NO_LOCK = "S5"
    S6_UNUSED = "S6"
    S7_MISSING = "S7"


_TITLES = {
    Smell.S1_PINNED: "pinned dependency",
    Smell.S2_URL: "URL dependency",
    Smell.S3_RESTRICTIVE: "restrictive constraint",
    Smell.S4_PERMISSIVE: "permissive constraint",
    Smell.S5_NO_LOCK: "no package-lock",
    Smell.S6_UNUSED: "unused dependency",
    Smell.S7_MISSING: "missing dependency",
}


@dataclass(frozen=True)
class SmellFinding:
    smell: Smell
    dependency: str | None
    evidence: str
    message: str

    def sort_key(self):
        return (self.smell.value, self.dependency or "", self.evidence)

    def to_dict(self) -> dict:
        return {
            "smell": self.smell.value,
            "title": _TITLES[self.smell],
            "dependency": self.dependency,
            "evidence": self.evidence,
            "message": self.message,
        }


def _finding(smell, dep, evidence, message):
    return SmellFinding(smell, dep, evidence, message)


def detect_constraint_smells(m: Manifest, include_dev: bool = False):
    """S1/S2/S3/S4 over the manifest's dependency constraints."""
    findings = []
    sections = [("dependencies", m.runtime_deps)]
    if include_dev:
        sections += [("devDependencies", m.dev_deps),
                     ("optionalDependencies", m.optional_deps)]
    for section, deps in sections:
        for name, raw in deps.items():
            spec = classify_spec(raw)
            if spec.kind in (SpecKind.URL, SpecKind.GIT):
                findings.append(_finding(
                    Smell.S2_URL, name, f"{section}: {raw}",
                    f"{name!r} is fetched from an ad-hoc URL/repository "
                    "outside the registry"))
                continue
            if not spec.is_registry:
                continue
            try:
                extent = update_extent(spec.range)
            except SemverError:
                continue  # unsatisfiable range; nothing sensible to report
            pre_1 = _range_floor_pre_1(spec.range)
            if extent is UpdateExtent.EXACT:
                findings.append(_finding(
                    Smell.S1_PINNED, name, f"{section}: {raw}",
                    f"{name!r} is pinned to a single version"))
            elif extent is UpdateExtent.MAJOR:
                findings.append(_finding(
                    Smell.S4_PERMISSIVE, name, f"{section}: {raw}",
                    f"{name!r} accepts major updates (more permissive than "
                    "SemVer)"))
            elif extent is UpdateExtent.PATCH and not pre_1:
                findings.append(_finding(
                    Smell.S3_RESTRICTIVE, name, f"{section}: {raw}",
                    f"{name!r} only accepts patch updates (more restrictive "
                    "than SemVer)"))
            # extent minor, and patch with a pre-1.0.0 floor, are the
            # SemVer-compliant caret-equivalent baseline: no finding
    return findings


def _range_floor_pre_1(r) -> bool:
    from .semver import _arm_floor  # analytic minimum of the range

    floors = [f for f in (_arm_floor(arm) for arm in r.arms) if f is not None]
    return bool(floors) and min(floors) < Version(1, 0, 0)


def detect_lock_smell(status: LockfileStatus):
    if status.present:
        return None
    return _finding(
        Smell.S5_NO_LOCK, None, "project root",
        "no package-lock.json, npm-shrinkwrap.json or yarn.lock found")


DEFAULT_SOURCE_EXTS = (".js", ".mjs", ".cjs", ".jsx", ".ts", ".tsx")

_IMPORT_PATTERNS = [
    # import x from 'pkg'; import 'pkg'; export ... from 'pkg'
    re.compile(r"""\b(?:import|export)\b[^'"()\n]*?\bfrom\s*(['"])([^'"]+)\1"""),
    re.compile(r"""\bimport\s*(['"])([^'"]+)\1"""),
    # require('pkg') and dynamic import('pkg') with literal arguments
    re.compile(r"""\brequire\s*\(\s*(['"])([^'"]+)\1\s*\)"""),
    re.compile(r"""\bimport\s*\(\s*(['"])([^'"]+)\1\s*\)"""),
]

_DYNAMIC_PATTERN = re.compile(r"""\b(?:require|import)\s*\(\s*[^'")\s]""")


def _load_builtins() -> frozenset:
    text = resources.files("depvet").joinpath("node_builtins.txt").read_text()
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


_BUILTINS = None


def node_builtin_modules() -> frozenset:
    global _BUILTINS
    if _BUILTINS is None:
        _BUILTINS = _load_builtins()
    return _BUILTINS


def normalize_import(target: str) -> str | None:
    """Map an import specifier to a package name, or None if not a package."""
    if target.startswith(("node:", ".", "/", "~")):
        if target.startswith("node:"):
            return None  # explicit builtin
        return None  # relative or absolute path
    if target.startswith("@"):
        parts = target.split("/")
        if len(parts) < 2:
            return None
        return "/".join(parts[:2])
    name = target.split("/")[0]
    if not name or name in node_builtin_modules():
        return None
    return name


def scan_file(path: Path) -> tuple[set, list]:
    """Extract imported package names from one source file."""
    notices = []
    try:
        text = path.read_text(encoding="utf-8", errors="replace")
    except OSError as e:
        return set(), [f"skipped unreadable file {path}: {e}"]
    found = set()
    for pattern in _IMPORT_PATTERNS:
        for m in pattern.finditer(text):
            name = normalize_import(m.group(2))
            if name:
                found.add(name)
    if _DYNAMIC_PATTERN.search(text):
        notices.append(f"{path}: dynamic import/require with a computed "
                       "specifier was ignored")
    return found, notices


def scan_imports(source_root, exts=DEFAULT_SOURCE_EXTS,
                 collect_notices: list | None = None) -> set:
    """Walk a project tree and collect imported package names.

    Skips node_modules and hidden directories; files are visited in sorted
    path order so results are deterministic.
    """
    root = Path(source_root)
    imports: set = set()
    files = []
    for path in sorted(root.rglob("*")):
        if not path.is_file() or path.suffix not in exts:
            continue
        parts = path.relative_to(root).parts
        if any(p == "node_modules" or p.startswith(".") for p in parts[:-1]):
            continue
        if parts[-1].startswith("."):
            continue
        files.append(path)
    for path in files:
        found, notices = scan_file(path)
        imports |= found
        if collect_notices is not None:
            collect_notices.extend(notices)
    return imports


def detect_code_smells(m: Manifest, imports: set):
    """S6 (declared but unimported) and S7 (imported but undeclared)."""
    findings = []
    for name in m.runtime_deps:
        if name not in imports:
            findings.append(_finding(
                Smell.S6_UNUSED, name, f"dependencies: {m.runtime_deps[name]}",
                f"{name!r} is declared as a runtime dependency but never "
                "imported in source code"))
    for name in sorted(imports):
        if name in m.runtime_deps:
            continue
        if name in m.dev_deps or name in m.optional_deps:
            section = "devDependencies" if name in m.dev_deps else "optionalDependencies"
            evidence = f"imported in source; listed only under {section}"
        else:
            evidence = "imported in source; not listed in the manifest"
        findings.append(_finding(
            Smell.S7_MISSING, name, evidence,
            f"{name!r} is imported in source code but missing from runtime "
            "dependencies"))
    return findings


@dataclass
class LintOptions:
    include_dev: bool = False
    check_lockfile: bool = True
    check_code: bool = True
    suppress: frozenset = frozenset()  # smell ids like {"S5"}


def lint_project(project_dir, options: LintOptions | None = None,
                 collect_notices: list | None = None):
    """Run all detectors over a project directory; deterministic order."""
    options = options or LintOptions()
    root = Path(project_dir)
    manifest_path = root / "package.json"
    if not manifest_path.is_file():
        raise FileNotFoundError(f"no package.json in {root}")
    m = parse_manifest(manifest_path.read_bytes())
    findings = list(detect_constraint_smells(m, include_dev=options.include_dev))
    if options.check_lockfile:
        lock = detect_lock_smell(detect_lockfile(root))
        if lock:
            findings.append(lock)
    if options.check_code:
        imports = scan_imports(root, collect_notices=collect_notices)
        findings.extend(detect_code_smells(m, imports))
    findings = [f for f in findings if f.smell.value not in options.suppress]
    return sorted(findings, key=SmellFinding.sort_key)
