import json
from pathlib import Path

import pytest

DAY = 86400.0
EPOCH = 1577836800.0  # 2020-01-01T00:00:00Z


def day(n: float) -> float:
    return EPOCH + n * DAY


def day_str(n: float) -> str:
    from depvet.ecosystem import format_timestamp

    return format_timestamp(day(n))


def write_snapshot_files(tmp_path: Path, releases, deps, advisories):
    """releases: (pkg, version, day); deps: (pkg, version, dep, constraint, kind);
    advisories: dicts with day-based disclosed/fix fields."""
    rel_path = tmp_path / "releases.jsonl"
    dep_path = tmp_path / "deps.jsonl"
    adv_path = tmp_path / "advisories.jsonl"
    with open(rel_path, "w") as fh:
        for pkg, version, d in releases:
            fh.write(json.dumps({"package": pkg, "version": version,
                                 "published_at": day_str(d)}) + "\n")
    with open(dep_path, "w") as fh:
        for pkg, version, dep, constraint, kind in deps:
            fh.write(json.dumps({"package": pkg, "version": version,
                                 "dep_name": dep, "constraint": constraint,
                                 "kind": kind}) + "\n")
    with open(adv_path, "w") as fh:
        for adv in advisories:
            rec = dict(adv)
            rec["disclosed_at"] = day_str(rec.pop("disclosed_day"))
            rec["fix_released_at"] = day_str(rec.pop("fix_day"))
            fh.write(json.dumps(rec) + "\n")
    return rel_path, dep_path, adv_path


# --- three hand-built mini-ecosystems ----------------------------------------

MINI_A = {
    # one advisory, dependents covering immediate / delayed / censored /
    # excluded-late / dev-only cases
    "releases": [
        ("liba", "1.0.0", 0), ("liba", "1.0.1", 10), ("liba", "1.1.0", 20),
        ("app-caret", "1.0.0", 5),
        ("app-pinned", "1.0.0", 5), ("app-pinned", "1.1.0", 50),
        ("app-never", "1.0.0", 5),
        ("late-app", "1.0.0", 30),
        ("dev-only", "1.0.0", 5),
        ("clock", "1.0.0", 60),
    ],
    "deps": [
        ("app-caret", "1.0.0", "liba", "^1.0.0", "runtime"),
        ("app-pinned", "1.0.0", "liba", "1.0.1", "runtime"),
        ("app-pinned", "1.1.0", "liba", "^1.1.0", "runtime"),
        ("app-never", "1.0.0", "liba", "1.0.1", "runtime"),
        ("late-app", "1.0.0", "liba", "^1.0.0", "runtime"),
        ("dev-only", "1.0.0", "liba", "^1.0.0", "dev"),
    ],
    "advisories": [
        {"id": "ADV-A-1", "package": "liba", "severity": "high",
         "affected": "<1.1.0", "first_fixed": "1.1.0",
         "disclosed_day": 19, "fix_day": 20},
    ],
}

MINI_B = {
    # two advisories with different severities; tilde dependent adopting via
    # a later manifest edit; a url-spec dependent excluded from resolution
    "releases": [
        ("libb", "2.0.0", 0), ("libb", "2.0.5", 15), ("libb", "2.1.0", 30),
        ("libb", "2.1.1", 40), ("libb", "3.0.0", 55),
        ("tilde-app", "0.1.0", 8), ("tilde-app", "0.2.0", 48),
        ("wild-app", "1.0.0", 8),
        ("url-app", "1.0.0", 8),
        ("clock", "1.0.0", 90),
    ],
    "deps": [
        ("tilde-app", "0.1.0", "libb", "~2.0.0", "runtime"),
        ("tilde-app", "0.2.0", "libb", "~2.1.1", "runtime"),
        ("wild-app", "1.0.0", "libb", "*", "runtime"),
        ("url-app", "1.0.0", "libb", "https://example.com/libb.tgz", "runtime"),
    ],
    "advisories": [
        {"id": "ADV-B-1", "package": "libb", "severity": "critical",
         "affected": "<2.1.0", "first_fixed": "2.1.0",
         "disclosed_day": 28, "fix_day": 30},
        {"id": "ADV-B-2", "package": "libb", "severity": "low",
         "affected": "<3.0.0", "first_fixed": "3.0.0",
         "disclosed_day": 55, "fix_day": 55},
    ],
}

MINI_C = {
    # same-day disclosure and fix, union-range dependent, release ties,
    # and an upstream prerelease that must not be auto-installed
    "releases": [
        ("libc", "1.0.0", 0), ("libc", "1.1.0", 5), ("libc", "1.1.1", 5),
        ("libc", "2.0.0-rc.1", 18), ("libc", "2.0.0", 25),
        ("union-app", "1.0.0", 6), ("union-app", "1.0.1", 33),
        ("range-app", "1.0.0", 6), ("range-app", "2.0.0", 26),
        ("clock", "1.0.0", 45),
    ],
    "deps": [
        ("union-app", "1.0.0", "libc", "1.0.0 || 1.1.x", "runtime"),
        ("union-app", "1.0.1", "libc", ">=2.0.0", "runtime"),
        ("range-app", "1.0.0", "libc", ">=1.0.0 <2.0.0", "runtime"),
        ("range-app", "2.0.0", "libc", "^2.0.0", "runtime"),
    ],
    "advisories": [
        {"id": "ADV-C-1", "package": "libc", "severity": "medium",
         "affected": "<2.0.0", "first_fixed": "2.0.0",
         "disclosed_day": 25, "fix_day": 25},
    ],
}

MINI_ECOSYSTEMS = {"A": MINI_A, "B": MINI_B, "C": MINI_C}


@pytest.fixture
def make_snapshot(tmp_path):
    def _make(spec):
        from depvet.ecosystem import load_snapshot

        paths = write_snapshot_files(tmp_path, spec["releases"], spec["deps"],
                                     spec["advisories"])
        return load_snapshot(*paths), paths

    return _make


@pytest.fixture
def make_project(tmp_path):
    """Create an npm project directory from a manifest dict and source files."""
    counter = [0]

    def _make(manifest: dict, sources: dict | None = None,
              lockfiles=("package-lock.json",)):
        counter[0] += 1
        root = tmp_path / f"proj{counter[0]}"
        root.mkdir()
        (root / "package.json").write_text(json.dumps(manifest))
        for relpath, text in (sources or {}).items():
            path = root / relpath
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
        for name in lockfiles or ():
            (root / name).write_text("{}")
        return root

    return _make
