"""Vulnerability timelines, update strategies, model features and rank stats."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .ecosystem import (
    SECONDS_PER_DAY,
    Advisory,
    Snapshot,
    dependents_of,
    latest_release_at,
    registry_constraint,
    resolve_at,
)
from .manifest import ConstraintSpec
from .semver import (
    ReleaseType,
    SemverError,
    UpdateExtent,
    Version,
    diff_release_type,
    satisfies,
    update_extent,
)

DAYS_PER_MONTH = 30.44

ONE_DAY = 86400.0


class StrategyClass(str, Enum):
    BALANCED = "balanced"
    RESTRICTIVE = "restrictive"
    PERMISSIVE = "permissive"
    UNCLASSIFIED = "unclassified"


class AnalysisError(ValueError):
    pass


def classify_update_strategy(spec: ConstraintSpec,
                             resolved_floor: Version | None = None) -> StrategyClass:
    """Map a dependency constraint to its update strategy class.

    Post-1.0.0 floor: exact/patch extents are restrictive, minor is balanced,
    major is permissive. Pre-1.0.0 floor: any automatic update at all is
    permissive, while a pinned constraint counts as balanced (it prevents
    updates for an unstable dependency, which is the SemVer-sanctioned
    behavior there -- note the asymmetry with pinned post-1.0.0 constraints,
    which are restrictive).
    """
    if not spec.is_registry or spec.range is None:
        return StrategyClass.UNCLASSIFIED
    try:
        extent = update_extent(spec.range, resolved_floor)
    except SemverError:
        return StrategyClass.UNCLASSIFIED
    if resolved_floor is None:
        from .semver import _arm_floor

        floors = [f for f in (_arm_floor(a) for a in spec.range.arms) if f is not None]
        resolved_floor = min(floors)
    if resolved_floor < Version(1, 0, 0):
        if extent is UpdateExtent.EXACT:
            return StrategyClass.BALANCED
        return StrategyClass.PERMISSIVE
    if extent in (UpdateExtent.EXACT, UpdateExtent.PATCH):
        return StrategyClass.RESTRICTIVE
    if extent is UpdateExtent.MINOR:
        return StrategyClass.BALANCED
    return StrategyClass.PERMISSIVE


def fix_release_type(s: Snapshot, a: Advisory) -> ReleaseType:
    """Release-type jump from the release right before the fix to the fix."""
    history = [r for r in s.releases_of(a.package)
               if r.published_at <= a.fix_released_at]
    fix_idx = None
    for i, rel in enumerate(history):
        if rel.version == a.first_fixed:
            fix_idx = i
    if fix_idx is None or fix_idx == 0:
        raise AnalysisError(
            f"advisory {a.id}: no release of {a.package} precedes the fix")
    return diff_release_type(history[fix_idx - 1].version, a.first_fixed)


def fix_delay_days(a: Advisory) -> float:
    return max(0.0, (a.fix_released_at - a.disclosed_at) / SECONDS_PER_DAY)


@dataclass(frozen=True)
class ExposureRecord:
    dependent: str
    advisory_id: str
    vulnerable_check_date: float
    installed_before_fix: Version
    fix_delay_days: float
    adoption_date: float | None
    adoption_delay_days: float
    censored: bool

    def to_dict(self) -> dict:
        from .ecosystem import format_timestamp

        return {
            "dependent": self.dependent,
            "advisory_id": self.advisory_id,
            "vulnerable_check_date": format_timestamp(self.vulnerable_check_date),
            "installed_before_fix": str(self.installed_before_fix),
            "fix_delay_days": self.fix_delay_days,
            "adoption_date": (format_timestamp(self.adoption_date)
                              if self.adoption_date is not None else None),
            "adoption_delay_days": self.adoption_delay_days,
            "censored": self.censored,
        }


def _installed_version(s: Snapshot, dependent: str, upstream: str, at: float):
    """What the dependent's then-current release would install for upstream."""
    rel = latest_release_at(s, dependent, at)
    if rel is None:
        return None
    r = registry_constraint(s, dependent, rel.version, upstream)
    if r is None:
        return None  # no runtime edge or non-registry spec
    return resolve_at(s, upstream, r, at)


def find_vulnerable_dependents(s: Snapshot, a: Advisory):
    """Dependents installing an affected version the day before the fix."""
    check_date = a.fix_released_at - ONE_DAY
    out = []
    for dep in sorted(dependents_of(s, a.package)):
        installed = _installed_version(s, dep, a.package, check_date)
        if installed is not None and satisfies(installed, a.affected,
                                               include_prerelease=True):
            out.append((dep, installed))
    return out


def adoption_delay(s: Snapshot, dependent: str, a: Advisory) -> ExposureRecord:
    """First event date at which the dependent installs the fix or higher.

    Events are the fix release itself plus every later release of the
    dependent; a dependent that never adopts is right-censored at the
    snapshot horizon.
    """
    check_date = a.fix_released_at - ONE_DAY
    installed_before = _installed_version(s, dependent, a.package, check_date)
    if installed_before is None or not satisfies(installed_before, a.affected,
                                                 include_prerelease=True):
        raise AnalysisError(
            f"{dependent} is not a vulnerable dependent of advisory {a.id}")
    events = [a.fix_released_at]
    events += [r.published_at for r in s.releases_of(dependent)
               if r.published_at > a.fix_released_at]
    adoption_date = None
    for at in events:
        installed = _installed_version(s, dependent, a.package, at)
        if installed is not None and installed >= a.first_fixed:
            adoption_date = at
            break
    if adoption_date is None:
        delay = (s.horizon - a.fix_released_at) / SECONDS_PER_DAY
        return ExposureRecord(dependent, a.id, check_date, installed_before,
                              fix_delay_days(a), None, max(0.0, delay), True)
    delay = (adoption_date - a.fix_released_at) / SECONDS_PER_DAY
    return ExposureRecord(dependent, a.id, check_date, installed_before,
                          fix_delay_days(a), adoption_date, delay, False)


# --- features -------------------------------------------------------------


FEATURE_NAMES = (
    "package_age_days",
    "strategy_balanced",
    "strategy_restrictive",
    "strategy_permissive",
    "release_frequency_per_month",
    "dependency_count",
    "dependent_count",
    "release_status_post100",
    "dependency_modifications",
)


@dataclass(frozen=True)
class FeatureVector:
    package_age_days: float
    strategy_balanced: int
    strategy_restrictive: int
    strategy_permissive: int
    release_frequency_per_month: float
    dependency_count: int
    dependent_count: int
    release_status_post100: int
    dependency_modifications: int

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in FEATURE_NAMES], dtype=np.float64)

    def to_dict(self) -> dict:
        return {n: getattr(self, n) for n in FEATURE_NAMES}


_STRATEGY_BITS = {
    StrategyClass.BALANCED: (1, 0, 0),
    StrategyClass.RESTRICTIVE: (0, 1, 0),
    StrategyClass.PERMISSIVE: (0, 0, 1),
    StrategyClass.UNCLASSIFIED: (0, 0, 0),
}


def _runtime_dep_map(s: Snapshot, pkg: str, version: Version) -> dict:
    return {e.dep_name: e.constraint for e in s.edges_of(pkg, version)
            if e.kind == "runtime"}


def _dependent_count(s: Snapshot, pkg: str, at: float) -> int:
    count = 0
    for other in s.releases:
        if other == pkg:
            continue
        for rel in s.releases_of(other):
            if rel.published_at > at:
                break
            if pkg in _runtime_dep_map(s, other, rel.version):
                count += 1
                break
    return count


def extract_features(s: Snapshot, dependent: str, at: float,
                     strategy: StrategyClass,
                     include_dropped: bool = False) -> FeatureVector | tuple:
    """The nine model features of a dependent, evaluated as of `at`.

    With include_dropped, also returns the two features removed by the
    correlation filter (version count, days since last release) as extras.
    """
    history = [r for r in s.releases_of(dependent) if r.published_at <= at]
    if not history:
        raise AnalysisError(f"{dependent} has no release by the given date")
    first = history[0]
    latest = history[-1]
    age_days = (at - first.published_at) / SECONDS_PER_DAY
    if age_days < 1.0:
        frequency = 0.0
    else:
        frequency = len(history) / (age_days / DAYS_PER_MONTH)
    modifications = 0
    prev_deps = None
    for rel in history:
        deps = _runtime_dep_map(s, dependent, rel.version)
        if prev_deps is not None and deps != prev_deps:
            modifications += 1
        prev_deps = deps
    bits = _STRATEGY_BITS[strategy]
    fv = FeatureVector(
        package_age_days=age_days,
        strategy_balanced=bits[0],
        strategy_restrictive=bits[1],
        strategy_permissive=bits[2],
        release_frequency_per_month=frequency,
        dependency_count=len(_runtime_dep_map(s, dependent, latest.version)),
        dependent_count=_dependent_count(s, dependent, at),
        release_status_post100=int(latest.version >= Version(1, 0, 0)),
        dependency_modifications=modifications,
    )
    if include_dropped:
        extras = {
            "package_version_count": len(history),
            "days_since_last_release": (at - latest.published_at) / SECONDS_PER_DAY,
        }
        return fv, extras
    return fv


def strategy_for(s: Snapshot, dependent: str, upstream: str, at: float) -> StrategyClass:
    """Strategy class of the dependent's constraint on upstream as of `at`."""
    rel = latest_release_at(s, dependent, at)
    if rel is None:
        return StrategyClass.UNCLASSIFIED
    from .manifest import classify_spec

    for e in s.edges_of(dependent, rel.version):
        if e.dep_name == upstream and e.kind == "runtime":
            return classify_update_strategy(classify_spec(e.constraint))
    return StrategyClass.UNCLASSIFIED


def exposure_table(s: Snapshot, severity: str | None = None):
    """All (advisory, exposure record) pairs, optionally severity-filtered."""
    rows = []
    for a in s.advisories:
        if severity and a.severity != severity:
            continue
        for dependent, _installed in find_vulnerable_dependents(s, a):
            rows.append((a, adoption_delay(s, dependent, a)))
    return rows


def most_recent_per_dependent(rows):
    """Keep one exposure per dependent: its most recent vulnerable dependency."""
    best = {}
    for a, rec in rows:
        cur = best.get(rec.dependent)
        if cur is None or a.fix_released_at > cur[0].fix_released_at:
            best[rec.dependent] = (a, rec)
    return [best[d] for d in sorted(best)]


# --- rank statistics --------------------------------------------------------


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values), dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(xs, ys) -> float:
    """Spearman rank correlation with average ranks for ties."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise AnalysisError("inputs must be equal-length 1-d sequences")
    if len(xs) < 2:
        raise AnalysisError("need at least two observations")
    if np.all(xs == xs[0]) or np.all(ys == ys[0]):
        raise AnalysisError("correlation undefined for constant input")
    rx = _average_ranks(xs)
    ry = _average_ranks(ys)
    rx -= rx.mean()
    ry -= ry.mean()
    return float(np.dot(rx, ry) / math.sqrt(np.dot(rx, rx) * np.dot(ry, ry)))


def mann_whitney_u(a, b):
    """Mann-Whitney U with tie correction; two-sided normal-approximation p."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) == 0 or len(b) == 0:
        raise AnalysisError("both samples must be non-empty")
    n1, n2 = len(a), len(b)
    combined = np.concatenate([a, b])
    ranks = _average_ranks(combined)
    r1 = float(ranks[:n1].sum())
    u1 = r1 - n1 * (n1 + 1) / 2.0
    u2 = n1 * n2 - u1
    u = min(u1, u2)
    n = n1 + n2
    # tie correction on the rank variance
    _, counts = np.unique(combined, return_counts=True)
    tie_term = float(((counts ** 3 - counts).sum())) / (n * (n - 1)) if n > 1 else 0.0
    mu = n1 * n2 / 2.0
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term)
    if var <= 0:
        return u, 1.0
    z = (u - mu + 0.5) / math.sqrt(var)  # continuity correction
    p = 2.0 * _norm_sf(abs(z))
    return u, min(1.0, p)


def _norm_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))
