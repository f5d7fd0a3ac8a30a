"""SemVer versions and npm-style range expressions.

Implements parsing, total-order comparison, range desugaring and
satisfaction checks compatible with the npm ecosystem's reference range
evaluator (verified against a recorded conformance corpus), plus the
release-type diff and the semantic update extent of a range.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from functools import total_ordering


class SemverError(ValueError):
    """Malformed version or range text. Carries the offending offset."""

    def __init__(self, message: str, text: str = "", offset: int = 0):
        super().__init__(message)
        self.text = text
        self.offset = offset


class ReleaseType(str, Enum):
    MAJOR = "major"
    MINOR = "minor"
    PATCH = "patch"
    PRERELEASE = "prerelease"
    NONE = "none"


class UpdateExtent(str, Enum):
    EXACT = "exact"
    PATCH = "patch"
    MINOR = "minor"
    MAJOR = "major"

    @property
    def rank(self) -> int:
        return _EXTENT_RANK[self]


_EXTENT_RANK = {
    UpdateExtent.EXACT: 0,
    UpdateExtent.PATCH: 1,
    UpdateExtent.MINOR: 2,
    UpdateExtent.MAJOR: 3,
}

_VERSION_RE = re.compile(
    r"(?P<major>0|[1-9]\d*)"
    r"\.(?P<minor>0|[1-9]\d*)"
    r"\.(?P<patch>0|[1-9]\d*)"
    r"(?:-(?P<pre>[0-9A-Za-z.-]+))?"
    r"(?:\+(?P<build>[0-9A-Za-z.-]+))?"
)

_NUMERIC_RE = re.compile(r"^\d+$")


@total_ordering
@dataclass(frozen=True)
class Version:
    major: int
    minor: int
    patch: int
    prerelease: tuple = ()
    build: tuple = ()

    def __str__(self) -> str:
        s = f"{self.major}.{self.minor}.{self.patch}"
        if self.prerelease:
            s += "-" + ".".join(str(p) for p in self.prerelease)
        if self.build:
            s += "+" + ".".join(self.build)
        return s

    @property
    def release(self) -> tuple:
        return (self.major, self.minor, self.patch)

    def _pre_key(self):
        # No prerelease sorts above any prerelease of the same release.
        if not self.prerelease:
            return (1,)
        # Numeric identifiers sort below alphanumeric ones.
        return (0, tuple(
            (0, p, "") if isinstance(p, int) else (1, 0, p)
            for p in self.prerelease
        ))

    def _key(self):
        return (self.major, self.minor, self.patch, self._pre_key())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Version):
            return NotImplemented
        return self._key() == other._key()

    def __lt__(self, other) -> bool:
        if not isinstance(other, Version):
            return NotImplemented
        return self._key() < other._key()

    def __hash__(self) -> int:
        return hash(self._key())


def parse_version(text: str) -> Version:
    """Parse a version string, tolerating a leading ``v``/``=`` and whitespace."""
    raw = text
    text = text.strip()
    offset = len(raw) - len(raw.lstrip())
    if text[:1] in ("v", "=") :
        text = text[1:]
        offset += 1
        if text[:1] == "v":  # "=v1.2.3" is accepted by the reference evaluator
            text = text[1:]
            offset += 1
    m = _VERSION_RE.fullmatch(text)
    if not m:
        m2 = _VERSION_RE.match(text)
        bad = offset + (m2.end() if m2 else 0)
        raise SemverError(f"invalid version {raw!r} at offset {bad}", raw, bad)
    return Version(
        int(m.group("major")),
        int(m.group("minor")),
        int(m.group("patch")),
        _parse_prerelease(m.group("pre")),
        tuple(m.group("build").split(".")) if m.group("build") else (),
    )


def _parse_prerelease(pre) -> tuple:
    if not pre:
        return ()
    parts = []
    for ident in pre.split("."):
        if not ident:
            raise SemverError(f"empty prerelease identifier in {pre!r}")
        parts.append(int(ident) if _NUMERIC_RE.match(ident) else ident)
    return tuple(parts)


def compare(a: Version, b: Version) -> int:
    """-1, 0 or 1; build metadata is ignored."""
    ka, kb = a._key(), b._key()
    return (ka > kb) - (ka < kb)


def diff_release_type(older: Version, newer: Version) -> ReleaseType:
    """Which component changed between two chronologically ordered versions."""
    if older.major != newer.major:
        return ReleaseType.MAJOR
    if older.minor != newer.minor:
        return ReleaseType.MINOR
    if older.patch != newer.patch:
        return ReleaseType.PATCH
    if older.prerelease != newer.prerelease:
        return ReleaseType.PRERELEASE
    return ReleaseType.NONE


# --- ranges -----------------------------------------------------------------

_OPS = ("<=", ">=", "<", ">", "=")


@dataclass(frozen=True)
class Comparator:
    op: str  # one of < <= > >= =
    version: Version
    # Lower bounds synthesized from x/missing components drop to the `-0`
    # prerelease sentinel when prereleases are opted in, mirroring the
    # reference evaluator's desugaring.
    pre0: bool = False

    def __str__(self) -> str:
        return f"{self.op}{self.version}"

    def matches(self, v: Version, include_prerelease: bool = False) -> bool:
        bound = self.version
        if self.pre0 and include_prerelease:
            bound = Version(bound.major, bound.minor, bound.patch, _PRE_ZERO)
        c = compare(v, bound)
        if self.op == "=":
            return c == 0
        if self.op == "<":
            return c < 0
        if self.op == "<=":
            return c <= 0
        if self.op == ">":
            return c > 0
        return c >= 0


@dataclass(frozen=True)
class RangeExpr:
    """Disjunction of comparator conjunctions, already desugared."""

    arms: tuple = ()  # tuple of tuples of Comparator
    raw: str = ""

    def __str__(self) -> str:
        return self.raw


_X_CHARS = {"x", "X", "*"}


def _is_x(part) -> bool:
    return part is None or part in _X_CHARS


class _Partial:
    """A possibly-incomplete version like ``1``, ``1.2`` or ``1.2.x``."""

    __slots__ = ("major", "minor", "patch", "pre", "build")

    def __init__(self, major, minor, patch, pre, build):
        self.major, self.minor, self.patch = major, minor, patch
        self.pre, self.build = pre, build

    @property
    def any_major(self):
        return _is_x(self.major)

    @property
    def any_minor(self):
        return _is_x(self.minor)

    @property
    def any_patch(self):
        return _is_x(self.patch)

    def floor(self) -> Version:
        return Version(
            0 if self.any_major else int(self.major),
            0 if self.any_minor else int(self.minor),
            0 if self.any_patch else int(self.patch),
            _parse_prerelease(self.pre),
        )


_PARTIAL_RE = re.compile(
    r"(?P<major>0|[1-9]\d*|x|X|\*)"
    r"(?:\.(?P<minor>0|[1-9]\d*|x|X|\*)"
    r"(?:\.(?P<patch>0|[1-9]\d*|x|X|\*))?)?"
    r"(?:-(?P<pre>[0-9A-Za-z.-]+))?"
    r"(?:\+(?P<build>[0-9A-Za-z.-]+))?"
)

# Sentinel for exclusive upper bounds: the lowest prerelease of a release.
_PRE_ZERO = (0,)


def _lt0(major, minor, patch) -> Comparator:
    return Comparator("<", Version(major, minor, patch, _PRE_ZERO))


def _parse_partial(text: str) -> _Partial:
    if text[:1] == "v":
        text = text[1:]
    m = _PARTIAL_RE.fullmatch(text)
    if not m:
        raise SemverError(f"invalid version segment {text!r}", text)
    return _Partial(m.group("major"), m.group("minor"), m.group("patch"),
                    m.group("pre"), m.group("build"))


def _desugar_plain(p: _Partial):
    """Bare version or x-range: ``1.2.3``, ``1.2``, ``1.x``, ``*``."""
    if p.any_major:
        return [Comparator(">=", Version(0, 0, 0), pre0=True)]
    if p.any_minor:
        lo = int(p.major)
        return [Comparator(">=", Version(lo, 0, 0), pre0=True), _lt0(lo + 1, 0, 0)]
    if p.any_patch:
        maj, mi = int(p.major), int(p.minor)
        return [Comparator(">=", Version(maj, mi, 0), pre0=True), _lt0(maj, mi + 1, 0)]
    return [Comparator("=", p.floor())]


def _desugar_tilde(p: _Partial):
    if p.any_major:
        return [Comparator(">=", Version(0, 0, 0), pre0=True)]
    maj = int(p.major)
    if p.any_minor:
        return [Comparator(">=", Version(maj, 0, 0), pre0=True), _lt0(maj + 1, 0, 0)]
    mi = int(p.minor)
    return [Comparator(">=", p.floor()), _lt0(maj, mi + 1, 0)]


def _desugar_caret(p: _Partial):
    if p.any_major:
        return [Comparator(">=", Version(0, 0, 0), pre0=True)]
    maj = int(p.major)
    if p.any_minor:
        return [Comparator(">=", Version(maj, 0, 0), pre0=True), _lt0(maj + 1, 0, 0)]
    mi = int(p.minor)
    if p.any_patch:
        if maj == 0:
            return [Comparator(">=", Version(0, mi, 0), pre0=True), _lt0(0, mi + 1, 0)]
        return [Comparator(">=", Version(maj, mi, 0), pre0=True), _lt0(maj + 1, 0, 0)]
    floor = p.floor()
    if maj > 0:
        hi = _lt0(maj + 1, 0, 0)
    elif mi > 0:
        hi = _lt0(0, mi + 1, 0)
    else:
        hi = _lt0(0, 0, floor.patch + 1)
    return [Comparator(">=", floor), hi]


def _desugar_op(op: str, p: _Partial):
    """Primitive comparator with possible x components, npm semantics."""
    if p.any_major:
        # <x.y.z is unsatisfiable; every other op matches all releases
        if op == "<":
            return [Comparator("<", Version(0, 0, 0))]
        return [Comparator(">=", Version(0, 0, 0), pre0=True)]
    maj = int(p.major)
    if p.any_minor:
        if op in (">", ">="):
            if op == ">":
                return [Comparator(">=", Version(maj + 1, 0, 0), pre0=True)]
            return [Comparator(">=", Version(maj, 0, 0), pre0=True)]
        if op == "<":
            return [_lt0(maj, 0, 0)]
        if op == "<=":
            return [_lt0(maj + 1, 0, 0)]
        return _desugar_plain(p)  # "=1.x" behaves like "1.x"
    mi = int(p.minor)
    if p.any_patch:
        if op in (">", ">="):
            if op == ">":
                return [Comparator(">=", Version(maj, mi + 1, 0), pre0=True)]
            return [Comparator(">=", Version(maj, mi, 0), pre0=True)]
        if op == "<":
            return [_lt0(maj, mi, 0)]
        if op == "<=":
            return [_lt0(maj, mi + 1, 0)]
        return _desugar_plain(p)
    return [Comparator(op, p.floor())]


def _desugar_hyphen(lo: _Partial, hi: _Partial):
    comps = []
    if lo.any_major:
        comps.append(Comparator(">=", Version(0, 0, 0), pre0=True))
    else:
        comps.append(Comparator(">=", lo.floor(), pre0=True))
    if hi.any_major:
        pass  # unbounded above
    elif hi.any_minor:
        comps.append(_lt0(int(hi.major) + 1, 0, 0))
    elif hi.any_patch:
        comps.append(_lt0(int(hi.major), int(hi.minor) + 1, 0))
    else:
        comps.append(Comparator("<=", hi.floor()))
    return comps


_SIMPLE_RE = re.compile(r"^(\^|~>?|<=|>=|<|>|=)?\s*(.*)$")


def _parse_comparator_set(text: str):
    text = text.strip()
    if not text:
        return [Comparator(">=", Version(0, 0, 0), pre0=True)]
    hyphen = re.split(r"\s+-\s+", text)
    if len(hyphen) == 2:
        return _desugar_hyphen(_parse_partial(hyphen[0]), _parse_partial(hyphen[1]))
    if len(hyphen) > 2:
        raise SemverError(f"invalid hyphen range {text!r}", text)
    comps = []
    for token in text.split():
        m = _SIMPLE_RE.match(token)
        op, rest = m.group(1) or "", m.group(2)
        partial = _parse_partial(rest)
        if op == "^":
            comps.extend(_desugar_caret(partial))
        elif op in ("~", "~>"):
            comps.extend(_desugar_tilde(partial))
        elif op in _OPS:
            comps.extend(_desugar_op(op, partial))
        elif op == "":
            comps.extend(_desugar_plain(partial))
        else:
            raise SemverError(f"invalid comparator {token!r}", token)
    return comps


def parse_range(text: str) -> RangeExpr:
    """Parse an npm-style range into desugared comparator form."""
    if not isinstance(text, str):
        raise SemverError("range must be a string")
    arms = []
    for arm_text in text.split("||"):
        arms.append(tuple(_parse_comparator_set(arm_text)))
    return RangeExpr(tuple(arms), raw=text.strip())


def _arm_matches(comps, v: Version, include_prerelease: bool) -> bool:
    if not all(c.matches(v, include_prerelease) for c in comps):
        return False
    if v.prerelease and not include_prerelease:
        # Prerelease versions only match arms that opt in by mentioning a
        # prerelease on the same (major, minor, patch) tuple.
        for c in comps:
            if c.version.prerelease and c.version.release == v.release:
                return True
        return False
    return True


def satisfies(v: Version, r: RangeExpr, include_prerelease: bool = False) -> bool:
    return any(_arm_matches(arm, v, include_prerelease) for arm in r.arms)


def max_satisfying(versions, r: RangeExpr, include_prerelease: bool = False):
    """Highest version in `versions` satisfying `r`, or None."""
    best = None
    for v in versions:
        if satisfies(v, r, include_prerelease) and (best is None or v > best):
            best = v
    return best


# --- update extent ----------------------------------------------------------


def _arm_floor(comps) -> Version | None:
    """Minimum release version satisfying a comparator conjunction, or None."""
    lo = Version(0, 0, 0)
    for c in comps:
        if c.op == "=":
            return c.version if _arm_matches(comps, c.version, False) and not c.version.prerelease else None
        if c.op == ">=":
            cand = c.version if not c.version.prerelease else _next_release(c.version)
            if cand > lo:
                lo = cand
        elif c.op == ">":
            cand = _next_release(c.version)
            if cand > lo:
                lo = cand
    if _arm_matches(comps, lo, False):
        return lo
    # Floor candidate excluded by an upper bound: arm holds no release version
    # at or just above the lower bound; probe the comparator grid.
    for cand in sorted(_probe_versions(comps)):
        if not cand.prerelease and _arm_matches(comps, cand, False):
            return cand
    return None


def _next_release(v: Version) -> Version:
    """Smallest release version strictly greater than v."""
    if v.prerelease:
        return Version(v.major, v.minor, v.patch)
    return Version(v.major, v.minor, v.patch + 1)


def _probe_versions(comps):
    probes = set()
    for c in comps:
        M, m, p = c.version.release
        probes.update({
            Version(M, m, p),
            Version(M, m, p + 1),
            Version(M, m + 1, 0),
            Version(M + 1, 0, 0),
        })
    probes.update({Version(0, 0, 0), Version(0, 0, 1),
                   Version(0, 1, 0), Version(1, 0, 0)})
    return probes


def update_extent(r: RangeExpr, available_floor: Version | None = None) -> UpdateExtent:
    """Widest release-type jump from the range's minimum satisfying release.

    The minimum is computed analytically; `available_floor` overrides it when
    the caller knows the lowest version actually published.
    """
    floors = [f for f in (_arm_floor(arm) for arm in r.arms) if f is not None]
    if not floors:
        raise SemverError(f"range {r.raw!r} is unsatisfiable over release versions")
    m = min(floors)
    if available_floor is not None and available_floor > m:
        if satisfies(available_floor, r):
            m = available_floor
    probes = set()
    for arm in r.arms:
        probes |= _probe_versions(arm)
    extent = UpdateExtent.EXACT
    for v in sorted(probes):
        if v.prerelease or v < m or not satisfies(v, r):
            continue
        if v.major != m.major:
            return UpdateExtent.MAJOR
        if v.minor != m.minor and extent.rank < UpdateExtent.MINOR.rank:
            extent = UpdateExtent.MINOR
        elif v != m and extent.rank < UpdateExtent.PATCH.rank:
            extent = UpdateExtent.PATCH
    # Unbounded arms reach arbitrarily high majors even past all probes.
    for arm in r.arms:
        if not any(c.op in ("<", "<=") for c in arm):
            hi = max((c.version.major for c in arm), default=0) + 2
            if satisfies(Version(hi, 0, 0), r):
                return UpdateExtent.MAJOR
    return extent
