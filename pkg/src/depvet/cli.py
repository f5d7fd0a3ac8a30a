"""Command-line interface: lint, timeline, features, train, eval, explain, fetch."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    AnalysisError,
    exposure_table,
    extract_features,
    fix_delay_days,
    fix_release_type,
    mann_whitney_u,
    most_recent_per_dependent,
    strategy_for,
)
from .ecosystem import (
    DEFAULT_REGISTRY,
    SEVERITIES,
    RegistryError,
    Snapshot,
    fetch_packument,
    format_timestamp,
    load_snapshot,
    merge_packument,
    save_snapshot,
)
from .manifest import ManifestError
from .model import (
    FAST,
    ForestParams,
    ModelError,
    LabelConfig,
    label,
    load_forest,
    partial_dependence,
    permutation_importance,
    precision_recall_f1,
    roc_auc,
    save_forest,
    stratified_baseline,
    train_forest,
    train_test_split,
)
from .analysis import FEATURE_NAMES
from .smells import LintOptions, lint_project

EXIT_CLEAN = 0
EXIT_FINDINGS = 1
EXIT_ERROR = 2

REPORT_SCHEMA_VERSION = 1

REGISTRY_ENV = "DEPVET_REGISTRY"
DEFAULT_SEED = 20200112  # snapshot horizon date of the reference dataset


def _now() -> str:
    # SOURCE_DATE_EPOCH keeps reports byte-reproducible in CI
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    ts = float(epoch) if epoch else time.time()
    return format_timestamp(ts)


def make_report(command: str, payload, summary: dict) -> dict:
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "tool": "depvet",
        "tool_version": __version__,
        "command": command,
        "generated_at": _now(),
        "summary": summary,
        "payload": payload,
    }


def emit(report: dict, fmt: str, out=None):
    out = out or sys.stdout
    if fmt == "json":
        json.dump(report, out, sort_keys=True, indent=2)
        out.write("\n")
        return
    out.write(f"depvet {report['command']} ({report['generated_at']})\n")
    for key, value in report["summary"].items():
        out.write(f"  {key}: {value}\n")
    payload = report["payload"]
    if isinstance(payload, list):
        for item in payload:
            if isinstance(item, dict):
                line = " ".join(f"{k}={v}" for k, v in item.items())
                out.write(f"  - {line}\n")
            else:
                out.write(f"  - {item}\n")


def _write_records(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _read_records(path):
    with open(path, "r", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


# --- lint ---------------------------------------------------------------------


def cmd_lint(args) -> int:
    options = LintOptions(
        include_dev=args.include_dev,
        check_lockfile=not args.no_lockfile,
        suppress=frozenset(args.suppress or ()),
    )
    notices: list = []
    try:
        findings = lint_project(args.path, options, collect_notices=notices)
    except (ManifestError, FileNotFoundError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    counts: dict = {}
    for f in findings:
        counts[f.smell.value] = counts.get(f.smell.value, 0) + 1
    report = make_report(
        "lint",
        [f.to_dict() for f in findings],
        {"findings": len(findings), **dict(sorted(counts.items())),
         "notices": len(notices)},
    )
    emit(report, args.format)
    for notice in notices:
        print(f"notice: {notice}", file=sys.stderr)
    return EXIT_FINDINGS if findings else EXIT_CLEAN


# --- timeline -------------------------------------------------------------------


def _load(args) -> Snapshot:
    return load_snapshot(args.releases, args.deps, args.advisories)


def cmd_timeline(args) -> int:
    try:
        s = _load(args)
    except Exception as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    advisories = s.advisories
    if args.advisory:
        try:
            advisories = [s.advisory_by_id(args.advisory)]
        except KeyError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_ERROR
    if args.severity:
        advisories = [a for a in advisories if a.severity == args.severity]

    payload = []
    fix_delays = []
    adoption_rows = []
    for a in advisories:
        try:
            rtype = fix_release_type(s, a).value
        except AnalysisError:
            rtype = None
        records = exposure_table(
            Snapshot(s.releases, s.dep_edges, [a], s.horizon))
        fix_delays.append(fix_delay_days(a))
        adoption_rows.extend(records)
        payload.append({
            "advisory": a.id,
            "package": a.package,
            "severity": a.severity,
            "fix_delay_days": fix_delay_days(a),
            "fix_release_type": rtype,
            "exposures": [rec.to_dict() for _, rec in records],
        })
    unique = most_recent_per_dependent(adoption_rows)
    adoption_delays = [rec.adoption_delay_days for _, rec in unique]
    summary = {
        "advisories": len(advisories),
        "exposure_records": len(adoption_rows),
        "unique_dependents": len(unique),
        "mean_fix_delay_days": round(float(np.mean(fix_delays)), 4) if fix_delays else 0.0,
        "median_fix_delay_days": round(float(np.median(fix_delays)), 4) if fix_delays else 0.0,
        "mean_adoption_delay_days": round(float(np.mean(adoption_delays)), 4) if adoption_delays else 0.0,
        "median_adoption_delay_days": round(float(np.median(adoption_delays)), 4) if adoption_delays else 0.0,
    }
    if fix_delays and adoption_delays:
        u, p = mann_whitney_u(fix_delays, adoption_delays)
        summary["mann_whitney_u"] = u
        summary["mann_whitney_p"] = p
    report = make_report("timeline", payload, summary)
    emit(report, args.format)
    return EXIT_CLEAN


# --- features -------------------------------------------------------------------


def cmd_features(args) -> int:
    try:
        s = _load(args)
    except Exception as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    cfg = LabelConfig(args.fast_below, args.slow_above)
    rows = exposure_table(s, severity=args.severity)
    rows = most_recent_per_dependent(rows)
    records = []
    for a, rec in rows:
        strategy = strategy_for(s, rec.dependent, a.package, a.fix_released_at)
        fv = extract_features(s, rec.dependent, a.fix_released_at, strategy)
        cls = label(rec.adoption_delay_days, cfg)
        records.append({
            "dependent": rec.dependent,
            "advisory": a.id,
            "severity": a.severity,
            "strategy": strategy.value,
            "adoption_delay_days": rec.adoption_delay_days,
            "censored": rec.censored,
            "label": {FAST: "fast", None: None}.get(cls, "slow"),
            "features": fv.to_dict(),
        })
    _write_records(args.out, records)
    report = make_report("features", [], {
        "records": len(records),
        "labeled_fast": sum(1 for r in records if r["label"] == "fast"),
        "labeled_slow": sum(1 for r in records if r["label"] == "slow"),
        "dead_zone_dropped": sum(1 for r in records if r["label"] is None),
        "out": str(args.out),
    })
    emit(report, args.format)
    return EXIT_CLEAN


def _load_labeled(path):
    X, y = [], []
    for rec in _read_records(path):
        if rec.get("label") not in ("fast", "slow"):
            continue
        X.append([rec["features"][n] for n in FEATURE_NAMES])
        y.append(FAST if rec["label"] == "fast" else 0)
    return np.asarray(X, dtype=np.float64), np.asarray(y, dtype=np.int64)


# --- train / eval / explain -----------------------------------------------------


def cmd_train(args) -> int:
    try:
        X, y = _load_labeled(args.features)
    except (OSError, json.JSONDecodeError, KeyError) as e:
        print(f"error: cannot read features file: {e}", file=sys.stderr)
        return EXIT_ERROR
    if len(X) == 0:
        print("error: no labeled records in the features file", file=sys.stderr)
        return EXIT_ERROR
    params = ForestParams(n_trees=args.trees,
                          min_samples_split=args.min_split)
    try:
        forest = train_forest(X, y, params, seed=args.seed,
                              feature_names=FEATURE_NAMES)
    except Exception as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    save_forest(forest, args.out)
    report = make_report("train", [], {
        "samples": len(X), "trees": params.n_trees,
        "min_samples_split": params.min_samples_split,
        "seed": args.seed, "out": str(args.out),
    })
    emit(report, args.format)
    return EXIT_CLEAN


def cmd_eval(args) -> int:
    try:
        X, y = _load_labeled(args.features)
        forest = load_forest(args.model)
    except (OSError, json.JSONDecodeError, KeyError, ModelError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    if args.cv:
        from .model import kfold_indices

        aucs = []
        for train_idx, val_idx in kfold_indices(len(X), args.cv, seed=args.seed):
            f = train_forest(X[train_idx], y[train_idx], forest.params,
                             seed=args.seed, feature_names=FEATURE_NAMES)
            aucs.append(roc_auc(f.predict_proba(X[val_idx]), y[val_idx]))
        report = make_report("eval", [], {
            "cv_folds": args.cv,
            "cv_mean_roc_auc": round(float(np.mean(aucs)), 4),
        })
        emit(report, args.format)
        return EXIT_CLEAN
    _, X_test, _, y_test = train_test_split(X, y, args.test_fraction,
                                            seed=args.seed)
    scores = forest.predict_proba(X_test)
    pred = (scores >= 0.5).astype(np.int64)
    precision, recall, f1 = precision_recall_f1(pred, y_test)
    baseline = stratified_baseline(y_test, seed=args.seed)
    b_precision, b_recall, b_f1 = precision_recall_f1(baseline, y_test)
    report = make_report("eval", [], {
        "test_samples": int(len(y_test)),
        "roc_auc": round(roc_auc(scores, y_test), 4),
        "f1": round(f1, 4),
        "precision": round(precision, 4),
        "recall": round(recall, 4),
        "baseline_roc_auc": round(roc_auc(baseline.astype(float), y_test), 4),
        "baseline_f1": round(b_f1, 4),
    })
    emit(report, args.format)
    return EXIT_CLEAN


def cmd_explain(args) -> int:
    try:
        X, y = _load_labeled(args.features)
        forest = load_forest(args.model)
    except (OSError, json.JSONDecodeError, KeyError, ModelError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    base_auc, importances = permutation_importance(
        forest, X, y, repeats=args.repeats, seed=args.seed)
    records = [{
        "record": "importance",
        "feature": imp.feature,
        "mean_auc_drop": imp.mean_drop,
        "std_auc_drop": imp.std_drop,
    } for imp in importances]
    for j in range(forest.n_features):
        curve = partial_dependence(forest, X, j, with_ice=args.ice,
                                   seed=args.seed)
        records.append({
            "record": "pdp",
            "feature": curve.feature,
            "grid": curve.grid,
            "mean_probability": curve.mean_probability,
            "ice_traces": curve.ice_traces,
        })
    if args.out:
        _write_records(args.out, records)
        payload = []
    else:
        payload = records
    ranked = sorted(importances, key=lambda r: -r.mean_drop)
    report = make_report("explain", payload, {
        "baseline_roc_auc": round(base_auc, 4),
        "repeats": args.repeats,
        "top_feature": ranked[0].feature,
        **({"out": str(args.out)} if args.out else {}),
    })
    emit(report, args.format)
    return EXIT_CLEAN


# --- fetch ----------------------------------------------------------------------


def cmd_fetch(args) -> int:
    if not args.packages:
        report = make_report("fetch", [], {"packages": 0})
        emit(report, args.format)
        return EXIT_CLEAN
    if args.offline:
        print("error: fetch requires network access; remove --offline or use "
              "snapshot files", file=sys.stderr)
        return EXIT_ERROR
    registry = args.registry or os.environ.get(REGISTRY_ENV, DEFAULT_REGISTRY)
    s = Snapshot()
    for pkg in args.packages:
        try:
            releases, dep_edges = fetch_packument(registry, pkg)
        except RegistryError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_ERROR
        merge_packument(s, pkg, releases, dep_edges)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_snapshot(s, out / "releases.jsonl", out / "deps.jsonl")
    report = make_report("fetch", [], {
        "packages": len(args.packages),
        "releases": sum(len(v) for v in s.releases.values()),
        "out": str(out),
    })
    emit(report, args.format)
    return EXIT_CLEAN


# --- parser ---------------------------------------------------------------------


def _add_common(p):
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)


def _add_snapshot_args(p):
    p.add_argument("--releases", required=True)
    p.add_argument("--deps", required=True)
    p.add_argument("--advisories", required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depvet",
        description="Dependency smell linting and vulnerability "
                    "responsiveness analysis for npm-style projects.")
    parser.add_argument("--version", action="version",
                        version=f"depvet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lint", help="detect dependency smells in a project")
    p.add_argument("path")
    p.add_argument("--include-dev", action="store_true")
    p.add_argument("--no-lockfile", action="store_true",
                   help="skip the package-lock check (suppresses S5)")
    p.add_argument("--suppress", action="append", metavar="SMELL",
                   help="smell ids to suppress, e.g. --suppress S5")
    _add_common(p)
    p.set_defaults(func=cmd_lint)

    p = sub.add_parser("timeline", help="fix/adoption delay analysis")
    _add_snapshot_args(p)
    p.add_argument("--advisory", help="single advisory id (default: all)")
    p.add_argument("--severity", choices=SEVERITIES)
    _add_common(p)
    p.set_defaults(func=cmd_timeline)

    p = sub.add_parser("features", help="emit labeled feature records")
    _add_snapshot_args(p)
    p.add_argument("--out", required=True)
    p.add_argument("--severity", choices=SEVERITIES)
    p.add_argument("--fast-below", type=float, default=2.0,
                   help="fast-class threshold in days")
    p.add_argument("--slow-above", type=float, default=14.0,
                   help="slow-class threshold in days")
    _add_common(p)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="train the responder-speed forest")
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--trees", type=int, default=1000)
    p.add_argument("--min-split", type=int, default=8)
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained model")
    p.add_argument("--features", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--cv", type=int, help="k-fold cross-validation instead "
                                          "of the holdout split")
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("explain", help="permutation importance and PDP/ICE")
    p.add_argument("--features", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--ice", action="store_true")
    p.add_argument("--out", help="write records to a file instead of stdout")
    _add_common(p)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("fetch", help="fetch registry metadata into snapshot "
                                     "fragment files")
    p.add_argument("packages", nargs="*")
    p.add_argument("--registry", help=f"registry base URL (or ${REGISTRY_ENV})")
    p.add_argument("--out", default="snapshot")
    p.add_argument("--offline", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_fetch)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
