from pathlib import Path

import pytest

from depvet.manifest import parse_manifest
from depvet.smells import (
    LintOptions,
    Smell,
    detect_code_smells,
    detect_constraint_smells,
    lint_project,
    node_builtin_modules,
    normalize_import,
    scan_file,
    scan_imports,
)


def smell_set(findings):
    return {(f.smell.value, f.dependency) for f in findings}


def manifest_for(deps, dev=None, optional=None):
    doc = {"name": "fix", "version": "1.0.0", "dependencies": deps}
    if dev:
        doc["devDependencies"] = dev
    if optional:
        doc["optionalDependencies"] = optional
    import json

    return parse_manifest(json.dumps(doc))


class TestConstraintSmells:
    @pytest.mark.parametrize("constraint", ["1.2.3", "=2.0.0", "0.5.0"])
    def test_s1_pinned(self, constraint):
        findings = detect_constraint_smells(manifest_for({"dep": constraint}))
        assert smell_set(findings) == {("S1", "dep")}

    @pytest.mark.parametrize("constraint", [
        "https://example.com/d.tgz",
        "git+https://github.com/u/r.git",
        "github:u/r",
    ])
    def test_s2_url(self, constraint):
        findings = detect_constraint_smells(manifest_for({"dep": constraint}))
        assert smell_set(findings) == {("S2", "dep")}

    @pytest.mark.parametrize("constraint", ["~1.2.3", "1.2.x", ">=1.2.3 <1.3.0"])
    def test_s3_restrictive(self, constraint):
        findings = detect_constraint_smells(manifest_for({"dep": constraint}))
        assert smell_set(findings) == {("S3", "dep")}

    @pytest.mark.parametrize("constraint", [">=1.2.3", "*", ">=0.1.0"])
    def test_s4_permissive(self, constraint):
        findings = detect_constraint_smells(manifest_for({"dep": constraint}))
        assert smell_set(findings) == {("S4", "dep")}

    @pytest.mark.parametrize("constraint", ["^1.2.3", "1.x", ">=1.2.3 <2.0.0",
                                            "^0.2.3", "~0.2.3", "0.2.x"])
    def test_semver_compliant_baseline_is_clean(self, constraint):
        # caret-equivalent post-1.0.0 ranges and any 0.x patch-extent range
        # are the sanctioned default: nothing to report
        assert detect_constraint_smells(manifest_for({"dep": constraint})) == []

    def test_tags_and_files_not_flagged(self):
        m = manifest_for({"a": "latest", "b": "file:../b"})
        assert detect_constraint_smells(m) == []

    def test_dev_sections_only_with_flag(self):
        m = manifest_for({}, dev={"d": "1.2.3"}, optional={"o": "*"})
        assert detect_constraint_smells(m) == []
        flagged = detect_constraint_smells(m, include_dev=True)
        assert smell_set(flagged) == {("S1", "d"), ("S4", "o")}


class TestImportScanning:
    @pytest.mark.parametrize("target,expect", [
        ("lodash", "lodash"),
        ("lodash/fp", "lodash"),
        ("lodash/fp/curry", "lodash"),
        ("@scope/pkg", "@scope/pkg"),
        ("@scope/pkg/deep/mod", "@scope/pkg"),
        ("./local", None),
        ("../up", None),
        ("/abs", None),
        ("node:fs", None),
        ("fs", None),
        ("path", None),
        ("@scope", None),
        ("", None),
    ])
    def test_normalize_import(self, target, expect):
        assert normalize_import(target) == expect

    def test_builtins_list_loaded(self):
        builtins = node_builtin_modules()
        assert {"fs", "path", "http", "crypto"} <= builtins

    def test_scan_file_forms(self, tmp_path):
        src = tmp_path / "all.js"
        src.write_text(
            "import a from 'pkg-a';\n"
            "import 'pkg-b';\n"
            "import {x as y} from \"pkg-c\";\n"
            "export {z} from 'pkg-d';\n"
            "const e = require('pkg-e');\n"
            "const f = await import('pkg-f');\n"
            "const g = require('./relative');\n"
            "const h = require('fs');\n"
        )
        found, notices = scan_file(src)
        assert found == {f"pkg-{c}" for c in "abcdef"}
        assert notices == []

    def test_dynamic_specifier_notice(self, tmp_path):
        src = tmp_path / "dyn.js"
        src.write_text("const name = 'x'; require(name);\n")
        found, notices = scan_file(src)
        assert found == set()
        assert len(notices) == 1 and "computed" in notices[0]

    def test_scan_skips_node_modules_and_hidden(self, tmp_path):
        (tmp_path / "index.js").write_text("require('real');")
        nm = tmp_path / "node_modules" / "dep"
        nm.mkdir(parents=True)
        (nm / "index.js").write_text("require('vendored');")
        hidden = tmp_path / ".cache"
        hidden.mkdir()
        (hidden / "gen.js").write_text("require('cached');")
        (tmp_path / "README.md").write_text("require('not-code')")
        assert scan_imports(tmp_path) == {"real"}

    def test_scan_ts_and_mjs(self, tmp_path):
        (tmp_path / "a.ts").write_text("import x from 'ts-dep';")
        (tmp_path / "b.mjs").write_text("import 'mjs-dep';")
        assert scan_imports(tmp_path) == {"ts-dep", "mjs-dep"}


class TestCodeSmells:
    def test_s6_unused(self):
        m = manifest_for({"used": "^1.0.0", "unused": "^1.0.0"})
        findings = detect_code_smells(m, {"used"})
        assert smell_set(findings) == {("S6", "unused")}

    def test_s7_missing(self):
        m = manifest_for({"used": "^1.0.0"})
        findings = detect_code_smells(m, {"used", "ghost"})
        assert smell_set(findings) == {("S7", "ghost")}

    def test_s7_notes_dev_listing(self):
        m = manifest_for({}, dev={"tool": "^1.0.0"})
        findings = detect_code_smells(m, {"tool"})
        assert smell_set(findings) == {("S7", "tool")}
        assert "devDependencies" in findings[0].evidence


class TestLintProject:
    CLEAN = {
        "name": "clean", "version": "1.0.0",
        "dependencies": {"alpha": "^1.2.3", "beta": "^0.2.3"},
    }
    CLEAN_SRC = {"index.js": "const a = require('alpha');\nimport 'beta';\n"}

    def test_clean_project_zero_findings(self, make_project):
        root = make_project(self.CLEAN, self.CLEAN_SRC)
        assert lint_project(root) == []

    def test_s5_no_lockfile(self, make_project):
        root = make_project(self.CLEAN, self.CLEAN_SRC, lockfiles=())
        findings = lint_project(root)
        assert smell_set(findings) == {("S5", None)}

    @pytest.mark.parametrize("lockname", ["npm-shrinkwrap.json", "yarn.lock"])
    def test_s5_satisfied_by_alternatives(self, make_project, lockname):
        root = make_project(self.CLEAN, self.CLEAN_SRC, lockfiles=(lockname,))
        assert lint_project(root) == []

    def test_kitchen_sink_exact_set(self, make_project):
        root = make_project(
            {"name": "sink", "version": "1.0.0",
             "dependencies": {
                 "pinned": "1.2.3",
                 "giturl": "git+https://github.com/u/r.git",
                 "narrow": "~1.2.3",
                 "wild": "*",
                 "good": "^1.0.0",
             }},
            {"index.js": "require('pinned'); require('narrow');\n"
                         "require('wild'); require('good');\n"
                         "require('ghost');\n"},
            lockfiles=())
        findings = lint_project(root)
        assert smell_set(findings) == {
            ("S1", "pinned"), ("S2", "giturl"), ("S3", "narrow"),
            ("S4", "wild"), ("S5", None), ("S6", "giturl"), ("S7", "ghost"),
        }
        # ordering is deterministic by (smell, dependency)
        assert [f.smell.value for f in findings] == sorted(
            f.smell.value for f in findings)

    def test_suppression(self, make_project):
        root = make_project(self.CLEAN, self.CLEAN_SRC, lockfiles=())
        assert lint_project(root, LintOptions(suppress=frozenset({"S5"}))) == []

    def test_no_code_check(self, make_project):
        root = make_project(
            {"name": "x", "version": "1.0.0", "dependencies": {"a": "^1.0.0"}},
            {})
        assert smell_set(lint_project(root)) == {("S6", "a")}
        assert lint_project(root, LintOptions(check_code=False)) == []

    def test_missing_manifest_raises(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            lint_project(tmp_path)

    def test_url_dep_excluded_from_s1_s3_s4(self, make_project):
        # S2 takes the constraint out of the range-based detectors entirely
        root = make_project(
            {"name": "x", "version": "1.0.0",
             "dependencies": {"g": "github:u/r"}},
            {"index.js": "require('g');"})
        assert smell_set(lint_project(root)) == {("S2", "g")}
