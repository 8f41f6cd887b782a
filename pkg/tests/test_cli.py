"""The `agent` command line: every subcommand plus the one-line error contract."""

import json
import re
import subprocess
import sys

import pytest

from portal_agent.cli import main
from portal_agent.composition import canonicalize, composition_from_json
from portal_agent.pipeline import RunStore, bundled_scenarios
from portal_agent.renderer import render

from conftest import SCENARIO_DIR

SALES = str(SCENARIO_DIR / "analytics-sales.json")


@pytest.fixture()
def scenario_dir(tmp_path):
    d = tmp_path / "scenarios"
    d.mkdir()
    for doc in bundled_scenarios():
        (d / f"{doc['scenario_id']}.json").write_text(json.dumps(doc), encoding="utf-8")
    return d


class TestGenerate:
    def test_stdout_document(self, capsys):
        assert main(["generate", "--scenario", SALES]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert set(doc) == {"composition", "report", "trace"}
        assert doc["report"]["ok"] is True
        assert doc["composition"]["template"] == "dashboard.analytics.v1"

    def test_out_file(self, tmp_path, capsys):
        out = tmp_path / "c.json"
        assert main(["generate", "--scenario", SALES, "--out", str(out)]) == 0
        assert capsys.readouterr().out == ""
        assert json.loads(out.read_text())["report"]["ok"] is True

    def test_custom_inventory_flag(self, tmp_path, inv, capsys):
        # The global flag sits before the subcommand.
        path = tmp_path / "catalog.json"
        path.write_text(json.dumps(inv.to_dict()), encoding="utf-8")
        assert main(["--inventory", str(path), "generate", "--scenario", SALES]) == 0
        assert json.loads(capsys.readouterr().out)["report"]["ok"] is True

    def test_missing_scenario_file(self, tmp_path, capsys):
        rc = main(["generate", "--scenario", str(tmp_path / "ghost.json")])
        assert rc == 1
        err = capsys.readouterr().err
        assert err.startswith("error [ParseError]:")
        assert err.count("\n") == 1

    def test_bad_backend_rejected_by_argparse(self):
        with pytest.raises(SystemExit) as exc:
            main(["generate", "--scenario", SALES, "--backend", "psychic"])
        assert exc.value.code == 2


class TestRender:
    def generated(self, tmp_path):
        """Generate for the sales scenario; return the bare composition file."""
        wrapper = tmp_path / "c.json"
        main(["generate", "--scenario", SALES, "--out", str(wrapper)])
        inner = tmp_path / "composition.json"
        inner.write_text(json.dumps(json.loads(wrapper.read_text())["composition"]))
        return inner

    def test_stdout_is_exact_page(self, tmp_path, inv, capsys):
        comp_file = self.generated(tmp_path)
        capsys.readouterr()
        assert main(["render", "--composition", str(comp_file)]) == 0
        composition = canonicalize(composition_from_json(comp_file.read_text()))
        assert capsys.readouterr().out == render(inv, composition).html

    def test_out_file_prints_stats(self, tmp_path, capsys):
        comp_file = self.generated(tmp_path)
        page = tmp_path / "page.html"
        capsys.readouterr()
        assert main(["render", "--composition", str(comp_file), "--out", str(page)]) == 0
        stats = json.loads(capsys.readouterr().out)
        assert stats == {"node_count": 30, "total_render_weight": 12, "max_depth": 6}
        assert page.read_text(encoding="utf-8").startswith("<main ")

    def test_invalid_composition(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({
            "template": "dashboard.analytics.v1",
            "components": [
                {"id": "x", "type": "Carousel3D", "slot": "body.content", "props": {}},
            ],
        }))
        assert main(["render", "--composition", str(bad)]) == 1
        assert capsys.readouterr().err.startswith("error [InvalidComposition]:")

    def test_wrapper_document_rejected(self, tmp_path, capsys):
        # The render input is a bare composition, not the generate wrapper.
        wrapper = tmp_path / "c.json"
        main(["generate", "--scenario", SALES, "--out", str(wrapper)])
        capsys.readouterr()
        assert main(["render", "--composition", str(wrapper)]) == 1
        assert capsys.readouterr().err.startswith("error [ParseError]:")


class TestEvaluate:
    def test_perfect_page(self, tmp_path, capsys):
        wrapper = tmp_path / "c.json"
        main(["generate", "--scenario", SALES, "--out", str(wrapper)])
        inner = tmp_path / "inner.json"
        inner.write_text(json.dumps(json.loads(wrapper.read_text())["composition"]))
        page = tmp_path / "page.html"
        main(["render", "--composition", str(inner), "--out", str(page)])
        capsys.readouterr()
        assert main(["evaluate", "--scenario", SALES, "--html", str(page)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["autoscore"] == 1.0
        assert report["diffs"] == []

    def test_junk_page(self, tmp_path, capsys):
        page = tmp_path / "page.html"
        page.write_text("not markup at all")
        assert main(["evaluate", "--scenario", SALES, "--html", str(page)]) == 1
        assert capsys.readouterr().err.startswith("error [ParseError]:")


class TestPipeline:
    LINE = re.compile(
        r"^[a-z0-9-]+: autoscore=\d\.\d{3} verdict=(pass|borderline|fail) run_id=[0-9a-f]{32}$"
    )

    def test_full_corpus(self, tmp_path, scenario_dir, capsys):
        runs = tmp_path / "runs"
        rc = main(["pipeline", "--scenarios", str(scenario_dir), "--out", str(runs)])
        assert rc == 0
        out = capsys.readouterr().out
        lines = out.splitlines()
        scenario_lines = lines[:6]
        assert all(self.LINE.match(line) for line in scenario_lines)
        assert [line.split(":")[0] for line in scenario_lines] == [
            d["scenario_id"] for d in bundled_scenarios()
        ]

        written = json.loads((runs / "aggregate.json").read_text())
        assert written == {
            "correctness": 4.889,
            "ui_fidelity": 4.889,
            "compositionality": 4.778,
            "resilience": 4.889,
            "clarity": 4.889,
            "overall_mean": 4.867,
            "scenario_count": 6,
        }
        assert json.loads("\n".join(lines[6:])) == written
        assert len(RunStore(runs).list_runs()) == 6

    def test_empty_scenario_dir(self, tmp_path, capsys):
        empty = tmp_path / "none"
        empty.mkdir()
        rc = main(["pipeline", "--scenarios", str(empty), "--out", str(tmp_path / "r")])
        assert rc == 1
        assert capsys.readouterr().err.startswith("error [EmptyInput]:")


class TestAggregate:
    def test_matches_pipeline_output(self, tmp_path, scenario_dir, capsys):
        runs = tmp_path / "runs"
        main(["pipeline", "--scenarios", str(scenario_dir), "--out", str(runs)])
        capsys.readouterr()
        assert main(["aggregate", "--runs", str(runs)]) == 0
        assert json.loads(capsys.readouterr().out) == json.loads(
            (runs / "aggregate.json").read_text()
        )

    def test_empty_store(self, tmp_path, capsys):
        assert main(["aggregate", "--runs", str(tmp_path / "runs")]) == 1
        assert capsys.readouterr().err.startswith("error [EmptyInput]:")


class TestParser:
    def test_requires_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_installed_entry_point(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "portal_agent.cli", "generate", "--scenario", SALES],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["report"]["ok"] is True
