"""End-to-end scenario runs, persistence, and dimension aggregation."""

import hashlib
import json
from fractions import Fraction

import pytest

from portal_agent.composition import validate
from portal_agent.errors import EmptyInputError, ParseError, RunNotFoundError
from portal_agent.evaluator import AutoSubscores
from portal_agent.judge import DimensionScores, RubricScores
from portal_agent.pipeline import (
    AggregateReport,
    RunRecord,
    RunStore,
    aggregate,
    bundled_scenario_dir,
    bundled_scenarios,
    html_digest,
    load_scenario_dir,
    load_scenario_file,
    run_corpus,
    run_pipeline,
)
from portal_agent.planner import PlanTrace

from oracles import mean_fraction

DOOMED_SCENARIO = {
    "scenario_id": "doomed",
    "expected": {
        "components": [
            {"kind": "DataTable", "expected_props": {"title": "T", "page_size": "lots"}}
        ],
        "regions": ["table"],
    },
}


def record_for(dims, scenario_id="s", run_id="r"):
    zero = AutoSubscores(1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
    return RunRecord(
        run_id=run_id,
        timestamp="2026-01-01T00:00:00+00:00",
        scenario_id=scenario_id,
        composition=None,
        html_digest=html_digest(""),
        subscores=zero,
        autoscore=1.0,
        rubric=RubricScores(5, 5, 5, 5, "pass", ""),
        dimensions=DimensionScores(*dims),
        adjudicate=False,
        trace=PlanTrace(backend="rule_based"),
    )


def strip_identity(doc):
    doc = dict(doc)
    doc.pop("run_id")
    doc.pop("timestamp")
    return doc


class TestRunPipeline:
    def test_perfect_scenario(self, inv, scenarios):
        record = run_pipeline(scenarios["analytics-sales"], inv)
        assert record.scenario_id == "analytics-sales"
        assert record.autoscore == 1.0
        assert record.subscores.as_tuple() == (1.0,) * 6
        assert record.rubric.overall_verdict == "pass"
        assert record.dimensions.as_tuple() == (5.0,) * 5
        assert record.adjudicate is False
        assert record.trace.backend == "rule_based"
        assert validate(inv, record.composition).ok

    def test_gap_scenario_frozen_score(self, inv, scenarios):
        # Kanban has no table slot, so one of three core requirements is
        # unmet: cov = layout = 2/3, rest 1.0.
        # 0.5*(2/3) + 0.5 = 5/6.
        record = run_pipeline(scenarios["board-triage"], inv)
        want = Fraction(7, 20) * Fraction(2, 3) + Fraction(1, 5) + Fraction(1, 10) \
            + Fraction(3, 20) * Fraction(2, 3) + Fraction(1, 10) + Fraction(1, 10)
        assert want == Fraction(5, 6)
        assert record.autoscore == 0.8333333333333333
        assert abs(record.autoscore - float(want)) < 1e-12
        assert record.subscores.s_cov == pytest.approx(2 / 3)
        assert record.subscores.s_layout == pytest.approx(2 / 3)
        assert record.rubric.overall_verdict == "pass"
        assert record.adjudicate is False
        assert (
            "no open slot on board.kanban.v1 accepts 'DataTable'; unit skipped"
            in record.trace.notes
        )

    def test_all_bundled_scenarios(self, inv, scenarios):
        by_id = {}
        for doc in scenarios.values():
            record = run_pipeline(doc, inv)
            by_id[record.scenario_id] = record
        perfect = {
            "analytics-growth", "analytics-sales", "board-delivery",
            "portal-handbook", "portal-news",
        }
        for sid in perfect:
            assert by_id[sid].autoscore == 1.0, sid
        assert by_id["board-triage"].autoscore == 0.8333333333333333

    def test_digest_matches_rendered_page(self, inv, scenarios):
        from portal_agent.renderer import render

        record = run_pipeline(scenarios["portal-news"], inv)
        out = render(inv, record.composition)
        assert record.html_digest == hashlib.sha256(out.html.encode()).hexdigest()

    def test_composition_is_canonical(self, inv, scenarios):
        from portal_agent.composition import canonicalize

        record = run_pipeline(scenarios["board-delivery"], inv)
        assert canonicalize(record.composition) == record.composition

    def test_planning_failure_yields_record(self, inv):
        record = run_pipeline(DOOMED_SCENARIO, inv)
        assert record.composition is None
        assert record.autoscore == 0.0
        assert record.subscores.as_tuple() == (0.0,) * 6
        assert record.rubric.overall_verdict == "fail"
        assert record.dimensions.as_tuple() == (1.0,) * 5
        assert record.html_digest == hashlib.sha256(b"").hexdigest()
        assert record.adjudicate is False

    def test_two_runs_identical_but_for_identity(self, inv, scenarios):
        first = run_pipeline(scenarios["analytics-growth"], inv)
        second = run_pipeline(scenarios["analytics-growth"], inv)
        assert first.run_id != second.run_id
        assert strip_identity(first.to_dict()) == strip_identity(second.to_dict())
        assert first.html_digest == second.html_digest

    def test_persists_when_store_given(self, inv, scenarios, tmp_path):
        store = RunStore(tmp_path)
        record = run_pipeline(scenarios["portal-handbook"], inv, store=store)
        assert store.load(record.run_id).to_dict() == record.to_dict()

    def test_failure_record_also_persisted(self, inv, tmp_path):
        store = RunStore(tmp_path)
        record = run_pipeline(DOOMED_SCENARIO, inv, store=store)
        assert [e["scenario_id"] for e in store.list_runs()] == ["doomed"]
        assert store.load(record.run_id).composition is None


class TestRunCorpus:
    def test_ordered_by_scenario_id(self, inv, scenarios):
        docs = list(scenarios.values())
        docs.reverse()
        records = run_corpus(docs, inv)
        assert [r.scenario_id for r in records] == sorted(scenarios)

    def test_bundled_corpus_counts(self, inv):
        records = run_corpus(bundled_scenarios(), inv)
        assert len(records) == 6
        assert sum(1 for r in records if r.autoscore == 1.0) == 5


class TestAggregate:
    def test_empty_rejected(self):
        with pytest.raises(EmptyInputError):
            aggregate([])

    def test_single_record(self):
        report = aggregate([record_for((4, 3, 5, 2, 1))])
        assert report.dimension_means() == (4.0, 3.0, 5.0, 2.0, 1.0)
        assert report.overall_mean == 3.0
        assert report.scenario_count == 1

    def test_means_against_oracle(self):
        rows = [(4, 3, 5, 2, 1), (5, 5, 5, 5, 5), (1, 2, 3, 4, 5)]
        records = [record_for(r, run_id=f"r{i}") for i, r in enumerate(rows)]
        report = aggregate(records)
        for i, name in enumerate(
            ["correctness", "ui_fidelity", "compositionality", "resilience", "clarity"]
        ):
            want = mean_fraction(row[i] for row in rows)
            assert getattr(report, name) == pytest.approx(float(want), abs=1e-12)
        overall = mean_fraction(report.dimension_means())
        assert report.overall_mean == pytest.approx(float(overall), abs=1e-12)

    def test_bundled_corpus_aggregate(self, inv):
        # One scenario scores 5/6, feeding dimensions 13/3 (compositionality
        # 11/3); the rest are straight fives. Means over 6 runs:
        # (5*5 + 13/3)/6 = 44/9, compositionality (5*5 + 11/3)/6 = 43/9,
        # overall (4*(44/9) + 43/9)/5 = 73/15.
        records = run_corpus(bundled_scenarios(), inv)
        report = aggregate(records)
        assert report.correctness == pytest.approx(float(Fraction(44, 9)), abs=1e-9)
        assert report.compositionality == pytest.approx(float(Fraction(43, 9)), abs=1e-9)
        assert report.overall_mean == pytest.approx(float(Fraction(73, 15)), abs=1e-9)
        assert report.to_dict() == {
            "correctness": 4.889,
            "ui_fidelity": 4.889,
            "compositionality": 4.778,
            "resilience": 4.889,
            "clarity": 4.889,
            "overall_mean": 4.867,
            "scenario_count": 6,
        }

    def test_report_rounding_is_display_only(self):
        report = aggregate([record_for((4, 4, 4, 4, 4)), record_for((5, 5, 5, 5, 5), run_id="r2")])
        assert report.correctness == 4.5
        assert report.to_dict()["correctness"] == 4.5


class TestRunStore:
    def test_round_trip_bit_exact(self, inv, scenarios, tmp_path):
        store = RunStore(tmp_path)
        record = run_pipeline(scenarios["board-triage"], inv, store=store)
        loaded = store.load(record.run_id)
        assert loaded.to_dict() == record.to_dict()
        assert loaded.autoscore == record.autoscore  # no rounding drift
        assert loaded.composition == record.composition

    def test_append_only(self, tmp_path):
        store = RunStore(tmp_path)
        record = record_for((5, 5, 5, 5, 5))
        store.persist(record)
        with pytest.raises(ValueError, match="append-only"):
            store.persist(record)

    def test_missing_run(self, tmp_path):
        store = RunStore(tmp_path)
        with pytest.raises(RunNotFoundError):
            store.load("nope")

    def test_index_order(self, tmp_path):
        store = RunStore(tmp_path)
        for i in range(3):
            store.persist(record_for((5, 5, 5, 5, 5), scenario_id=f"s{i}", run_id=f"r{i}"))
        assert [e["run_id"] for e in store.list_runs()] == ["r0", "r1", "r2"]
        assert [r.scenario_id for r in store.load_all()] == ["s0", "s1", "s2"]

    def test_corrupt_index(self, tmp_path):
        store = RunStore(tmp_path)
        (tmp_path / "index.json").write_text("{broken", encoding="utf-8")
        with pytest.raises(ParseError):
            store.list_runs()

    def test_corrupt_record(self, tmp_path):
        store = RunStore(tmp_path)
        (tmp_path / "bad.json").write_text("{broken", encoding="utf-8")
        with pytest.raises(ParseError):
            store.load("bad")

    def test_full_float_precision_in_file(self, inv, scenarios, tmp_path):
        store = RunStore(tmp_path)
        record = run_pipeline(scenarios["board-triage"], inv, store=store)
        raw = json.loads((tmp_path / f"{record.run_id}.json").read_text())
        assert raw["autoscore"] == 0.8333333333333333

    def test_store_root_created(self, tmp_path):
        nested = tmp_path / "a" / "b"
        RunStore(nested)
        assert nested.is_dir()


class TestScenarioLoading:
    def test_bundled_scenarios_sorted(self):
        docs = bundled_scenarios()
        ids = [d["scenario_id"] for d in docs]
        assert ids == sorted(ids)
        assert ids == [
            "analytics-growth", "analytics-sales", "board-delivery",
            "board-triage", "portal-handbook", "portal-news",
        ]

    def test_bundled_dir_exists(self):
        path = bundled_scenario_dir()
        assert path is not None
        assert len(list(path.glob("*.json"))) == 6

    def test_load_file(self, tmp_path):
        p = tmp_path / "s.json"
        p.write_text('{"scenario_id": "x", "description": "hi"}')
        assert load_scenario_file(p)["scenario_id"] == "x"

    def test_load_file_missing(self, tmp_path):
        with pytest.raises(ParseError, match="not found"):
            load_scenario_file(tmp_path / "ghost.json")

    def test_load_file_non_object(self, tmp_path):
        p = tmp_path / "s.json"
        p.write_text("[1]")
        with pytest.raises(ParseError):
            load_scenario_file(p)

    def test_load_dir_sorted(self, tmp_path):
        for name in ("b.json", "a.json"):
            (tmp_path / name).write_text(json.dumps({"scenario_id": name, "description": "d"}))
        docs = load_scenario_dir(tmp_path)
        assert [d["scenario_id"] for d in docs] == ["a.json", "b.json"]

    def test_load_dir_empty(self, tmp_path):
        with pytest.raises(EmptyInputError):
            load_scenario_dir(tmp_path)

    def test_load_dir_missing(self, tmp_path):
        with pytest.raises(ParseError):
            load_scenario_dir(tmp_path / "ghost")


class TestRecordSerialization:
    def test_from_dict_round_trip(self, inv, scenarios):
        record = run_pipeline(scenarios["analytics-sales"], inv)
        again = RunRecord.from_dict(record.to_dict())
        assert again.to_dict() == record.to_dict()

    def test_failure_record_round_trip(self, inv):
        record = run_pipeline(DOOMED_SCENARIO, inv)
        again = RunRecord.from_dict(record.to_dict())
        assert again.composition is None
        assert again.to_dict() == record.to_dict()

    def test_digest_is_sha256(self):
        assert html_digest("abc") == hashlib.sha256(b"abc").hexdigest()
        assert html_digest("") == (
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        )
