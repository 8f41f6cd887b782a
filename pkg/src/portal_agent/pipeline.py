"""Five-step scenario pipeline, run persistence, and aggregation.

Steps per scenario: parse intent, plan a composition, render it, compute
automatic metrics, obtain rubric judgments. The composition is
canonicalized between planning and rendering. A planning failure still
yields a record (zero subscores, verdict fail) so resilience is counted
rather than crashed on. Runs persist as one JSON file each plus an index;
the store is append-only.
"""

from __future__ import annotations

import hashlib
import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from statistics import fmean
from typing import Optional

from .composition import (
    Composition,
    RepairAction,
    canonicalize,
    composition_from_dict,
)
from .errors import EmptyInputError, ParseError, PlanningFailedError, RunNotFoundError
from .evaluator import AutoSubscores, EvalReport, autoscore, evaluate_output
from .inventory import Inventory
from .judge import (
    DimensionScores,
    JudgeConfig,
    RubricScores,
    flag_for_adjudication,
    judge_single,
)
from .planner import IntentSpec, PlannerConfig, PlanTrace, parse_intent, plan
from .renderer import render


@dataclass
class RunRecord:
    run_id: str
    timestamp: str
    scenario_id: str
    composition: Optional[Composition]
    html_digest: str
    subscores: AutoSubscores
    autoscore: float
    rubric: RubricScores
    dimensions: DimensionScores
    adjudicate: bool
    trace: PlanTrace

    def to_dict(self) -> dict:
        # Full float precision; the 6-decimal wire rounding is for report
        # fragments, not the persisted record.
        return {
            "run_id": self.run_id,
            "timestamp": self.timestamp,
            "scenario_id": self.scenario_id,
            "composition": None if self.composition is None else self.composition.to_dict(),
            "html_digest": self.html_digest,
            "subscores": {
                "cov": self.subscores.s_cov,
                "prop": self.subscores.s_prop,
                "data": self.subscores.s_data,
                "layout": self.subscores.s_layout,
                "a11y": self.subscores.s_a11y,
                "perf": self.subscores.s_perf,
            },
            "autoscore": self.autoscore,
            "rubric": {
                "intent_alignment": self.rubric.intent_alignment,
                "semantic_correctness": self.rubric.semantic_correctness,
                "accessibility_signals": self.rubric.accessibility_signals,
                "visual_polish": self.rubric.visual_polish,
                "overall_verdict": self.rubric.overall_verdict,
                "rationale": self.rubric.rationale,
            },
            "dimensions": {
                "correctness": self.dimensions.correctness,
                "ui_fidelity": self.dimensions.ui_fidelity,
                "compositionality": self.dimensions.compositionality,
                "resilience": self.dimensions.resilience,
                "clarity": self.dimensions.clarity,
            },
            "adjudicate": self.adjudicate,
            "trace": self.trace.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RunRecord":
        sub = doc["subscores"]
        rubric = doc["rubric"]
        dims = doc["dimensions"]
        trace = doc.get("trace", {})
        return cls(
            run_id=doc["run_id"],
            timestamp=doc["timestamp"],
            scenario_id=doc["scenario_id"],
            composition=(
                None if doc.get("composition") is None
                else composition_from_dict(doc["composition"])
            ),
            html_digest=doc["html_digest"],
            subscores=AutoSubscores(
                s_cov=sub["cov"], s_prop=sub["prop"], s_data=sub["data"],
                s_layout=sub["layout"], s_a11y=sub["a11y"], s_perf=sub["perf"],
            ),
            autoscore=doc["autoscore"],
            rubric=RubricScores(
                intent_alignment=rubric["intent_alignment"],
                semantic_correctness=rubric["semantic_correctness"],
                accessibility_signals=rubric["accessibility_signals"],
                visual_polish=rubric["visual_polish"],
                overall_verdict=rubric["overall_verdict"],
                rationale=rubric.get("rationale", ""),
            ),
            dimensions=DimensionScores(
                correctness=dims["correctness"],
                ui_fidelity=dims["ui_fidelity"],
                compositionality=dims["compositionality"],
                resilience=dims["resilience"],
                clarity=dims["clarity"],
            ),
            adjudicate=doc["adjudicate"],
            trace=PlanTrace(
                backend=trace.get("backend", ""),
                template_id=trace.get("template_id", ""),
                selection_reason=trace.get("selection_reason", ""),
                retries_used=trace.get("retries_used", 0),
                raw_outputs=list(trace.get("raw_outputs", [])),
                repair_actions=[
                    RepairAction(
                        violation_code=a["violation_code"], path=a["path"],
                        action=a["action"], detail=a["detail"],
                    )
                    for a in trace.get("repair_actions", [])
                ],
                notes=list(trace.get("notes", [])),
            ),
        )


@dataclass(frozen=True)
class AggregateReport:
    correctness: float
    ui_fidelity: float
    compositionality: float
    resilience: float
    clarity: float
    overall_mean: float
    scenario_count: int

    def dimension_means(self) -> tuple[float, float, float, float, float]:
        return (self.correctness, self.ui_fidelity, self.compositionality,
                self.resilience, self.clarity)

    def to_dict(self) -> dict:
        """Display form, rounded to 3 decimals; keep the dataclass for full precision."""
        return {
            "correctness": round(self.correctness, 3),
            "ui_fidelity": round(self.ui_fidelity, 3),
            "compositionality": round(self.compositionality, 3),
            "resilience": round(self.resilience, 3),
            "clarity": round(self.clarity, 3),
            "overall_mean": round(self.overall_mean, 3),
            "scenario_count": self.scenario_count,
        }


def html_digest(html: str) -> str:
    return hashlib.sha256(html.encode("utf-8")).hexdigest()


def _new_run_id() -> str:
    return uuid.uuid4().hex


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def run_pipeline(
    scenario_doc: dict,
    inv: Inventory,
    planner_cfg: Optional[PlannerConfig] = None,
    judge_cfg: Optional[JudgeConfig] = None,
    store: Optional["RunStore"] = None,
    client=None,
) -> RunRecord:
    """Execute the five steps for one scenario and optionally persist the record."""
    intent = parse_intent(scenario_doc)
    planner_cfg = planner_cfg or PlannerConfig()
    judge_cfg = judge_cfg or JudgeConfig()

    try:
        composition, trace = plan(intent, inv, planner_cfg, client=client)
    except PlanningFailedError as exc:
        record = _failure_record(intent, exc.trace or PlanTrace(backend=planner_cfg.backend))
        if store is not None:
            store.persist(record)
        return record

    composition = canonicalize(composition)
    output = render(inv, composition)
    report: EvalReport = evaluate_output(intent, output)
    rubric, dimensions = judge_single(intent, output.html, report.subscores, judge_cfg)
    record = RunRecord(
        run_id=_new_run_id(),
        timestamp=_utc_now(),
        scenario_id=intent.scenario_id,
        composition=composition,
        html_digest=html_digest(output.html),
        subscores=report.subscores,
        autoscore=report.autoscore,
        rubric=rubric,
        dimensions=dimensions,
        adjudicate=flag_for_adjudication(report.subscores, rubric),
        trace=trace,
    )
    if store is not None:
        store.persist(record)
    return record


def _failure_record(intent: IntentSpec, trace: PlanTrace) -> RunRecord:
    zero = AutoSubscores(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    rubric = RubricScores(
        intent_alignment=1.0,
        semantic_correctness=1.0,
        accessibility_signals=1.0,
        visual_polish=1.0,
        overall_verdict="fail",
        rationale="planning failed; no composition to judge",
    )
    dimensions = DimensionScores(1.0, 1.0, 1.0, 1.0, 1.0)
    return RunRecord(
        run_id=_new_run_id(),
        timestamp=_utc_now(),
        scenario_id=intent.scenario_id,
        composition=None,
        html_digest=html_digest(""),
        subscores=zero,
        autoscore=autoscore(zero),
        rubric=rubric,
        dimensions=dimensions,
        adjudicate=flag_for_adjudication(zero, rubric),
        trace=trace,
    )


def run_corpus(
    scenario_docs: list[dict],
    inv: Inventory,
    planner_cfg: Optional[PlannerConfig] = None,
    judge_cfg: Optional[JudgeConfig] = None,
    store: Optional["RunStore"] = None,
) -> list[RunRecord]:
    """Run every scenario, merged deterministically in scenario_id order."""
    ordered = sorted(scenario_docs, key=lambda d: d.get("scenario_id", ""))
    return [
        run_pipeline(doc, inv, planner_cfg, judge_cfg, store=store) for doc in ordered
    ]


def aggregate(records: list[RunRecord]) -> AggregateReport:
    """Per-dimension arithmetic means and their overall mean."""
    if not records:
        raise EmptyInputError("aggregate requires at least one run record")
    correctness = fmean(r.dimensions.correctness for r in records)
    ui_fidelity = fmean(r.dimensions.ui_fidelity for r in records)
    compositionality = fmean(r.dimensions.compositionality for r in records)
    resilience = fmean(r.dimensions.resilience for r in records)
    clarity = fmean(r.dimensions.clarity for r in records)
    overall = fmean((correctness, ui_fidelity, compositionality, resilience, clarity))
    return AggregateReport(
        correctness=correctness,
        ui_fidelity=ui_fidelity,
        compositionality=compositionality,
        resilience=resilience,
        clarity=clarity,
        overall_mean=overall,
        scenario_count=len(records),
    )


# ---------------------------------------------------------------------------
# Persistence


class RunStore:
    """Append-only file-per-run store with an index file.

    Layout: <root>/<run_id>.json per record, <root>/index.json listing
    {run_id, timestamp, scenario_id} in persist order (which is timestamp
    order, since records are appended as they finish).
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    @property
    def _index_path(self) -> Path:
        return self.root / "index.json"

    def _read_index(self) -> list[dict]:
        if not self._index_path.exists():
            return []
        try:
            entries = json.loads(self._index_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"run index is corrupt: {exc}") from None
        if not isinstance(entries, list):
            raise ParseError("run index is corrupt: not a list")
        return entries

    def persist(self, record: RunRecord) -> str:
        with self._lock:
            path = self.root / f"{record.run_id}.json"
            if path.exists():
                raise ValueError(f"run '{record.run_id}' already stored; store is append-only")
            path.write_text(
                json.dumps(record.to_dict(), indent=2) + "\n", encoding="utf-8"
            )
            entries = self._read_index()
            entries.append(
                {
                    "run_id": record.run_id,
                    "timestamp": record.timestamp,
                    "scenario_id": record.scenario_id,
                }
            )
            self._index_path.write_text(
                json.dumps(entries, indent=2) + "\n", encoding="utf-8"
            )
        return record.run_id

    def load(self, run_id: str) -> RunRecord:
        path = self.root / f"{run_id}.json"
        if not path.exists():
            raise RunNotFoundError(f"no stored run with id '{run_id}'")
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"stored run '{run_id}' is corrupt: {exc}") from None
        return RunRecord.from_dict(doc)

    def list_runs(self) -> list[dict]:
        with self._lock:
            return self._read_index()

    def load_all(self) -> list[RunRecord]:
        return [self.load(entry["run_id"]) for entry in self.list_runs()]


# ---------------------------------------------------------------------------
# Scenario corpus access


def load_scenario_file(path: str | Path) -> dict:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ParseError(f"scenario file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"scenario file {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError(f"scenario file {path} must contain an object")
    return doc


def load_scenario_dir(path: str | Path) -> list[dict]:
    path = Path(path)
    if not path.is_dir():
        raise ParseError(f"scenario directory not found: {path}")
    docs = [load_scenario_file(p) for p in sorted(path.glob("*.json"))]
    if not docs:
        raise EmptyInputError(f"no scenario files in {path}")
    return docs


def bundled_scenarios() -> list[dict]:
    """The shipped corpus, sorted by scenario_id."""
    docs = []
    base = resources.files("portal_agent.data").joinpath("scenarios")
    for entry in base.iterdir():
        if entry.name.endswith(".json"):
            docs.append(json.loads(entry.read_text(encoding="utf-8")))
    return sorted(docs, key=lambda d: d.get("scenario_id", ""))


def bundled_scenario_dir() -> Optional[Path]:
    """Filesystem path of the shipped corpus when installed from source."""
    base = resources.files("portal_agent.data").joinpath("scenarios")
    try:
        path = Path(str(base))
    except TypeError:
        return None
    return path if path.is_dir() else None
