"""Rubric judging over intent + rendered page.

The mock backend is a pure function of the automatic subscores through
fixed affine maps, so judged runs stay reproducible; the remote backend
sends a rubric prompt to a chat endpoint and clamps whatever comes back.
Pairwise comparison always judges both argument orders and neutralizes
position bias by returning a tie on disagreement.

Mock score maps (scores in [1,5]):

    intent_alignment      = 1 + 4*s_cov
    semantic_correctness  = 1 + 4*(0.5*s_prop + 0.5*s_data)
    accessibility_signals = 1 + 4*s_a11y
    visual_polish         = 1 + 4*(0.5*s_layout + 0.5*s_perf)

    correctness           = 1 + 4*(0.5*s_cov + 0.5*s_prop)
    ui_fidelity           = 1 + 4*(0.5*s_layout + 0.5*s_prop)
    compositionality      = 1 + 4*s_layout
    resilience            = 1 + 4*autoscore
    clarity               = 1 + 4*(0.5*s_a11y + 0.5*s_cov)

    verdict: pass if autoscore >= 0.8, borderline if >= 0.6, else fail.

The dimension maps are artifact-defined; nothing in the source material
ties the four rubric axes to the five reported dimensions.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from importlib import resources
from typing import Optional

import httpx

from .errors import DomainError, JudgeParseError, JudgeUnavailableError, ParseError
from .evaluator import AutoSubscores, autoscore, evaluate_page
from .planner import IntentSpec, extract_first_document, extract_reply_text

JUDGE_ENDPOINT_ENV = "PORTAL_AGENT_JUDGE_ENDPOINT"
JUDGE_KEY_ENV = "PORTAL_AGENT_JUDGE_KEY"

RUBRIC_PROMPT_ID = "rubric_judge_v1"
REMOTE_CALL_TIMEOUT = 30.0

VERDICTS = ("pass", "borderline", "fail")

PASS_THRESHOLD = 0.8
BORDERLINE_THRESHOLD = 0.6
ADJUDICATION_GAP = 0.25


@dataclass(frozen=True)
class RubricScores:
    intent_alignment: float
    semantic_correctness: float
    accessibility_signals: float
    visual_polish: float
    overall_verdict: str
    rationale: str

    def __post_init__(self):
        for value in self.score_tuple():
            if not 1.0 <= value <= 5.0:
                raise ValueError(f"rubric score {value!r} outside [1, 5]")
        if self.overall_verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.overall_verdict!r}")

    def score_tuple(self) -> tuple[float, float, float, float]:
        return (self.intent_alignment, self.semantic_correctness,
                self.accessibility_signals, self.visual_polish)

    def mean(self) -> float:
        return sum(self.score_tuple()) / 4.0

    def to_dict(self) -> dict:
        return {
            "intent_alignment": round(self.intent_alignment, 6),
            "semantic_correctness": round(self.semantic_correctness, 6),
            "accessibility_signals": round(self.accessibility_signals, 6),
            "visual_polish": round(self.visual_polish, 6),
            "overall_verdict": self.overall_verdict,
            "rationale": self.rationale,
        }


@dataclass(frozen=True)
class DimensionScores:
    correctness: float
    ui_fidelity: float
    compositionality: float
    resilience: float
    clarity: float

    def __post_init__(self):
        for value in self.as_tuple():
            if not 1.0 <= value <= 5.0:
                raise ValueError(f"dimension score {value!r} outside [1, 5]")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.correctness, self.ui_fidelity, self.compositionality,
                self.resilience, self.clarity)

    def to_dict(self) -> dict[str, float]:
        return {
            "correctness": round(self.correctness, 6),
            "ui_fidelity": round(self.ui_fidelity, 6),
            "compositionality": round(self.compositionality, 6),
            "resilience": round(self.resilience, 6),
            "clarity": round(self.clarity, 6),
        }


@dataclass(frozen=True)
class JudgeConfig:
    backend: str = "mock"
    endpoint: Optional[str] = None
    model_id: Optional[str] = None
    credential_env: str = JUDGE_KEY_ENV
    pairwise: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.backend not in ("mock", "remote"):
            raise ValueError(f"unknown judge backend {self.backend!r}")


def _scale(x: float) -> float:
    return 1.0 + 4.0 * min(1.0, max(0.0, x))


def verdict_for(score: float) -> str:
    if score >= PASS_THRESHOLD:
        return "pass"
    if score >= BORDERLINE_THRESHOLD:
        return "borderline"
    return "fail"


def mock_rubric(sub: AutoSubscores) -> RubricScores:
    score = autoscore(sub)
    rationale = (
        "mock rubric from subscores: "
        f"cov={sub.s_cov:.2f} prop={sub.s_prop:.2f} data={sub.s_data:.2f} "
        f"layout={sub.s_layout:.2f} a11y={sub.s_a11y:.2f} perf={sub.s_perf:.2f} "
        f"autoscore={score:.2f}"
    )
    return RubricScores(
        intent_alignment=_scale(sub.s_cov),
        semantic_correctness=_scale(0.5 * sub.s_prop + 0.5 * sub.s_data),
        accessibility_signals=_scale(sub.s_a11y),
        visual_polish=_scale(0.5 * sub.s_layout + 0.5 * sub.s_perf),
        overall_verdict=verdict_for(score),
        rationale=rationale,
    )


def mock_dimensions(sub: AutoSubscores) -> DimensionScores:
    return DimensionScores(
        correctness=_scale(0.5 * sub.s_cov + 0.5 * sub.s_prop),
        ui_fidelity=_scale(0.5 * sub.s_layout + 0.5 * sub.s_prop),
        compositionality=_scale(sub.s_layout),
        resilience=_scale(autoscore(sub)),
        clarity=_scale(0.5 * sub.s_a11y + 0.5 * sub.s_cov),
    )


def judge_single(
    intent: IntentSpec,
    html: str,
    sub: AutoSubscores,
    cfg: Optional[JudgeConfig] = None,
    client: Optional[httpx.Client] = None,
) -> tuple[RubricScores, DimensionScores]:
    cfg = cfg or JudgeConfig()
    if not html:
        raise DomainError("judge_single requires non-empty html")
    if cfg.backend == "mock":
        return mock_rubric(sub), mock_dimensions(sub)
    return _judge_remote(intent, html, sub, cfg, client)


# ---------------------------------------------------------------------------
# Remote backend


def build_rubric_prompt(intent: IntentSpec, html: str) -> str:
    path = resources.files("portal_agent.data").joinpath("prompts").joinpath(f"{RUBRIC_PROMPT_ID}.txt")
    try:
        template = path.read_text(encoding="utf-8")
    except (FileNotFoundError, OSError):
        raise ParseError(f"missing prompt template '{RUBRIC_PROMPT_ID}'") from None
    return template.replace("{intent}", intent.raw_text or json.dumps(intent.to_dict())).replace(
        "{html}", html
    )


def _resolve_endpoint(cfg: JudgeConfig) -> str:
    endpoint = cfg.endpoint or os.environ.get(JUDGE_ENDPOINT_ENV)
    if not endpoint:
        raise JudgeUnavailableError(
            f"remote judge needs an endpoint (JudgeConfig.endpoint or {JUDGE_ENDPOINT_ENV})"
        )
    return endpoint


def _call_judge(cfg: JudgeConfig, client: Optional[httpx.Client], prompt: str) -> str:
    endpoint = _resolve_endpoint(cfg)
    headers = {}
    credential = os.environ.get(cfg.credential_env)
    if credential:
        headers["Authorization"] = f"Bearer {credential}"
    body = {
        "model": cfg.model_id or "default",
        "temperature": 0,
        "messages": [{"role": "user", "content": prompt}],
    }
    owns_client = client is None
    if owns_client:
        client = httpx.Client(timeout=REMOTE_CALL_TIMEOUT)
    try:
        try:
            response = client.post(endpoint, json=body, headers=headers)
        except httpx.HTTPError as exc:
            raise JudgeUnavailableError(f"judge endpoint call failed: {type(exc).__name__}") from None
        if response.status_code >= 400:
            raise JudgeUnavailableError(f"judge endpoint returned HTTP {response.status_code}")
        return extract_reply_text(response)
    finally:
        if owns_client:
            client.close()


def _judge_remote(
    intent: IntentSpec, html: str, sub: AutoSubscores, cfg: JudgeConfig,
    client: Optional[httpx.Client],
) -> tuple[RubricScores, DimensionScores]:
    reply = _call_judge(cfg, client, build_rubric_prompt(intent, html))
    doc = extract_first_document(reply)
    if doc is None:
        raise JudgeParseError("judge reply contained no score document")
    rubric = _parse_rubric(doc)
    dimensions = _parse_dimensions(doc)
    if dimensions is None:
        # Reply carried no dimension block; fall back to the documented maps.
        dimensions = mock_dimensions(sub)
    return rubric, dimensions


def _clamp_score(doc: dict, key: str) -> float:
    value = doc.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise JudgeParseError(f"judge reply lacks a numeric '{key}'")
    return min(5.0, max(1.0, float(value)))


def _parse_rubric(doc: dict) -> RubricScores:
    verdict = doc.get("overall_verdict", doc.get("verdict"))
    if verdict not in VERDICTS:
        raise JudgeParseError(f"judge reply verdict {verdict!r} not in {VERDICTS}")
    rationale = doc.get("rationale")
    return RubricScores(
        intent_alignment=_clamp_score(doc, "intent_alignment"),
        semantic_correctness=_clamp_score(doc, "semantic_correctness"),
        accessibility_signals=_clamp_score(doc, "accessibility_signals"),
        visual_polish=_clamp_score(doc, "visual_polish"),
        overall_verdict=verdict,
        rationale=rationale if isinstance(rationale, str) else "",
    )


def _parse_dimensions(doc: dict) -> Optional[DimensionScores]:
    block = doc.get("dimensions")
    if not isinstance(block, dict):
        return None
    return DimensionScores(
        correctness=_clamp_score(block, "correctness"),
        ui_fidelity=_clamp_score(block, "ui_fidelity"),
        compositionality=_clamp_score(block, "compositionality"),
        resilience=_clamp_score(block, "resilience"),
        clarity=_clamp_score(block, "clarity"),
    )


# ---------------------------------------------------------------------------
# Pairwise comparison


_PREFERENCE_WORD = re.compile(r"\b(first|second|tie)\b", re.IGNORECASE)


def judge_pairwise(
    intent: IntentSpec,
    html_a: str,
    html_b: str,
    cfg: Optional[JudgeConfig] = None,
    client: Optional[httpx.Client] = None,
) -> str:
    """Returns "A", "B", or "tie"; judges both orders and ties on disagreement."""
    cfg = cfg or JudgeConfig()
    if not html_a or not html_b:
        raise DomainError("judge_pairwise requires two non-empty pages")
    forward = _pairwise_once(intent, html_a, html_b, cfg, client)
    backward = _pairwise_once(intent, html_b, html_a, cfg, client)
    v1 = {"first": "A", "second": "B", "tie": "tie"}[forward]
    v2 = {"first": "B", "second": "A", "tie": "tie"}[backward]
    return v1 if v1 == v2 else "tie"


def _pairwise_once(
    intent: IntentSpec, first: str, second: str, cfg: JudgeConfig,
    client: Optional[httpx.Client],
) -> str:
    if cfg.backend == "mock":
        score_first = evaluate_page(intent, first).autoscore
        score_second = evaluate_page(intent, second).autoscore
        if score_first > score_second:
            return "first"
        if score_second > score_first:
            return "second"
        return "tie"
    prompt = (
        "Compare the two rendered portal pages below against the intent and "
        "answer with exactly one word: first, second, or tie.\n\n"
        f"Intent:\n{intent.raw_text}\n\nFirst page:\n{first}\n\nSecond page:\n{second}\n"
    )
    reply = _call_judge(cfg, client, prompt)
    doc = extract_first_document(reply)
    if doc is not None and isinstance(doc.get("preference"), str):
        candidate = doc["preference"].lower()
        if candidate in ("first", "second", "tie"):
            return candidate
    match = _PREFERENCE_WORD.search(reply)
    if match:
        return match.group(1).lower()
    raise JudgeParseError("judge reply contained no preference")


# ---------------------------------------------------------------------------
# Adjudication routing


def flag_for_adjudication(sub: AutoSubscores, rubric: RubricScores) -> bool:
    """True when automatic and rubric views disagree or the verdict is borderline."""
    if rubric.overall_verdict == "borderline":
        return True
    normalized = (rubric.mean() - 1.0) / 4.0
    return abs(autoscore(sub) - normalized) >= ADJUDICATION_GAP
