"""Intent parsing and composition planning.

Two backends produce compositions from intents. The rule-based backend is
a pure function: keyword grammar over the description, template choice by
a region-affinity table, first-fit slot assignment, deterministic prop
synthesis. The remote backend prompts an LLM endpoint with the catalog
digest and wire contract, then runs validate-repair-retry until a valid
composition emerges or retries are exhausted. Either way the returned
composition always validates; an invalid plan is never handed onward.

Keyword grammar (token-level, case-insensitive, applied only when the
scenario has no explicit ``expected`` block):

    kpi(s) | metric(s)          -> KpiCard
    table(s)                    -> DataTable
    chart(s) | trend(s) | graph(s) -> Chart
    filter(s)                   -> FilterBar
    board(s) | kanban           -> Board
    text | article(s) | description(s) -> TextBlock

Counts come from the nearest numeral or number word up to three tokens
before the keyword ("three KPIs" -> 3); each occurrence adds one
requirement, except that adjacent tokens naming the same kind ("kanban
board") count once. Region tags mirror the matched kinds.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Optional

import httpx

from .composition import (
    Composition,
    ComponentSpec,
    DataBinding,
    RepairAction,
    canonical_prop_string,
    composition_from_dict,
    fill_defaults,
    repair,
    validate,
)
from .errors import (
    EndpointError,
    ParseError,
    PlanningFailedError,
    RepairFailedError,
)
from .inventory import Inventory, lookup_component

LLM_ENDPOINT_ENV = "PORTAL_AGENT_LLM_ENDPOINT"
LLM_KEY_ENV = "PORTAL_AGENT_LLM_KEY"

REMOTE_CALL_TIMEOUT = 30.0

IMPORTANCE_LEVELS = ("core", "peripheral")

# Grammar tables. Patterns match one lowercased token exactly.
_KEYWORD_PATTERNS: list[tuple[re.Pattern, str]] = [
    (re.compile(r"^(kpis?|metrics?)$"), "KpiCard"),
    (re.compile(r"^tables?$"), "DataTable"),
    (re.compile(r"^(charts?|trends?|graphs?)$"), "Chart"),
    (re.compile(r"^filters?$"), "FilterBar"),
    (re.compile(r"^(boards?|kanban)$"), "Board"),
    (re.compile(r"^(text|articles?|descriptions?)$"), "TextBlock"),
]

_NUMBER_WORDS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5, "six": 6,
    "seven": 7, "eight": 8, "nine": 9, "ten": 10, "eleven": 11, "twelve": 12,
}

# Region tag contributed by each grammar kind.
_REGION_OF = {
    "KpiCard": "kpis",
    "DataTable": "table",
    "Chart": "charts",
    "FilterBar": "filters",
    "Board": "board",
    "TextBlock": "text",
}

# Template affinity: score = sum over intent regions of the tag weight.
# Ties break to the lexicographically smallest template id.
TEMPLATE_AFFINITY: dict[str, dict[str, int]] = {
    "dashboard.analytics.v1": {
        "kpis": 3, "table": 2, "charts": 2, "filters": 1, "content": 1, "text": 1,
    },
    "board.kanban.v1": {"board": 4, "filters": 1, "text": 1},
    "portal.content.v1": {"hero": 3, "text": 2, "content": 2, "filters": 1},
}


@dataclass(frozen=True)
class Dataset:
    name: str
    fields: tuple[str, ...]
    rows: tuple[dict, ...] = ()

    def to_dict(self) -> dict:
        return {"name": self.name, "fields": list(self.fields),
                "rows": [dict(r) for r in self.rows]}


@dataclass(frozen=True)
class ComponentRequirement:
    kind: str
    count: int = 1
    expected_props: dict = field(default_factory=dict)
    expected_data: Optional[DataBinding] = None
    importance: str = "core"

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("requirement count must be >= 1")
        if self.importance not in IMPORTANCE_LEVELS:
            raise ValueError(f"unknown importance {self.importance!r}")

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind, "count": self.count,
                     "importance": self.importance}
        if self.expected_props:
            out["expected_props"] = dict(self.expected_props)
        if self.expected_data is not None:
            out["expected_data"] = self.expected_data.to_dict()
        return out


@dataclass(frozen=True)
class IntentSpec:
    scenario_id: str
    raw_text: str
    required_components: tuple[ComponentRequirement, ...] = ()
    required_regions: tuple[str, ...] = ()
    datasets: tuple[Dataset, ...] = ()
    constraints: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "raw_text": self.raw_text,
            "required_components": [r.to_dict() for r in self.required_components],
            "required_regions": list(self.required_regions),
            "datasets": [d.to_dict() for d in self.datasets],
            "constraints": dict(self.constraints),
        }


@dataclass(frozen=True)
class PlannerConfig:
    backend: str = "rule_based"
    max_retries: int = 2
    endpoint: Optional[str] = None
    model_id: Optional[str] = None
    temperature: float = 0.0
    prompt_template_id: str = "composition_planner_v1"

    def __post_init__(self):
        if self.backend not in ("rule_based", "remote"):
            raise ValueError(f"unknown planner backend {self.backend!r}")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


@dataclass
class PlanTrace:
    backend: str
    template_id: str = ""
    selection_reason: str = ""
    retries_used: int = 0
    raw_outputs: list[str] = field(default_factory=list)
    repair_actions: list[RepairAction] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "backend": self.backend,
            "template_id": self.template_id,
            "selection_reason": self.selection_reason,
            "retries_used": self.retries_used,
            "raw_outputs": list(self.raw_outputs),
            "repair_actions": [a.to_dict() for a in self.repair_actions],
            "notes": list(self.notes),
        }


# ---------------------------------------------------------------------------
# Intent parsing


def parse_intent(scenario_doc: dict) -> IntentSpec:
    """Build the Expected side from a scenario document.

    An explicit ``expected`` block wins verbatim; otherwise requirements
    come from the keyword grammar over ``description``. Pure.
    """
    if not isinstance(scenario_doc, dict):
        raise ParseError("scenario document must be an object")
    scenario_id = scenario_doc.get("scenario_id")
    if not isinstance(scenario_id, str) or not scenario_id:
        raise ParseError("scenario requires a non-empty string 'scenario_id'")
    description = scenario_doc.get("description", "")
    if not isinstance(description, str):
        raise ParseError("scenario 'description' must be a string")
    expected = scenario_doc.get("expected")
    if expected is None and not description.strip():
        raise ParseError(
            f"scenario '{scenario_id}' has neither a description nor an expected block"
        )

    datasets = tuple(
        _dataset_from_dict(d, i) for i, d in enumerate(scenario_doc.get("datasets", []))
    )

    if expected is not None:
        if not isinstance(expected, dict):
            raise ParseError("scenario 'expected' must be an object")
        requirements = tuple(
            _requirement_from_dict(r, i)
            for i, r in enumerate(expected.get("components", []))
        )
        regions_raw = expected.get("regions", [])
        if not isinstance(regions_raw, list) or not all(isinstance(r, str) for r in regions_raw):
            raise ParseError("expected.regions must be a list of strings")
        regions = tuple(regions_raw)
        constraints = expected.get("constraints", {})
        if not isinstance(constraints, dict):
            raise ParseError("expected.constraints must be an object")
    else:
        requirements, regions = _extract_from_text(description)
        constraints = {}

    return IntentSpec(
        scenario_id=scenario_id,
        raw_text=description,
        required_components=requirements,
        required_regions=regions,
        datasets=datasets,
        constraints=dict(constraints),
    )


def _dataset_from_dict(doc: Any, index: int) -> Dataset:
    if not isinstance(doc, dict) or not isinstance(doc.get("name"), str) or not doc["name"]:
        raise ParseError(f"datasets[{index}] requires a non-empty 'name'")
    fields = doc.get("fields", [])
    if not isinstance(fields, list) or not all(isinstance(f, str) for f in fields):
        raise ParseError(f"datasets[{index}].fields must be a list of strings")
    rows = doc.get("rows", [])
    if not isinstance(rows, list) or not all(isinstance(r, dict) for r in rows):
        raise ParseError(f"datasets[{index}].rows must be a list of objects")
    return Dataset(name=doc["name"], fields=tuple(fields), rows=tuple(rows))


def _requirement_from_dict(doc: Any, index: int) -> ComponentRequirement:
    if not isinstance(doc, dict) or not isinstance(doc.get("kind"), str) or not doc["kind"]:
        raise ParseError(f"expected.components[{index}] requires a non-empty 'kind'")
    count = doc.get("count", 1)
    if not isinstance(count, int) or isinstance(count, bool) or count < 1:
        raise ParseError(f"expected.components[{index}].count must be a positive integer")
    props = doc.get("expected_props", {})
    if not isinstance(props, dict):
        raise ParseError(f"expected.components[{index}].expected_props must be an object")
    data = None
    if doc.get("expected_data") is not None:
        raw = doc["expected_data"]
        if not isinstance(raw, dict):
            raise ParseError(f"expected.components[{index}].expected_data must be an object")
        try:
            data = DataBinding(source=raw.get("source", ""), field=raw.get("field", ""),
                               aggregate=raw.get("aggregate"))
        except ValueError as exc:
            raise ParseError(f"expected.components[{index}].expected_data: {exc}") from None
    importance = doc.get("importance", "core")
    try:
        return ComponentRequirement(
            kind=doc["kind"], count=count, expected_props=dict(props),
            expected_data=data, importance=importance,
        )
    except ValueError as exc:
        raise ParseError(f"expected.components[{index}]: {exc}") from None


def _extract_from_text(description: str) -> tuple[tuple[ComponentRequirement, ...], tuple[str, ...]]:
    tokens = re.findall(r"[a-z0-9]+", description.lower())
    requirements: list[ComponentRequirement] = []
    regions: list[str] = []
    last_match: tuple[str, int] | None = None
    for i, token in enumerate(tokens):
        for pattern, kind in _KEYWORD_PATTERNS:
            if not pattern.match(token):
                continue
            if last_match is not None and last_match == (kind, i - 1):
                # "kanban board" names one board, not two.
                last_match = (kind, i)
                break
            last_match = (kind, i)
            count = 1
            for back in range(1, 4):
                if i - back < 0:
                    break
                prev = tokens[i - back]
                if prev.isdigit():
                    count = max(1, int(prev))
                    break
                if prev in _NUMBER_WORDS:
                    count = _NUMBER_WORDS[prev]
                    break
            requirements.append(ComponentRequirement(kind=kind, count=count))
            tag = _REGION_OF[kind]
            if tag not in regions:
                regions.append(tag)
            break
    return tuple(requirements), tuple(sorted(regions))


# ---------------------------------------------------------------------------
# Template selection


def select_template(intent: IntentSpec, inv: Inventory) -> str:
    """Affinity-table argmax over the catalog's templates; lexicographic ties."""
    if not inv.templates:
        raise ValueError("inventory declares no templates")
    best_id, best_score = None, -1
    for template in inv.templates:
        weights = TEMPLATE_AFFINITY.get(template.template_id, {})
        score = sum(weights.get(region, 0) for region in intent.required_regions)
        if score > best_score or (score == best_score and template.template_id < best_id):
            best_id, best_score = template.template_id, score
    return best_id


# ---------------------------------------------------------------------------
# Rule-based backend


def plan(
    intent: IntentSpec,
    inv: Inventory,
    cfg: Optional[PlannerConfig] = None,
    client: Optional[httpx.Client] = None,
) -> tuple[Composition, PlanTrace]:
    """Produce a composition; the result always satisfies validate(inv, c).ok."""
    cfg = cfg or PlannerConfig()
    if cfg.backend == "rule_based":
        return _plan_rule_based(intent, inv, cfg)
    return _plan_remote(intent, inv, cfg, client)


def _plan_rule_based(intent: IntentSpec, inv: Inventory, cfg: PlannerConfig) -> tuple[Composition, PlanTrace]:
    template_id = select_template(intent, inv)
    template = inv.template(template_id)
    trace = PlanTrace(
        backend="rule_based",
        template_id=template_id,
        selection_reason=(
            "region-affinity table argmax over regions "
            f"{list(intent.required_regions)!r} (artifact-defined table, "
            "lexicographic tie-break)"
        ),
    )

    occupancy: dict[str, int] = {}
    type_counter: dict[str, int] = {}
    components: list[ComponentSpec] = []

    def place(type_name: str, requirement: Optional[ComponentRequirement]) -> bool:
        typedef = lookup_component(inv, type_name)
        slot = None
        for candidate in template.slots:
            if candidate.slot_category not in typedef.allowed_slot_categories:
                continue
            used = occupancy.get(candidate.slot_name, 0)
            if candidate.max_count is None or used < candidate.max_count:
                slot = candidate
                break
        if slot is None:
            return False
        occupancy[slot.slot_name] = occupancy.get(slot.slot_name, 0) + 1
        ordinal = type_counter.get(type_name, 0) + 1
        type_counter[type_name] = ordinal
        binding = requirement.expected_data if requirement is not None else None
        props = _synthesize_props(typedef, requirement, ordinal, intent.datasets)
        components.append(
            ComponentSpec(
                id=f"{_id_stem(type_name)}-{ordinal}",
                type=type_name,
                slot=slot.slot_name,
                props=props,
                data=binding,
            )
        )
        return True

    for requirement in intent.required_components:
        type_name = _resolve_kind(requirement.kind, inv)
        if type_name is None:
            trace.notes.append(
                f"requirement kind '{requirement.kind}' matches no catalog type or category; skipped"
            )
            continue
        for _ in range(requirement.count):
            if not place(type_name, requirement):
                trace.notes.append(
                    f"no open slot on {template_id} accepts '{type_name}'; unit skipped"
                )
                break

    # Templates may demand occupants (min_count > 0); synthesize them so the
    # plan validates even when the intent never asked for that region.
    for slot in template.slots:
        missing = slot.min_count - occupancy.get(slot.slot_name, 0)
        if missing <= 0:
            continue
        filler = _first_type_for_category(slot.slot_category, inv)
        if filler is None:
            trace.notes.append(
                f"slot '{slot.slot_name}' requires {missing} more component(s) but no "
                f"catalog type accepts category '{slot.slot_category}'"
            )
            continue
        for _ in range(missing):
            if place(filler, None):
                trace.notes.append(
                    f"synthesized '{filler}' to satisfy min_count of slot '{slot.slot_name}'"
                )

    composition = fill_defaults(inv, Composition(template=template_id, components=components))
    report = validate(inv, composition)
    if not report.ok:
        # Scenario-supplied expected_props can be off-type; one repair pass
        # may still save the plan, otherwise it fails loudly.
        try:
            composition, actions = repair(inv, composition, report)
            trace.repair_actions.extend(actions)
        except RepairFailedError as exc:
            trace.notes.append("rule-based plan failed validation and repair")
            raise PlanningFailedError(
                f"rule-based planner produced an irreparable composition: {exc}",
                trace=trace,
            ) from None
    return composition, trace


def _resolve_kind(kind: str, inv: Inventory) -> Optional[str]:
    if lookup_component(inv, kind) is not None:
        return kind
    for typedef in inv.components:
        if kind in typedef.allowed_slot_categories:
            return typedef.type_name
    return None


def _first_type_for_category(category: str, inv: Inventory) -> Optional[str]:
    for typedef in inv.components:
        if category in typedef.allowed_slot_categories:
            return typedef.type_name
    return None


def _id_stem(type_name: str) -> str:
    out = []
    for i, ch in enumerate(type_name):
        if ch.isupper() and i > 0 and not type_name[i - 1].isupper():
            out.append("-")
        out.append(ch.lower())
    return "".join(out)


def _display_name(type_name: str, ordinal: int) -> str:
    return f"{_id_stem(type_name).replace('-', ' ').title()} {ordinal}"


def _synthesize_props(
    typedef, requirement: Optional[ComponentRequirement], ordinal: int, datasets
) -> dict:
    props = dict(requirement.expected_props) if requirement is not None else {}
    for prop in typedef.prop_schema.values():
        if not prop.required or prop.has_default or prop.name in props:
            continue
        if prop.name == "value" and requirement is not None and requirement.expected_data is not None:
            props[prop.name] = _aggregate_value(datasets, requirement.expected_data)
        else:
            props[prop.name] = _display_name(typedef.type_name, ordinal)
    return props


def _aggregate_value(datasets, binding: DataBinding) -> str:
    dataset = next((d for d in datasets if d.name == binding.source), None)
    if dataset is None or binding.field not in dataset.fields:
        return "n/a"
    values = [
        row[binding.field]
        for row in dataset.rows
        if isinstance(row.get(binding.field), (int, float))
        and not isinstance(row.get(binding.field), bool)
    ]
    aggregate = binding.aggregate or "latest"
    if aggregate == "count":
        return canonical_prop_string(len(values))
    if not values:
        return "n/a"
    if aggregate == "sum":
        return canonical_prop_string(sum(values))
    if aggregate == "mean":
        return canonical_prop_string(sum(values) / len(values))
    return canonical_prop_string(values[-1])


# ---------------------------------------------------------------------------
# Remote backend


def build_planner_prompt(
    intent: IntentSpec, inv: Inventory, template_id: str, violations: Optional[list[str]] = None
) -> str:
    template = _load_prompt_asset(template_id)
    violations_block = ""
    if violations:
        violations_block = (
            "Your previous attempt violated the schema. Fix these violations:\n- "
            + "\n- ".join(violations)
            + "\n"
        )
    return (
        template
        .replace("{inventory_digest}", inventory_digest(inv))
        .replace("{intent}", intent.raw_text or json.dumps(intent.to_dict()))
        .replace("{violations_block}", violations_block)
    )


def _load_prompt_asset(template_id: str) -> str:
    path = resources.files("portal_agent.data").joinpath("prompts").joinpath(f"{template_id}.txt")
    try:
        return path.read_text(encoding="utf-8")
    except (FileNotFoundError, OSError):
        raise ParseError(f"unknown prompt template '{template_id}'") from None


def inventory_digest(inv: Inventory) -> str:
    """Compact text summary of the catalog for prompting."""
    lines = [f"schema_version: {inv.schema_version}", "component types:"]
    for t in inv.components:
        props = ", ".join(
            p.name
            + (":" + p.value_kind)
            + ("!" if p.required else "")
            + (f"={json.dumps(p.default)}" if p.has_default else "")
            + (f"[{'|'.join(p.enum_values)}]" if p.enum_values else "")
            for p in t.prop_schema.values()
        )
        lines.append(
            f"  - {t.type_name} ({t.category}) props: {props or 'none'}; "
            f"slot categories: {', '.join(sorted(t.allowed_slot_categories))}"
        )
        for s in t.child_slots:
            lines.append(
                f"      child slot {s.slot_name} [{s.slot_category}] "
                f"{s.min_count}..{'*' if s.max_count is None else s.max_count}"
            )
    lines.append("templates:")
    for template in inv.templates:
        lines.append(f"  - {template.template_id}")
        for s in template.slots:
            lines.append(
                f"      slot {s.slot_name} [{s.slot_category}] "
                f"{s.min_count}..{'*' if s.max_count is None else s.max_count}"
            )
    return "\n".join(lines)


def extract_first_document(text: str) -> Optional[dict]:
    """First balanced top-level JSON object embedded in free text, if any."""
    i = 0
    while True:
        start = text.find("{", i)
        if start < 0:
            return None
        span = _balanced_span(text, start)
        if span is not None:
            try:
                doc = json.loads(text[start:span])
            except json.JSONDecodeError:
                doc = None
            if isinstance(doc, dict):
                return doc
        i = start + 1


def _balanced_span(text: str, start: int) -> Optional[int]:
    depth = 0
    in_string = False
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return i + 1
    return None


def _plan_remote(
    intent: IntentSpec, inv: Inventory, cfg: PlannerConfig, client: Optional[httpx.Client]
) -> tuple[Composition, PlanTrace]:
    endpoint = cfg.endpoint or os.environ.get(LLM_ENDPOINT_ENV)
    if not endpoint:
        raise EndpointError(
            f"remote planner needs an endpoint (PlannerConfig.endpoint or {LLM_ENDPOINT_ENV})"
        )
    trace = PlanTrace(backend="remote")
    violations: Optional[list[str]] = None
    owns_client = client is None
    if owns_client:
        client = httpx.Client(timeout=REMOTE_CALL_TIMEOUT)
    try:
        for attempt in range(1 + cfg.max_retries):
            trace.retries_used = attempt
            prompt = build_planner_prompt(intent, inv, cfg.prompt_template_id, violations)
            reply = _call_chat_endpoint(client, endpoint, LLM_KEY_ENV, cfg.model_id,
                                        cfg.temperature, prompt)
            trace.raw_outputs.append(reply)
            doc = extract_first_document(reply)
            if doc is None:
                violations = ["response contained no composition document"]
                continue
            try:
                composition = composition_from_dict(doc)
            except ParseError as exc:
                violations = [str(exc)]
                continue
            report = validate(inv, composition)
            if report.ok:
                composition = fill_defaults(inv, composition)
                trace.template_id = composition.template
                trace.selection_reason = "remote model choice"
                return composition, trace
            try:
                repaired, actions = repair(inv, composition, report)
                trace.repair_actions.extend(actions)
                trace.template_id = repaired.template
                trace.selection_reason = "remote model choice (after repair)"
                return repaired, trace
            except RepairFailedError as exc:
                violations = [f"{v.code} at {v.path}: {v.message}" for v in exc.violations]
        raise PlanningFailedError(
            f"remote planner exhausted {1 + cfg.max_retries} attempt(s) without a valid composition",
            trace=trace,
        )
    finally:
        if owns_client:
            client.close()


def _call_chat_endpoint(
    client: httpx.Client, endpoint: str, key_env: str, model_id: Optional[str],
    temperature: float, prompt: str,
) -> str:
    headers = {}
    credential = os.environ.get(key_env)
    if credential:
        # The credential goes only into the request header, never into
        # logs, traces, or error messages.
        headers["Authorization"] = f"Bearer {credential}"
    body = {
        "model": model_id or "default",
        "temperature": temperature,
        "messages": [{"role": "user", "content": prompt}],
    }
    try:
        response = client.post(endpoint, json=body, headers=headers)
    except httpx.HTTPError as exc:
        raise EndpointError(f"endpoint call failed: {type(exc).__name__}") from None
    if response.status_code >= 400:
        raise EndpointError(f"endpoint returned HTTP {response.status_code}")
    return extract_reply_text(response)


def extract_reply_text(response: httpx.Response) -> str:
    """Pull assistant text out of a chat-style response, tolerating several shapes."""
    try:
        doc = response.json()
    except ValueError:
        return response.text
    if isinstance(doc, str):
        return doc
    if isinstance(doc, dict):
        if isinstance(doc.get("content"), str):
            return doc["content"]
        choices = doc.get("choices")
        if isinstance(choices, list) and choices:
            first = choices[0]
            if isinstance(first, dict):
                message = first.get("message")
                if isinstance(message, dict) and isinstance(message.get("content"), str):
                    return message["content"]
                if isinstance(first.get("text"), str):
                    return first["text"]
        if isinstance(doc.get("output"), str):
            return doc["output"]
    return response.text
