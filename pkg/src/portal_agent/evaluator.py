"""Automatic scoring of a rendered page against an intent.

Six subscores in [0,1] combine into the weighted AutoScore:

    0.35*cov + 0.20*prop + 0.10*data + 0.15*layout + 0.10*a11y + 0.10*perf

Expected is the IntentSpec, Actual is the rendered node tree. Matching is
greedy in document order: each requirement consumes up to its count of
not-yet-consumed components, by exact type name or by category tag.
Vacuous cases (no expectations of a kind) score 1.0 so scenarios of
different richness stay comparable. Everything here is pure; no optimal
assignment is attempted.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .composition import canonical_prop_string
from .errors import DomainError
from .planner import IntentSpec
from .renderer import (
    ROLE_SLOT,
    ROLE_TEMPLATE_ROOT,
    RenderOutput,
    RenderStats,
    UINode,
    parse_html,
    stats_from_tree,
)

W_COV = 0.35
W_PROP = 0.20
W_DATA = 0.10
W_LAYOUT = 0.15
W_A11Y = 0.10
W_PERF = 0.10

# Render-weight budget for the performance proxy.
PERF_BUDGET = 50

_REQUIREMENT_WEIGHT = {"core": 1.0, "peripheral": 0.5}

_HEADING_TAG = re.compile(r"^h([1-6])$")


@dataclass(frozen=True)
class AutoSubscores:
    s_cov: float
    s_prop: float
    s_data: float
    s_layout: float
    s_a11y: float
    s_perf: float

    def to_dict(self) -> dict[str, float]:
        return {
            "cov": round(self.s_cov, 6),
            "prop": round(self.s_prop, 6),
            "data": round(self.s_data, 6),
            "layout": round(self.s_layout, 6),
            "a11y": round(self.s_a11y, 6),
            "perf": round(self.s_perf, 6),
        }

    def as_tuple(self) -> tuple[float, float, float, float, float, float]:
        return (self.s_cov, self.s_prop, self.s_data, self.s_layout,
                self.s_a11y, self.s_perf)


@dataclass(frozen=True)
class SuggestedDiff:
    kind: str
    target: str
    detail: str

    def to_dict(self) -> dict[str, str]:
        return {"kind": self.kind, "target": self.target, "detail": self.detail}


DIFF_KINDS = ("add_component", "change_prop", "rebind_data", "move_slot", "add_a11y_attr")


@dataclass(frozen=True)
class EvalReport:
    subscores: AutoSubscores
    autoscore: float
    diffs: tuple[SuggestedDiff, ...]

    def to_dict(self) -> dict:
        return {
            "subscores": self.subscores.to_dict(),
            "autoscore": round(self.autoscore, 6),
            "diffs": [d.to_dict() for d in self.diffs],
        }


# ---------------------------------------------------------------------------
# Matching


def component_nodes(actual: UINode) -> list[UINode]:
    """Component roots in document order (nodes carrying a component type)."""
    return [n for n in actual.walk() if n.attr("data-component-type") is not None]


def _node_matches_kind(node: UINode, kind: str) -> bool:
    if node.attr("data-component-type") == kind:
        return True
    categories = (node.attr("data-component-categories") or "").split(",")
    return kind in categories


def match_requirements(expected: IntentSpec, actual: UINode) -> list[list[UINode]]:
    """Greedy document-order assignment of actual components to requirements.

    Requirement i consumes up to count_i unconsumed components that match
    its kind; result[i] is the list it consumed.
    """
    nodes = component_nodes(actual)
    consumed = [False] * len(nodes)
    matched: list[list[UINode]] = []
    for requirement in expected.required_components:
        taken: list[UINode] = []
        for j, node in enumerate(nodes):
            if len(taken) >= requirement.count:
                break
            if consumed[j] or not _node_matches_kind(node, requirement.kind):
                continue
            consumed[j] = True
            taken.append(node)
        matched.append(taken)
    return matched


# ---------------------------------------------------------------------------
# Subscores


def score_coverage(expected: IntentSpec, actual: UINode) -> float:
    requirements = expected.required_components
    if not requirements:
        return 1.0
    matched = match_requirements(expected, actual)
    num = 0.0
    den = 0.0
    for requirement, taken in zip(requirements, matched):
        weight = _REQUIREMENT_WEIGHT[requirement.importance]
        num += min(len(taken), requirement.count) * weight
        den += requirement.count * weight
    return num / den


def score_props(expected: IntentSpec, actual: UINode) -> float:
    matched = match_requirements(expected, actual)
    total = 0
    hits = 0
    for requirement, taken in zip(expected.required_components, matched):
        if not requirement.expected_props:
            continue
        for node in taken:
            for name, value in requirement.expected_props.items():
                total += 1
                if node.attr(f"data-prop-{name}") == canonical_prop_string(value):
                    hits += 1
    if total == 0:
        return 1.0
    return hits / total


def score_data(expected: IntentSpec, actual: UINode) -> float:
    dataset_fields = {d.name: set(d.fields) for d in expected.datasets}
    matched = match_requirements(expected, actual)
    total = 0
    resolved = 0
    for requirement, taken in zip(expected.required_components, matched):
        if requirement.expected_data is None:
            continue
        total += requirement.count
        for node in taken:
            source = node.attr("data-source")
            field = node.attr("data-field")
            if source in dataset_fields and field in dataset_fields[source]:
                resolved += 1
    if total == 0:
        return 1.0
    return resolved / total


def score_layout(expected: IntentSpec, actual: UINode) -> float:
    regions_ok = _regions_covered(expected, actual)
    hierarchy_ok = _hierarchy_holds(actual)
    placement_ok = _matched_placements_ok(expected, actual)
    return (regions_ok + hierarchy_ok + placement_ok) / 3.0


def _regions_covered(expected: IntentSpec, actual: UINode) -> int:
    if not expected.required_regions:
        return 1
    template_regions = {
        child.attr("data-slot-category")
        for child in actual.children
        if child.role == ROLE_SLOT
    }
    return 1 if set(expected.required_regions) <= template_regions else 0


def _hierarchy_holds(actual: UINode) -> int:
    """template-root -> slot -> component alternation over the whole tree."""
    if actual.role != ROLE_TEMPLATE_ROOT:
        return 0
    for node, parent in actual.walk_with_parent():
        if parent is None:
            continue
        if parent.role == ROLE_TEMPLATE_ROOT and node.role != ROLE_SLOT:
            return 0
        if parent.role == ROLE_SLOT and node.attr("data-component-type") is None:
            return 0
        if node.role == ROLE_SLOT:
            if parent.role != ROLE_TEMPLATE_ROOT and parent.attr("data-component-type") is None:
                return 0
    return 1


def _matched_placements_ok(expected: IntentSpec, actual: UINode) -> int:
    slot_of: dict[int, UINode] = {}

    def walk(node: UINode, current_slot: UINode | None):
        for child in node.children:
            if child.attr("data-component-type") is not None:
                if current_slot is not None:
                    slot_of[id(child)] = current_slot
                walk(child, current_slot)
            elif child.role == ROLE_SLOT:
                walk(child, child)
            else:
                walk(child, current_slot)

    walk(actual, None)
    for taken in match_requirements(expected, actual):
        for node in taken:
            slot = slot_of.get(id(node))
            if slot is None:
                return 0
            category = slot.attr("data-slot-category")
            allowed = (node.attr("data-component-categories") or "").split(",")
            if category not in allowed:
                return 0
    return 1


def score_a11y(actual: UINode) -> float:
    nodes = component_nodes(actual)
    if nodes:
        satisfied = sum(1 for n in nodes if not missing_a11y_attributes(n))
        attr_fraction = satisfied / len(nodes)
    else:
        attr_fraction = 1.0
    return (attr_fraction + _heading_order_ok(actual)) / 2.0


def missing_a11y_attributes(node: UINode) -> list[str]:
    required = node.attr("data-a11y-required") or ""
    missing = []
    for attr_name in required.split(","):
        if not attr_name:
            continue
        value = node.attr(attr_name)
        if value is None or not value.strip():
            missing.append(attr_name)
    return missing


def _heading_order_ok(actual: UINode) -> int:
    previous = None
    for node in actual.walk():
        m = _HEADING_TAG.match(node.tag)
        if not m:
            continue
        level = int(m.group(1))
        if previous is not None and level > previous + 1:
            return 0
        previous = level
    return 1


def score_perf(actual_stats: RenderStats) -> float:
    over = max(0, actual_stats.total_render_weight - PERF_BUDGET)
    return max(0.0, min(1.0, 1.0 - over / PERF_BUDGET))


def autoscore(sub: AutoSubscores) -> float:
    for value in sub.as_tuple():
        if not 0.0 <= value <= 1.0:
            raise DomainError(f"subscore {value!r} outside [0, 1]")
    return (
        W_COV * sub.s_cov
        + W_PROP * sub.s_prop
        + W_DATA * sub.s_data
        + W_LAYOUT * sub.s_layout
        + W_A11Y * sub.s_a11y
        + W_PERF * sub.s_perf
    )


# ---------------------------------------------------------------------------
# Suggested diffs


def _human_kind(kind: str) -> str:
    words = re.sub(r"(?<=[a-z0-9])(?=[A-Z])", " ", kind).lower()
    return words


def suggest_diffs(expected: IntentSpec, actual: UINode, sub: AutoSubscores) -> list[SuggestedDiff]:
    """Deterministic regeneration guidance, ordered by (kind, target)."""
    diffs: list[SuggestedDiff] = []
    matched = match_requirements(expected, actual)
    dataset_fields = {d.name: set(d.fields) for d in expected.datasets}

    for requirement, taken in zip(expected.required_components, matched):
        for _ in range(requirement.count - len(taken)):
            diffs.append(
                SuggestedDiff(
                    kind="add_component",
                    target=requirement.kind,
                    detail=f"add 1 {_human_kind(requirement.kind)}",
                )
            )
        for node in taken:
            for name, value in requirement.expected_props.items():
                want = canonical_prop_string(value)
                if node.attr(f"data-prop-{name}") != want:
                    diffs.append(
                        SuggestedDiff(
                            kind="change_prop",
                            target=f"{node.attr('data-component-id')}.props.{name}",
                            detail=f"set {name} to {want!r}",
                        )
                    )
        if requirement.expected_data is not None:
            binding = requirement.expected_data
            want = f"bind data from {binding.source}.{binding.field}"
            for node in taken:
                source = node.attr("data-source")
                field = node.attr("data-field")
                if not (source in dataset_fields and field in dataset_fields[source]):
                    diffs.append(
                        SuggestedDiff(
                            kind="rebind_data",
                            target=f"{node.attr('data-component-id')}.data",
                            detail=want,
                        )
                    )
            for _ in range(requirement.count - len(taken)):
                diffs.append(
                    SuggestedDiff(kind="rebind_data", target=requirement.kind, detail=want)
                )

    for node in component_nodes(actual):
        for attr_name in missing_a11y_attributes(node):
            diffs.append(
                SuggestedDiff(
                    kind="add_a11y_attr",
                    target=f"{node.attr('data-component-id')}.{attr_name}",
                    detail=f"add a non-empty {attr_name} attribute",
                )
            )

    diffs.sort(key=lambda d: (d.kind, d.target, d.detail))
    return diffs


# ---------------------------------------------------------------------------
# Umbrella entry points


def evaluate_tree(expected: IntentSpec, actual: UINode, stats: RenderStats) -> EvalReport:
    sub = AutoSubscores(
        s_cov=score_coverage(expected, actual),
        s_prop=score_props(expected, actual),
        s_data=score_data(expected, actual),
        s_layout=score_layout(expected, actual),
        s_a11y=score_a11y(actual),
        s_perf=score_perf(stats),
    )
    return EvalReport(
        subscores=sub,
        autoscore=autoscore(sub),
        diffs=tuple(suggest_diffs(expected, actual, sub)),
    )


def evaluate_output(expected: IntentSpec, output: RenderOutput) -> EvalReport:
    return evaluate_tree(expected, output.tree, output.stats)


def evaluate_page(expected: IntentSpec, html: str) -> EvalReport:
    """Score a serialized page (parses it first; ParseError on junk)."""
    tree = parse_html(html)
    return evaluate_tree(expected, tree, stats_from_tree(tree))
