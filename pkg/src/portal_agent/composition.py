"""Typed compositions and their validation against the catalog.

A composition is the planner's entire output: a template id plus component
specs placed into declared slots. ``validate`` reports every violation with
a stable path, ``repair`` applies a fixed, deterministic rule list exactly
once, and ``canonicalize`` produces the order-normalized form the renderer
expects. All operations are pure functions over immutable values.

Wire format (UTF-8 JSON)::

    {"template": "<template_id>",
     "components": [{"id": "...", "type": "...", "slot": "...",
                     "props": {...},
                     "data": {"source": "...", "field": "...", "aggregate": "..."}?,
                     "children": [...]?}, ...]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any, Iterator, Optional

from .errors import ParseError, RepairFailedError, UnknownComponentTypeError
from .inventory import ComponentTypeDef, Inventory, lookup_component, prop_value_matches

# Violation codes (closed set).
UNKNOWN_TEMPLATE = "UnknownTemplate"
UNKNOWN_COMPONENT_TYPE = "UnknownComponentType"
UNKNOWN_SLOT = "UnknownSlot"
SLOT_CATEGORY_MISMATCH = "SlotCategoryMismatch"
CARDINALITY_VIOLATION = "CardinalityViolation"
MISSING_REQUIRED_PROP = "MissingRequiredProp"
UNKNOWN_PROP = "UnknownProp"
PROP_TYPE_MISMATCH = "PropTypeMismatch"
DUPLICATE_ID = "DuplicateId"
CHILDREN_ON_ATOMIC = "ChildrenOnAtomic"

VIOLATION_CODES = frozenset(
    {
        UNKNOWN_TEMPLATE,
        UNKNOWN_COMPONENT_TYPE,
        UNKNOWN_SLOT,
        SLOT_CATEGORY_MISMATCH,
        CARDINALITY_VIOLATION,
        MISSING_REQUIRED_PROP,
        UNKNOWN_PROP,
        PROP_TYPE_MISMATCH,
        DUPLICATE_ID,
        CHILDREN_ON_ATOMIC,
    }
)

AGGREGATES = ("sum", "mean", "count", "latest")

# Components may nest at most this deep (top-level spec = depth 1).
MAX_NESTING_DEPTH = 4


@dataclass(frozen=True)
class DataBinding:
    """Reference from a component to a dataset field, optionally aggregated."""

    source: str
    field: str
    aggregate: Optional[str] = None

    def __post_init__(self):
        if not self.source or not self.field:
            raise ValueError("data binding requires non-empty source and field")
        if self.aggregate is not None and self.aggregate not in AGGREGATES:
            raise ValueError(f"unknown aggregate {self.aggregate!r}")

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"source": self.source, "field": self.field}
        if self.aggregate is not None:
            out["aggregate"] = self.aggregate
        return out


@dataclass
class ComponentSpec:
    """One placed component: type, target slot, typed props, children."""

    id: str
    type: str
    slot: str
    props: dict[str, Any] = field(default_factory=dict)
    data: Optional[DataBinding] = None
    children: list["ComponentSpec"] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "id": self.id,
            "type": self.type,
            "slot": self.slot,
            "props": dict(self.props),
        }
        if self.data is not None:
            out["data"] = self.data.to_dict()
        if self.children:
            out["children"] = [c.to_dict() for c in self.children]
        return out


@dataclass
class Composition:
    """A template id plus the ordered component specs placed into it."""

    template: str
    components: list[ComponentSpec] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "template": self.template,
            "components": [c.to_dict() for c in self.components],
        }

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


@dataclass(frozen=True)
class Violation:
    code: str
    path: str
    message: str

    def to_dict(self) -> dict[str, str]:
        return {"code": self.code, "path": self.path, "message": self.message}


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...]

    @classmethod
    def from_violations(cls, violations: list[Violation]) -> "ValidationReport":
        return cls(ok=not violations, violations=tuple(violations))

    def codes(self) -> list[str]:
        return [v.code for v in self.violations]

    def to_dict(self) -> dict[str, Any]:
        return {"ok": self.ok, "violations": [v.to_dict() for v in self.violations]}


@dataclass(frozen=True)
class RepairAction:
    """One applied repair, tagged with the violation code that triggered it."""

    violation_code: str
    path: str
    action: str
    detail: str

    def to_dict(self) -> dict[str, str]:
        return {
            "violation_code": self.violation_code,
            "path": self.path,
            "action": self.action,
            "detail": self.detail,
        }


# ---------------------------------------------------------------------------
# Wire parsing


def composition_from_dict(doc: Any) -> Composition:
    """Parse the wire format; raises ParseError on any malformation."""
    if not isinstance(doc, dict):
        raise ParseError("composition document must be an object")
    template = doc.get("template")
    if not isinstance(template, str) or not template:
        raise ParseError("composition requires a non-empty string 'template'")
    raw = doc.get("components", [])
    if not isinstance(raw, list):
        raise ParseError("composition 'components' must be a list")
    components = [_spec_from_dict(entry, f"components[{i}]") for i, entry in enumerate(raw)]
    return Composition(template=template, components=components)


def composition_from_json(text: str | bytes) -> Composition:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"composition is not valid JSON: {exc}") from None
    return composition_from_dict(doc)


def _spec_from_dict(entry: Any, path: str) -> ComponentSpec:
    if not isinstance(entry, dict):
        raise ParseError(f"{path} must be an object")
    for key in ("id", "type", "slot"):
        value = entry.get(key)
        if not isinstance(value, str) or not value:
            raise ParseError(f"{path} requires a non-empty string '{key}'")
    props = entry.get("props", {})
    if not isinstance(props, dict):
        raise ParseError(f"{path}.props must be an object")
    data = None
    if entry.get("data") is not None:
        raw = entry["data"]
        if not isinstance(raw, dict):
            raise ParseError(f"{path}.data must be an object")
        try:
            data = DataBinding(
                source=raw.get("source", ""),
                field=raw.get("field", ""),
                aggregate=raw.get("aggregate"),
            )
        except ValueError as exc:
            raise ParseError(f"{path}.data: {exc}") from None
    children_raw = entry.get("children", [])
    if not isinstance(children_raw, list):
        raise ParseError(f"{path}.children must be a list")
    children = [
        _spec_from_dict(c, f"{path}.children[{i}]") for i, c in enumerate(children_raw)
    ]
    return ComponentSpec(
        id=entry["id"],
        type=entry["type"],
        slot=entry["slot"],
        props=dict(props),
        data=data,
        children=children,
    )


def iter_specs(
    c: Composition,
) -> Iterator[tuple[str, ComponentSpec, Optional[ComponentSpec], int]]:
    """Pre-order walk yielding (path, spec, parent, depth); depth 1 = top level."""

    def walk(specs, parent, prefix, depth):
        for i, spec in enumerate(specs):
            path = f"{prefix}[{i}]" if parent is None else f"{prefix}.children[{i}]"
            yield path, spec, parent, depth
            yield from walk(spec.children, spec, path, depth + 1)

    yield from walk(c.components, None, "components", 1)


# ---------------------------------------------------------------------------
# Validation


def validate(inv: Inventory, c: Composition) -> ValidationReport:
    """Check a composition against the catalog, reporting every violation.

    Violations are ordered by document position (template, then components
    in pre-order, then slot cardinalities) and by code within a position.
    Paths are stable, e.g. ``components[2].props.title``.
    """
    found: list[tuple[int, str, Violation]] = []
    pos = 0

    def add(code: str, path: str, message: str) -> None:
        found.append((pos, code, Violation(code=code, path=path, message=message)))

    template = inv.template(c.template)
    if template is None:
        add(UNKNOWN_TEMPLATE, "template", f"template '{c.template}' is not in the inventory")

    seen_ids: set[str] = set()
    for path, spec, parent, _depth in iter_specs(c):
        pos += 1
        if spec.id in seen_ids:
            add(DUPLICATE_ID, f"{path}.id", f"duplicate component id '{spec.id}'")
        seen_ids.add(spec.id)

        typedef = lookup_component(inv, spec.type)
        if typedef is None:
            add(
                UNKNOWN_COMPONENT_TYPE,
                f"{path}.type",
                f"component type '{spec.type}' is not in the inventory",
            )
        else:
            _check_props(spec, typedef, path, add)
            if spec.children and not typedef.is_container:
                add(
                    CHILDREN_ON_ATOMIC,
                    f"{path}.children",
                    f"atomic component '{spec.type}' cannot have children",
                )

        # Slot resolution: against the template for top-level specs, against
        # the parent's declared child slots for nested ones.
        if parent is None:
            if template is not None:
                slot = template.slot(spec.slot)
                if slot is None:
                    add(
                        UNKNOWN_SLOT,
                        f"{path}.slot",
                        f"template '{c.template}' declares no slot '{spec.slot}'",
                    )
                elif typedef is not None and slot.slot_category not in typedef.allowed_slot_categories:
                    add(
                        SLOT_CATEGORY_MISMATCH,
                        f"{path}.slot",
                        f"slot '{spec.slot}' (category '{slot.slot_category}') does not "
                        f"accept component type '{spec.type}'",
                    )
        else:
            parent_def = lookup_component(inv, parent.type)
            if parent_def is not None and parent_def.is_container:
                slot = parent_def.child_slot(spec.slot)
                if slot is None:
                    add(
                        UNKNOWN_SLOT,
                        f"{path}.slot",
                        f"container '{parent.type}' declares no child slot '{spec.slot}'",
                    )
                elif typedef is not None and slot.slot_category not in typedef.allowed_slot_categories:
                    add(
                        SLOT_CATEGORY_MISMATCH,
                        f"{path}.slot",
                        f"child slot '{spec.slot}' (category '{slot.slot_category}') does "
                        f"not accept component type '{spec.type}'",
                    )

    # Cardinality, counted per declared slot over placements targeting it.
    if template is not None:
        for slot in template.slots:
            pos += 1
            count = sum(1 for s in c.components if s.slot == slot.slot_name)
            _check_cardinality(count, slot, f"slots.{slot.slot_name}", add)
    for path, spec, _parent, _depth in iter_specs(c):
        typedef = lookup_component(inv, spec.type)
        if typedef is None or not typedef.is_container:
            continue
        for slot in typedef.child_slots:
            pos += 1
            count = sum(1 for s in spec.children if s.slot == slot.slot_name)
            _check_cardinality(count, slot, f"{path}.slots.{slot.slot_name}", add)

    found.sort(key=lambda item: (item[0], item[1], item[2].path))
    return ValidationReport.from_violations([v for _, _, v in found])


def _check_props(spec: ComponentSpec, typedef: ComponentTypeDef, path: str, add) -> None:
    for name in spec.props:
        prop = typedef.prop_schema.get(name)
        if prop is None:
            add(
                UNKNOWN_PROP,
                f"{path}.props.{name}",
                f"component type '{spec.type}' declares no prop '{name}'",
            )
        elif not prop_value_matches(prop, spec.props[name]):
            add(
                PROP_TYPE_MISMATCH,
                f"{path}.props.{name}",
                f"value {spec.props[name]!r} does not satisfy kind '{prop.value_kind}'",
            )
    for prop in typedef.prop_schema.values():
        # A required prop backed by a default is satisfied after default
        # filling, so only default-less required props are violations.
        if prop.required and prop.name not in spec.props and not prop.has_default:
            add(
                MISSING_REQUIRED_PROP,
                f"{path}.props.{prop.name}",
                f"required prop '{prop.name}' of '{spec.type}' is missing and has no default",
            )


def _check_cardinality(count: int, slot, path: str, add) -> None:
    if slot.max_count is not None and count > slot.max_count:
        add(
            CARDINALITY_VIOLATION,
            path,
            f"slot '{slot.slot_name}' holds {count} components, max_count is {slot.max_count}",
        )
    if count < slot.min_count:
        add(
            CARDINALITY_VIOLATION,
            path,
            f"slot '{slot.slot_name}' holds {count} components, min_count is {slot.min_count}",
        )


# ---------------------------------------------------------------------------
# Defaults


def fill_defaults(inv: Inventory, c: Composition) -> Composition:
    """Copy of ``c`` with every absent defaulted prop set; idempotent."""

    def fill(spec: ComponentSpec) -> ComponentSpec:
        typedef = lookup_component(inv, spec.type)
        if typedef is None:
            raise UnknownComponentTypeError(
                f"component type '{spec.type}' is not in the inventory"
            )
        props = dict(spec.props)
        for prop in typedef.prop_schema.values():
            if prop.has_default and prop.name not in props:
                props[prop.name] = prop.default
        return replace(spec, props=props, children=[fill(ch) for ch in spec.children])

    return Composition(template=c.template, components=[fill(s) for s in c.components])


# ---------------------------------------------------------------------------
# Repair


def repair(
    inv: Inventory, c: Composition, report: ValidationReport
) -> tuple[Composition, list[RepairAction]]:
    """One deterministic repair pass over an invalid composition.

    Rules apply in fixed order: drop unknown props; coerce string-encoded
    numbers/booleans (exact lexical forms only); reassign components whose
    slot is unknown or category-mismatched to the first declared slot
    accepting their category; drop unknown-type components; truncate slot
    overflow keeping earliest placements; drop children of atomic
    components. Defaults are then filled and the result re-validated.
    Raises :class:`RepairFailedError` if violations remain; never invents
    component types absent from the original composition.
    """
    log: list[RepairAction] = []
    working = composition_from_dict(c.to_dict())  # deep copy
    template = inv.template(working.template)

    # Rule 1 + 2: prop-level fixes.
    for path, spec, _parent, _depth in iter_specs(working):
        typedef = lookup_component(inv, spec.type)
        if typedef is None:
            continue
        for name in list(spec.props):
            prop = typedef.prop_schema.get(name)
            if prop is None:
                del spec.props[name]
                log.append(
                    RepairAction(UNKNOWN_PROP, f"{path}.props.{name}", "drop_prop",
                                 f"dropped unknown prop '{name}'")
                )
                continue
            value = spec.props[name]
            if isinstance(value, str) and prop.value_kind in ("number", "boolean"):
                coerced = _coerce_lexical(value, prop.value_kind)
                if coerced is not None:
                    spec.props[name] = coerced
                    log.append(
                        RepairAction(PROP_TYPE_MISMATCH, f"{path}.props.{name}",
                                     "coerce_prop", f"coerced {value!r} to {coerced!r}")
                    )

    # Rule 3: slot reassignment.
    for path, spec, parent, _depth in iter_specs(working):
        typedef = lookup_component(inv, spec.type)
        if typedef is None:
            continue
        if parent is None:
            declared = template.slots if template is not None else ()
        else:
            parent_def = lookup_component(inv, parent.type)
            declared = parent_def.child_slots if parent_def is not None else ()
        current = next((s for s in declared if s.slot_name == spec.slot), None)
        if current is not None and current.slot_category in typedef.allowed_slot_categories:
            continue
        code = UNKNOWN_SLOT if current is None else SLOT_CATEGORY_MISMATCH
        target = next(
            (s for s in declared if s.slot_category in typedef.allowed_slot_categories),
            None,
        )
        if target is not None and target.slot_name != spec.slot:
            log.append(
                RepairAction(code, f"{path}.slot", "reassign_slot",
                             f"moved '{spec.id}' from slot '{spec.slot}' to '{target.slot_name}'")
            )
            spec.slot = target.slot_name

    # Rule 4: drop unknown-type components.
    def drop_unknown(specs: list[ComponentSpec], prefix: str) -> list[ComponentSpec]:
        kept = []
        for i, spec in enumerate(specs):
            if lookup_component(inv, spec.type) is None:
                log.append(
                    RepairAction(UNKNOWN_COMPONENT_TYPE, f"{prefix}[{i}].type",
                                 "drop_component", f"dropped '{spec.id}' of unknown type '{spec.type}'")
                )
                continue
            spec.children = drop_unknown(spec.children, f"{prefix}[{i}].children")
            kept.append(spec)
        return kept

    working.components = drop_unknown(working.components, "components")

    # Rule 5: truncate overflow, earliest placements win.
    def truncate(specs: list[ComponentSpec], declared, prefix: str) -> list[ComponentSpec]:
        counts: dict[str, int] = {}
        limits = {s.slot_name: s.max_count for s in declared}
        kept = []
        for spec in specs:
            limit = limits.get(spec.slot)
            taken = counts.get(spec.slot, 0)
            if limit is not None and taken >= limit:
                log.append(
                    RepairAction(CARDINALITY_VIOLATION, f"{prefix}.{spec.slot}",
                                 "drop_overflow", f"dropped '{spec.id}' overflowing slot '{spec.slot}'")
                )
                continue
            counts[spec.slot] = taken + 1
            kept.append(spec)
        return kept

    if template is not None:
        working.components = truncate(working.components, template.slots, "slots")
    for path, spec, _parent, _depth in iter_specs(working):
        typedef = lookup_component(inv, spec.type)
        if typedef is not None and typedef.is_container and spec.children:
            spec.children = truncate(spec.children, typedef.child_slots, f"{path}.slots")

    # Rule 6: atomic components carry no children.
    for path, spec, _parent, _depth in iter_specs(working):
        typedef = lookup_component(inv, spec.type)
        if typedef is not None and not typedef.is_container and spec.children:
            log.append(
                RepairAction(CHILDREN_ON_ATOMIC, f"{path}.children", "drop_children",
                             f"dropped {len(spec.children)} children of atomic '{spec.id}'")
            )
            spec.children = []

    repaired = fill_defaults(inv, working)
    outcome = validate(inv, repaired)
    if not outcome.ok:
        raise RepairFailedError(
            "repair pass left violations: " + ", ".join(sorted(set(outcome.codes()))),
            log=log,
            violations=list(outcome.violations),
        )
    return repaired, log


def _coerce_lexical(value: str, kind: str) -> Any:
    """Exact lexical coercions only: '42' -> 42, '4.2' -> 4.2, 'true' -> True."""
    if kind == "boolean":
        if value == "true":
            return True
        if value == "false":
            return False
        return None
    if kind == "number":
        stripped = value[1:] if value.startswith("-") else value
        if stripped.isdigit():
            return int(value)
        head, sep, tail = stripped.partition(".")
        if sep and head.isdigit() and tail.isdigit():
            return float(value)
    return None


# ---------------------------------------------------------------------------
# Canonical form


def canonicalize(c: Composition) -> Composition:
    """Order-normalize: components stably sorted by (slot, original index),
    prop maps sorted by key, recursively. Pure and idempotent."""

    def canon(spec: ComponentSpec) -> ComponentSpec:
        children = [canon(ch) for ch in spec.children]
        order = sorted(range(len(children)), key=lambda i: (children[i].slot, i))
        return replace(
            spec,
            props={k: spec.props[k] for k in sorted(spec.props)},
            children=[children[i] for i in order],
        )

    components = [canon(s) for s in c.components]
    order = sorted(range(len(components)), key=lambda i: (components[i].slot, i))
    return Composition(template=c.template, components=[components[i] for i in order])


def canonical_prop_string(value: Any) -> str:
    """Single canonical text form for prop values (used by renderer and
    evaluator alike so fidelity checks are exact string comparisons)."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return str(int(value)) if value.is_integer() else repr(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, list):
        return ", ".join(canonical_prop_string(v) for v in value)
    if value is None:
        return ""
    return str(value)
