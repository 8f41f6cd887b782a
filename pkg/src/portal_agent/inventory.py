"""The vetted component catalog that bounds all generation.

An :class:`Inventory` holds every component type and layout template the
engine is allowed to instantiate. Compositions are validated against it,
the renderer instantiates nothing outside it, and the planner's prompt is
built from it. Inventories are immutable after load and safe to share
across threads.

Document format (UTF-8 JSON)::

    {
      "schema_version": "...",
      "components": [{"type_name": ..., "category": "atomic"|"container",
                      "prop_schema": [...], "allowed_slot_categories": [...],
                      "child_slots": [...], "a11y_requirements": [...],
                      "render_weight": ...}, ...],
      "templates":  [{"template_id": ..., "slots": [...], "skeleton": [...]}]
    }

Slot ``max_count`` may be ``null`` for unbounded. The bundled default
catalog lives at :data:`DEFAULT_INVENTORY_PATH`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Optional

from .errors import InventoryInvariantError, ParseError

PROP_VALUE_KINDS = ("string", "number", "boolean", "enum", "string_list", "data_ref")
COMPONENT_CATEGORIES = ("atomic", "container")

# A11y requirements normally name a prop that supplies the accessible text;
# these names are satisfied by the renderer itself, with no prop needed.
BUILTIN_A11Y_ATTRIBUTES = frozenset({"role"})


@dataclass(frozen=True)
class PropTypeDef:
    """Schema for a single component prop."""

    name: str
    value_kind: str
    required: bool = False
    enum_values: tuple[str, ...] = ()
    default: Any = None
    has_default: bool = False


@dataclass(frozen=True)
class SlotDef:
    """A named placement region with a category tag and cardinality bounds."""

    slot_name: str
    slot_category: str
    min_count: int = 0
    max_count: Optional[int] = None  # None = unbounded
    ordered: bool = True


@dataclass(frozen=True)
class SkeletonEntry:
    """Grid position of one slot in a template layout."""

    slot_name: str
    row: int
    col: int


@dataclass(frozen=True)
class TemplateDef:
    """A versioned page template: declared slots plus their grid skeleton."""

    template_id: str
    slots: tuple[SlotDef, ...]
    skeleton: tuple[SkeletonEntry, ...]

    def slot(self, slot_name: str) -> Optional[SlotDef]:
        for s in self.slots:
            if s.slot_name == slot_name:
                return s
        return None


@dataclass(frozen=True)
class ComponentTypeDef:
    """Definition of one vetted component type."""

    type_name: str
    category: str
    prop_schema: dict[str, PropTypeDef] = field(default_factory=dict)
    allowed_slot_categories: frozenset[str] = frozenset()
    child_slots: tuple[SlotDef, ...] = ()
    a11y_requirements: tuple[str, ...] = ()
    render_weight: int = 1

    @property
    def is_container(self) -> bool:
        return self.category == "container"

    def child_slot(self, slot_name: str) -> Optional[SlotDef]:
        for s in self.child_slots:
            if s.slot_name == slot_name:
                return s
        return None


@dataclass(frozen=True)
class Inventory:
    """The full catalog: component types plus templates."""

    schema_version: str
    components: tuple[ComponentTypeDef, ...]
    templates: tuple[TemplateDef, ...]

    def template(self, template_id: str) -> Optional[TemplateDef]:
        for t in self.templates:
            if t.template_id == template_id:
                return t
        return None

    @property
    def type_names(self) -> tuple[str, ...]:
        return tuple(c.type_name for c in self.components)

    @property
    def slot_categories(self) -> frozenset[str]:
        """Every category tag accepted by at least one component type."""
        tags: set[str] = set()
        for c in self.components:
            tags.update(c.allowed_slot_categories)
        return frozenset(tags)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": self.schema_version,
            "components": [_component_to_dict(c) for c in self.components],
            "templates": [_template_to_dict(t) for t in self.templates],
        }


def lookup_component(inv: Inventory, type_name: str) -> Optional[ComponentTypeDef]:
    """Exact, case-sensitive lookup; absence is returned, never raised."""
    for c in inv.components:
        if c.type_name == type_name:
            return c
    return None


# ---------------------------------------------------------------------------
# Loading


def load_inventory(source: bytes | str) -> Inventory:
    """Parse and invariant-check an inventory document.

    Pure and order-preserving: component types, templates, slots and
    skeleton entries keep document order. Raises :class:`ParseError` for
    malformed documents and :class:`InventoryInvariantError` when a
    well-formed document violates a catalog invariant.
    """
    if isinstance(source, bytes):
        try:
            text = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"inventory document is not valid UTF-8: {exc}") from None
    else:
        text = source
    if not text.strip():
        raise ParseError("inventory document is empty")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"inventory document is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("inventory document must be a JSON object")

    schema_version = doc.get("schema_version")
    if not isinstance(schema_version, str) or not schema_version:
        raise ParseError("inventory requires a non-empty string 'schema_version'")

    components = tuple(
        _parse_component(entry, i) for i, entry in enumerate(_require_list(doc, "components"))
    )
    templates = tuple(
        _parse_template(entry, i) for i, entry in enumerate(_require_list(doc, "templates"))
    )
    inv = Inventory(schema_version=schema_version, components=components, templates=templates)
    _check_inventory_invariants(inv)
    return inv


def default_inventory_bytes() -> bytes:
    """Raw bytes of the bundled default catalog."""
    return resources.files("portal_agent.data").joinpath("inventory.json").read_bytes()


def load_default_inventory() -> Inventory:
    return load_inventory(default_inventory_bytes())


# ---------------------------------------------------------------------------
# Parsing helpers


def _require_list(doc: dict, key: str) -> list:
    value = doc.get(key)
    if not isinstance(value, list):
        raise ParseError(f"inventory requires a list under '{key}'")
    return value


def _parse_prop(entry: Any, owner: str) -> PropTypeDef:
    if not isinstance(entry, dict):
        raise ParseError(f"prop entry of '{owner}' must be an object")
    name = entry.get("name")
    if not isinstance(name, str) or not name:
        raise ParseError(f"prop of '{owner}' requires a non-empty 'name'")
    kind = entry.get("value_kind")
    if kind not in PROP_VALUE_KINDS:
        raise ParseError(f"prop '{owner}.{name}' has unknown value_kind {kind!r}")
    enum_values = tuple(entry.get("enum_values") or ())
    if kind == "enum" and not enum_values:
        raise InventoryInvariantError(
            f"enum prop without enum_values: '{owner}.{name}'"
        )
    if kind != "enum" and enum_values:
        raise InventoryInvariantError(
            f"enum_values on non-enum prop: '{owner}.{name}'"
        )
    has_default = "default" in entry
    default = entry.get("default")
    prop = PropTypeDef(
        name=name,
        value_kind=kind,
        required=bool(entry.get("required", False)),
        enum_values=enum_values,
        default=default,
        has_default=has_default,
    )
    if has_default and not prop_value_matches(prop, default):
        raise InventoryInvariantError(
            f"default does not satisfy value_kind: '{owner}.{name}'"
        )
    return prop


def prop_value_matches(prop: PropTypeDef, value: Any) -> bool:
    """Whether a raw value satisfies a prop's declared kind."""
    kind = prop.value_kind
    if kind == "string" or kind == "data_ref":
        return isinstance(value, str)
    if kind == "number":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind == "boolean":
        return isinstance(value, bool)
    if kind == "enum":
        return isinstance(value, str) and value in prop.enum_values
    if kind == "string_list":
        return isinstance(value, list) and all(isinstance(v, str) for v in value)
    return False


def _parse_slot(entry: Any, owner: str) -> SlotDef:
    if not isinstance(entry, dict):
        raise ParseError(f"slot entry of '{owner}' must be an object")
    name = entry.get("slot_name")
    if not isinstance(name, str) or not name:
        raise ParseError(f"slot of '{owner}' requires a non-empty 'slot_name'")
    if any(ch.isspace() for ch in name):
        raise InventoryInvariantError(f"slot_name contains whitespace: '{owner}.{name}'")
    if any(not seg for seg in name.split(".")):
        raise InventoryInvariantError(f"slot_name has empty path segment: '{owner}.{name}'")
    category = entry.get("slot_category")
    if not isinstance(category, str) or not category:
        raise ParseError(f"slot '{owner}.{name}' requires a 'slot_category'")
    min_count = entry.get("min_count", 0)
    max_count = entry.get("max_count", None)
    if not isinstance(min_count, int) or min_count < 0:
        raise ParseError(f"slot '{owner}.{name}' min_count must be a nonnegative integer")
    if max_count is not None and (not isinstance(max_count, int) or max_count < 1):
        raise ParseError(f"slot '{owner}.{name}' max_count must be a positive integer or null")
    if max_count is not None and min_count > max_count:
        raise InventoryInvariantError(
            f"min_count exceeds max_count on slot '{owner}.{name}'"
        )
    return SlotDef(
        slot_name=name,
        slot_category=category,
        min_count=min_count,
        max_count=max_count,
        ordered=bool(entry.get("ordered", True)),
    )


def _parse_component(entry: Any, index: int) -> ComponentTypeDef:
    if not isinstance(entry, dict):
        raise ParseError(f"components[{index}] must be an object")
    type_name = entry.get("type_name")
    if not isinstance(type_name, str) or not type_name:
        raise ParseError(f"components[{index}] requires a non-empty 'type_name'")
    category = entry.get("category")
    if category not in COMPONENT_CATEGORIES:
        raise ParseError(f"component '{type_name}' has unknown category {category!r}")

    props: dict[str, PropTypeDef] = {}
    for prop_entry in entry.get("prop_schema", []):
        prop = _parse_prop(prop_entry, type_name)
        if prop.name in props:
            raise InventoryInvariantError(
                f"duplicate prop name '{prop.name}' on component '{type_name}'"
            )
        props[prop.name] = prop

    child_slots = tuple(_parse_slot(s, type_name) for s in entry.get("child_slots", []))
    if category == "atomic" and child_slots:
        raise InventoryInvariantError(
            f"atomic component declares child_slots: '{type_name}'"
        )
    seen_child = set()
    for slot in child_slots:
        if slot.slot_name in seen_child:
            raise InventoryInvariantError(
                f"duplicate child slot '{slot.slot_name}' on component '{type_name}'"
            )
        seen_child.add(slot.slot_name)

    a11y = tuple(entry.get("a11y_requirements", []))
    for req in a11y:
        if req not in props and req not in BUILTIN_A11Y_ATTRIBUTES:
            raise InventoryInvariantError(
                f"a11y requirement '{req}' names no prop of component '{type_name}'"
            )

    default_weight = 2 if category == "container" else 1
    weight = entry.get("render_weight", default_weight)
    if not isinstance(weight, int) or weight < 0:
        raise ParseError(f"component '{type_name}' render_weight must be a nonnegative integer")

    return ComponentTypeDef(
        type_name=type_name,
        category=category,
        prop_schema=props,
        allowed_slot_categories=frozenset(entry.get("allowed_slot_categories", [])),
        child_slots=child_slots,
        a11y_requirements=a11y,
        render_weight=weight,
    )


def _parse_template(entry: Any, index: int) -> TemplateDef:
    if not isinstance(entry, dict):
        raise ParseError(f"templates[{index}] must be an object")
    template_id = entry.get("template_id")
    if not isinstance(template_id, str) or not template_id:
        raise ParseError(f"templates[{index}] requires a non-empty 'template_id'")
    slots = tuple(_parse_slot(s, template_id) for s in entry.get("slots", []))
    seen = set()
    for slot in slots:
        if slot.slot_name in seen:
            raise InventoryInvariantError(
                f"duplicate slot name '{slot.slot_name}' in template '{template_id}'"
            )
        seen.add(slot.slot_name)

    skeleton_entries = []
    for s in entry.get("skeleton", []):
        if not isinstance(s, dict) or not isinstance(s.get("slot_name"), str):
            raise ParseError(f"skeleton entry of '{template_id}' must name a slot")
        row, col = s.get("row"), s.get("col")
        if not isinstance(row, int) or not isinstance(col, int) or row < 0 or col < 0:
            raise ParseError(
                f"skeleton entry '{template_id}.{s.get('slot_name')}' requires nonnegative row/col"
            )
        skeleton_entries.append(SkeletonEntry(slot_name=s["slot_name"], row=row, col=col))
    skeleton = tuple(skeleton_entries)

    slot_names = {s.slot_name for s in slots}
    skeleton_names = [e.slot_name for e in skeleton]
    for name in skeleton_names:
        if name not in slot_names:
            raise InventoryInvariantError(
                f"skeleton references undeclared slot '{name}' in template '{template_id}'"
            )
    for name in slot_names:
        if skeleton_names.count(name) != 1:
            raise InventoryInvariantError(
                f"slot '{name}' must appear exactly once in skeleton of template '{template_id}'"
            )
    return TemplateDef(template_id=template_id, slots=slots, skeleton=skeleton)


def _check_inventory_invariants(inv: Inventory) -> None:
    seen_types: set[str] = set()
    for c in inv.components:
        if c.type_name in seen_types:
            raise InventoryInvariantError(f"duplicate type_name: '{c.type_name}'")
        seen_types.add(c.type_name)

    seen_templates: set[str] = set()
    for t in inv.templates:
        if t.template_id in seen_templates:
            raise InventoryInvariantError(f"duplicate template_id: '{t.template_id}'")
        seen_templates.add(t.template_id)

    accepted = inv.slot_categories
    # No dead slots: every declared slot must accept at least one component
    # type. Checked for template slots and container child slots alike.
    for t in inv.templates:
        for slot in t.slots:
            if slot.slot_category not in accepted:
                raise InventoryInvariantError(
                    f"dead slot: no component accepts category '{slot.slot_category}' "
                    f"of slot '{t.template_id}.{slot.slot_name}'"
                )
    for c in inv.components:
        for slot in c.child_slots:
            if slot.slot_category not in accepted:
                raise InventoryInvariantError(
                    f"dead slot: no component accepts category '{slot.slot_category}' "
                    f"of child slot '{c.type_name}.{slot.slot_name}'"
                )


# ---------------------------------------------------------------------------
# Serialization back to the document form


def _prop_to_dict(p: PropTypeDef) -> dict[str, Any]:
    out: dict[str, Any] = {"name": p.name, "value_kind": p.value_kind, "required": p.required}
    if p.enum_values:
        out["enum_values"] = list(p.enum_values)
    if p.has_default:
        out["default"] = p.default
    return out


def _slot_to_dict(s: SlotDef) -> dict[str, Any]:
    return {
        "slot_name": s.slot_name,
        "slot_category": s.slot_category,
        "min_count": s.min_count,
        "max_count": s.max_count,
        "ordered": s.ordered,
    }


def _component_to_dict(c: ComponentTypeDef) -> dict[str, Any]:
    return {
        "type_name": c.type_name,
        "category": c.category,
        "prop_schema": [_prop_to_dict(p) for p in c.prop_schema.values()],
        "allowed_slot_categories": sorted(c.allowed_slot_categories),
        "child_slots": [_slot_to_dict(s) for s in c.child_slots],
        "a11y_requirements": list(c.a11y_requirements),
        "render_weight": c.render_weight,
    }


def _template_to_dict(t: TemplateDef) -> dict[str, Any]:
    return {
        "template_id": t.template_id,
        "slots": [_slot_to_dict(s) for s in t.slots],
        "skeleton": [
            {"slot_name": e.slot_name, "row": e.row, "col": e.col} for e in t.skeleton
        ],
    }
