"""Deterministic lowering of validated compositions to HTML.

The output tree is template-root -> slot -> component, with container
children under nested child-slot nodes. Markup per component type comes
from a fixed table; types without an entry get a generic block so custom
catalogs still render. Every component root carries machine-readable
``data-*`` attributes (type, categories, weight, required a11y attribute
names, prop values, data binding) because downstream scoring reads the
serialized page, not the composition.

Serialization is canonical: attributes sorted by name, text escaped, no
optional whitespace, one trailing newline. ``parse_html`` inverts it, so
``serialize(parse_html(html)) == html`` for pages this module produced.
"""

from __future__ import annotations

import html as html_lib
from dataclasses import dataclass, field
from html.parser import HTMLParser
from typing import Callable, Iterator, Optional

from .composition import (
    MAX_NESTING_DEPTH,
    ComponentSpec,
    Composition,
    canonical_prop_string,
    fill_defaults,
    iter_specs,
    validate,
)
from .errors import DepthExceededError, InvalidCompositionError, ParseError
from .inventory import BUILTIN_A11Y_ATTRIBUTES, ComponentTypeDef, Inventory, lookup_component

ROLE_TEMPLATE_ROOT = "template-root"
ROLE_SLOT = "slot"


@dataclass
class UINode:
    """One element of the rendered tree; attributes are kept name-sorted."""

    node_id: str
    role: str
    tag: str
    attributes: dict[str, str] = field(default_factory=dict)
    text: Optional[str] = None
    children: list["UINode"] = field(default_factory=list)
    provenance: Optional[str] = None

    def __post_init__(self):
        self.attributes = {k: self.attributes[k] for k in sorted(self.attributes)}
        if self.text == "":
            self.text = None

    def walk(self) -> Iterator["UINode"]:
        yield self
        for child in self.children:
            yield from child.walk()

    def walk_with_parent(
        self, parent: Optional["UINode"] = None
    ) -> Iterator[tuple["UINode", Optional["UINode"]]]:
        yield self, parent
        for child in self.children:
            yield from child.walk_with_parent(self)

    def attr(self, name: str) -> Optional[str]:
        return self.attributes.get(name)

    def to_dict(self) -> dict:
        out: dict = {
            "node_id": self.node_id,
            "role": self.role,
            "tag": self.tag,
            "attributes": dict(self.attributes),
        }
        if self.text is not None:
            out["text"] = self.text
        if self.children:
            out["children"] = [c.to_dict() for c in self.children]
        if self.provenance is not None:
            out["provenance"] = self.provenance
        return out


@dataclass(frozen=True)
class RenderStats:
    node_count: int
    total_render_weight: int
    max_depth: int

    def to_dict(self) -> dict[str, int]:
        return {
            "node_count": self.node_count,
            "total_render_weight": self.total_render_weight,
            "max_depth": self.max_depth,
        }


@dataclass(frozen=True)
class RenderOutput:
    tree: UINode
    html: str
    stats: RenderStats


def extract_tree(output: RenderOutput) -> UINode:
    """The rendered tree, i.e. the Actual side for scoring."""
    return output.tree


# ---------------------------------------------------------------------------
# Rendering


def render(inv: Inventory, c: Composition) -> RenderOutput:
    """Lower a composition to its page. Pure; byte-identical on equal input.

    Refuses invalid compositions (InvalidCompositionError carrying the
    report) and nesting beyond MAX_NESTING_DEPTH levels of components.
    """
    report = validate(inv, c)
    if not report.ok:
        raise InvalidCompositionError(
            "composition failed validation; render refuses unvetted structure",
            report=report,
        )
    for path, _spec, _parent, depth in iter_specs(c):
        if depth > MAX_NESTING_DEPTH:
            raise DepthExceededError(
                f"component at {path} nests {depth} levels deep, limit is {MAX_NESTING_DEPTH}"
            )
    filled = fill_defaults(inv, c)
    template = inv.template(filled.template)

    root = UINode(
        node_id="",
        role=ROLE_TEMPLATE_ROOT,
        tag="main",
        attributes={"data-role": ROLE_TEMPLATE_ROOT, "data-template": filled.template},
    )
    for entry in template.skeleton:
        slot = template.slot(entry.slot_name)
        slot_node = UINode(
            node_id="",
            role=ROLE_SLOT,
            tag="section",
            attributes={
                "data-role": ROLE_SLOT,
                "data-slot": slot.slot_name,
                "data-slot-category": slot.slot_category,
                "data-row": str(entry.row),
                "data-col": str(entry.col),
            },
        )
        for spec in filled.components:
            if spec.slot == slot.slot_name:
                slot_node.children.append(_build_component(inv, spec))
        root.children.append(slot_node)

    _assign_node_ids(root)
    html = serialize(root)
    weight = sum(
        lookup_component(inv, spec.type).render_weight
        for _, spec, _, _ in iter_specs(filled)
    )
    stats = RenderStats(
        node_count=sum(1 for _ in root.walk()),
        total_render_weight=weight,
        max_depth=_tree_depth(root),
    )
    return RenderOutput(tree=root, html=html, stats=stats)


def _assign_node_ids(root: UINode) -> None:
    for i, node in enumerate(root.walk()):
        node.node_id = f"n{i}"


def _tree_depth(node: UINode) -> int:
    if not node.children:
        return 1
    return 1 + max(_tree_depth(c) for c in node.children)


def a11y_attribute_name(requirement: str) -> Optional[str]:
    """Attribute a catalog a11y requirement materializes as, if any."""
    if requirement in BUILTIN_A11Y_ATTRIBUTES:
        return None
    return "alt" if requirement == "alt" else "aria-label"


def _component_attributes(spec: ComponentSpec, typedef: ComponentTypeDef, role: str) -> dict[str, str]:
    attrs = {
        "data-role": role,
        "data-component-id": spec.id,
        "data-component-type": spec.type,
        "data-component-categories": ",".join(sorted(typedef.allowed_slot_categories)),
        "data-render-weight": str(typedef.render_weight),
    }
    required_attrs = []
    for requirement in typedef.a11y_requirements:
        attr_name = a11y_attribute_name(requirement)
        if attr_name is None:
            continue
        required_attrs.append(attr_name)
        value = canonical_prop_string(spec.props.get(requirement, ""))
        if value:
            attrs[attr_name] = value
    attrs["data-a11y-required"] = ",".join(sorted(required_attrs))
    for name, value in spec.props.items():
        attrs[f"data-prop-{name}"] = canonical_prop_string(value)
    if spec.data is not None:
        attrs["data-source"] = spec.data.source
        attrs["data-field"] = spec.data.field
        if spec.data.aggregate is not None:
            attrs["data-aggregate"] = spec.data.aggregate
    return attrs


def _build_component(inv: Inventory, spec: ComponentSpec) -> UINode:
    typedef = lookup_component(inv, spec.type)
    builder = _MARKUP_TABLE.get(spec.type, _generic_markup)
    node = builder(spec, typedef)
    node.provenance = spec.id
    if typedef.is_container:
        for slot in typedef.child_slots:
            slot_node = UINode(
                node_id="",
                role=ROLE_SLOT,
                tag="div",
                attributes={
                    "data-role": ROLE_SLOT,
                    "data-slot": slot.slot_name,
                    "data-slot-category": slot.slot_category,
                },
            )
            for child in spec.children:
                if child.slot == slot.slot_name:
                    slot_node.children.append(_build_component(inv, child))
            node.children.append(slot_node)
    return node


def _leaf(role: str, tag: str, text: str) -> UINode:
    return UINode(node_id="", role=role, tag=tag,
                  attributes={"data-role": role}, text=text)


def _kpi_card(spec: ComponentSpec, typedef: ComponentTypeDef) -> UINode:
    node = UINode(node_id="", role="kpi-card", tag="article",
                  attributes=_component_attributes(spec, typedef, "kpi-card"))
    node.children = [
        _leaf("kpi-value", "span", canonical_prop_string(spec.props.get("value", ""))),
        _leaf("kpi-title", "h2", canonical_prop_string(spec.props.get("title", ""))),
        _leaf("kpi-trend", "span", canonical_prop_string(spec.props.get("trend", ""))),
    ]
    return node


def _data_table(spec: ComponentSpec, typedef: ComponentTypeDef) -> UINode:
    node = UINode(node_id="", role="table", tag="section",
                  attributes=_component_attributes(spec, typedef, "table"))
    node.children = [_leaf("table-title", "h2", canonical_prop_string(spec.props.get("title", "")))]
    grid = UINode(node_id="", role="table-grid", tag="table",
                  attributes={"data-role": "table-grid"})
    columns = spec.props.get("columns")
    if isinstance(columns, list) and columns:
        header = UINode(node_id="", role="table-header-row", tag="tr",
                        attributes={"data-role": "table-header-row"})
        header.children = [
            _leaf("table-header", "th", canonical_prop_string(col)) for col in columns
        ]
        grid.children = [header]
    node.children.append(grid)
    return node


def _chart(spec: ComponentSpec, typedef: ComponentTypeDef) -> UINode:
    node = UINode(node_id="", role="chart", tag="figure",
                  attributes=_component_attributes(spec, typedef, "chart"))
    node.children = [
        _leaf("chart-title", "h2", canonical_prop_string(spec.props.get("title", ""))),
        _leaf("chart-canvas", "div", canonical_prop_string(spec.props.get("chart_type", ""))),
    ]
    return node


def _filter_bar(spec: ComponentSpec, typedef: ComponentTypeDef) -> UINode:
    node = UINode(node_id="", role="filter-bar", tag="form",
                  attributes=_component_attributes(spec, typedef, "filter-bar"))
    node.children = [_leaf("filter-label", "h2", canonical_prop_string(spec.props.get("label", "")))]
    fields = spec.props.get("fields")
    if isinstance(fields, list):
        node.children.extend(
            _leaf("filter-field", "span", canonical_prop_string(f)) for f in fields
        )
    return node


def _board(spec: ComponentSpec, typedef: ComponentTypeDef) -> UINode:
    node = UINode(node_id="", role="board", tag="section",
                  attributes=_component_attributes(spec, typedef, "board"))
    node.children = [_leaf("board-title", "h2", canonical_prop_string(spec.props.get("title", "")))]
    stages = spec.props.get("stages")
    if isinstance(stages, list):
        for stage in stages:
            lane = UINode(node_id="", role="board-lane", tag="div",
                          attributes={"data-role": "board-lane"})
            lane.children = [_leaf("lane-title", "h3", canonical_prop_string(stage))]
            node.children.append(lane)
    return node


def _text_block(spec: ComponentSpec, typedef: ComponentTypeDef) -> UINode:
    node = UINode(node_id="", role="text-block", tag="article",
                  attributes=_component_attributes(spec, typedef, "text-block"))
    heading = spec.props.get("heading")
    if heading is not None and canonical_prop_string(heading):
        level = spec.props.get("heading_level", 2)
        level = int(level) if isinstance(level, (int, float)) and not isinstance(level, bool) else 2
        level = min(6, max(1, level))
        node.children.append(_leaf("text-heading", f"h{level}", canonical_prop_string(heading)))
    node.children.append(_leaf("text-body", "p", canonical_prop_string(spec.props.get("body", ""))))
    return node


def _section(spec: ComponentSpec, typedef: ComponentTypeDef) -> UINode:
    node = UINode(node_id="", role="section-container", tag="section",
                  attributes=_component_attributes(spec, typedef, "section-container"))
    node.children = [_leaf("section-title", "h2", canonical_prop_string(spec.props.get("title", "")))]
    return node


def _grid(spec: ComponentSpec, typedef: ComponentTypeDef) -> UINode:
    return UINode(node_id="", role="grid-container", tag="div",
                  attributes=_component_attributes(spec, typedef, "grid-container"))


def _generic_markup(spec: ComponentSpec, typedef: ComponentTypeDef) -> UINode:
    role = _kebab(spec.type)
    node = UINode(node_id="", role=role, tag="section",
                  attributes=_component_attributes(spec, typedef, role))
    title = spec.props.get("title")
    if title is not None and canonical_prop_string(title):
        node.children.append(_leaf("component-title", "h2", canonical_prop_string(title)))
    return node


def _kebab(name: str) -> str:
    out = []
    for i, ch in enumerate(name):
        if ch.isupper() and i > 0 and not name[i - 1].isupper():
            out.append("-")
        out.append(ch.lower())
    return "".join(out).replace("_", "-")


# One markup definition per builtin component type; versioned with the
# bundled catalog. Unlisted types fall back to _generic_markup.
_MARKUP_TABLE: dict[str, Callable[[ComponentSpec, ComponentTypeDef], UINode]] = {
    "KpiCard": _kpi_card,
    "DataTable": _data_table,
    "Chart": _chart,
    "FilterBar": _filter_bar,
    "Board": _board,
    "TextBlock": _text_block,
    "Section": _section,
    "Grid": _grid,
}


def markup_roles(typedef: ComponentTypeDef) -> frozenset[str]:
    """Every role the markup table can emit for this type (boundedness checkers
    compare rendered roles against the union of these over the catalog)."""
    by_type = {
        "KpiCard": {"kpi-card", "kpi-value", "kpi-title", "kpi-trend"},
        "DataTable": {"table", "table-title", "table-grid", "table-header-row", "table-header"},
        "Chart": {"chart", "chart-title", "chart-canvas"},
        "FilterBar": {"filter-bar", "filter-label", "filter-field"},
        "Board": {"board", "board-title", "board-lane", "lane-title"},
        "TextBlock": {"text-block", "text-heading", "text-body"},
        "Section": {"section-container", "section-title"},
        "Grid": {"grid-container"},
    }
    roles = by_type.get(typedef.type_name, {_kebab(typedef.type_name), "component-title"})
    if typedef.is_container:
        roles = set(roles) | {ROLE_SLOT}
    return frozenset(roles)


# ---------------------------------------------------------------------------
# Serialization


def serialize(tree: UINode) -> str:
    """Canonical HTML: sorted attributes, escaped text, trailing newline."""
    return _serialize_node(tree) + "\n"


def _serialize_node(node: UINode) -> str:
    parts = [f"<{node.tag}"]
    for name in sorted(node.attributes):
        value = html_lib.escape(node.attributes[name], quote=True)
        parts.append(f' {name}="{value}"')
    parts.append(">")
    if node.text is not None:
        parts.append(html_lib.escape(node.text, quote=True))
    for child in node.children:
        parts.append(_serialize_node(child))
    parts.append(f"</{node.tag}>")
    return "".join(parts)


# ---------------------------------------------------------------------------
# Parsing (inverse of serialize, for scoring externally supplied pages)


class _TreeBuilder(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.root: Optional[UINode] = None
        self.stack: list[UINode] = []
        self.buffer: list[str] = []

    def handle_starttag(self, tag, attrs):
        self._flush_text()
        attributes = {name: value if value is not None else "" for name, value in attrs}
        node = UINode(
            node_id="",
            role=attributes.get("data-role", ""),
            tag=tag,
            attributes=attributes,
            provenance=attributes.get("data-component-id"),
        )
        if self.stack:
            self.stack[-1].children.append(node)
        elif self.root is None:
            self.root = node
        else:
            raise ParseError("page has more than one root element")
        self.stack.append(node)

    def handle_endtag(self, tag):
        if not self.stack or self.stack[-1].tag != tag:
            raise ParseError(f"unbalanced closing tag </{tag}>")
        node = self.stack.pop()
        text = "".join(self.buffer)
        self.buffer = []
        if node.children:
            if text.strip():
                raise ParseError(f"mixed text and elements inside <{node.tag}>")
        elif text:
            node.text = text

    def handle_data(self, data):
        if self.stack:
            self.buffer.append(data)

    def _flush_text(self):
        if self.buffer and self.stack and not self.stack[-1].children:
            text = "".join(self.buffer)
            if text.strip():
                raise ParseError(
                    f"mixed text and elements inside <{self.stack[-1].tag}>"
                )
        self.buffer = []


def parse_html(html: str) -> UINode:
    """Rebuild the node tree from a serialized page.

    Node ids are regenerated in document order, so for pages produced by
    ``render`` the round-trip is exact: serialize(parse_html(h)) == h.
    """
    if not html or not html.strip():
        raise ParseError("page is empty")
    builder = _TreeBuilder()
    try:
        builder.feed(html)
        builder.close()
    except ParseError:
        raise
    except Exception as exc:
        raise ParseError(f"page is not parseable HTML: {exc}") from None
    if builder.stack:
        raise ParseError(f"unclosed element <{builder.stack[-1].tag}>")
    if builder.root is None:
        raise ParseError("page has no element content")
    _assign_node_ids(builder.root)
    return builder.root


def stats_from_tree(tree: UINode) -> RenderStats:
    """Recompute render stats from a parsed page using its data-* attributes."""
    weight = 0
    for node in tree.walk():
        raw = node.attr("data-render-weight")
        if raw is not None:
            try:
                weight += int(raw)
            except ValueError:
                pass
    return RenderStats(
        node_count=sum(1 for _ in tree.walk()),
        total_render_weight=weight,
        max_depth=_tree_depth(tree),
    )
