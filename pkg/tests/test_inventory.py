"""Catalog loading, invariants, and prop-kind matching."""

import json

import pytest

from portal_agent.errors import InventoryInvariantError, ParseError
from portal_agent.inventory import (
    BUILTIN_A11Y_ATTRIBUTES,
    Inventory,
    PropTypeDef,
    default_inventory_bytes,
    load_default_inventory,
    load_inventory,
    lookup_component,
    prop_value_matches,
)


def minimal_doc(**overrides):
    doc = {
        "schema_version": "1",
        "components": [
            {
                "type_name": "TextBlock",
                "category": "atomic",
                "prop_schema": [{"name": "body", "value_kind": "string", "required": True}],
                "allowed_slot_categories": ["text"],
                "a11y_requirements": [],
                "render_weight": 1,
            }
        ],
        "templates": [
            {
                "template_id": "t.v1",
                "slots": [{"slot_name": "main", "slot_category": "text", "min_count": 0}],
                "skeleton": [{"slot_name": "main", "row": 0, "col": 0}],
            }
        ],
    }
    doc.update(overrides)
    return doc


def load_doc(doc):
    return load_inventory(json.dumps(doc))


class TestLoading:
    def test_default_inventory_loads(self, inv):
        assert isinstance(inv, Inventory)
        assert len(inv.components) == 8
        assert len(inv.templates) == 3

    def test_default_bytes_round_trip(self, inv):
        again = load_inventory(default_inventory_bytes())
        assert again == inv

    def test_loader_is_pure(self):
        raw = default_inventory_bytes()
        assert load_inventory(raw) == load_inventory(raw)

    def test_component_order_preserved(self, inv):
        # Catalog order is the tiebreak order everywhere downstream.
        assert inv.type_names == (
            "KpiCard",
            "DataTable",
            "Chart",
            "FilterBar",
            "Board",
            "TextBlock",
            "Section",
            "Grid",
        )

    def test_template_ids(self, inv):
        assert [t.template_id for t in inv.templates] == [
            "dashboard.analytics.v1",
            "board.kanban.v1",
            "portal.content.v1",
        ]

    def test_accepts_str_and_bytes(self):
        doc = json.dumps(minimal_doc())
        assert load_inventory(doc) == load_inventory(doc.encode("utf-8"))

    def test_empty_document_rejected(self):
        with pytest.raises(ParseError):
            load_inventory("")
        with pytest.raises(ParseError):
            load_inventory("   \n ")

    def test_non_json_rejected(self):
        with pytest.raises(ParseError):
            load_inventory("not json {")

    def test_non_object_rejected(self):
        with pytest.raises(ParseError):
            load_inventory("[1, 2]")

    def test_bad_utf8_rejected(self):
        with pytest.raises(ParseError):
            load_inventory(b"\xff\xfe{}")

    def test_schema_version_required(self):
        doc = minimal_doc()
        del doc["schema_version"]
        with pytest.raises(ParseError):
            load_doc(doc)

    def test_components_must_be_list(self):
        with pytest.raises(ParseError):
            load_doc(minimal_doc(components={}))


class TestInvariants:
    def test_duplicate_type_name(self):
        doc = minimal_doc()
        doc["components"].append(dict(doc["components"][0]))
        with pytest.raises(InventoryInvariantError, match="duplicate type_name"):
            load_doc(doc)

    def test_duplicate_template_id(self):
        doc = minimal_doc()
        doc["templates"].append(dict(doc["templates"][0]))
        with pytest.raises(InventoryInvariantError, match="duplicate template_id"):
            load_doc(doc)

    def test_enum_prop_needs_enum_values(self):
        doc = minimal_doc()
        doc["components"][0]["prop_schema"] = [{"name": "mode", "value_kind": "enum"}]
        with pytest.raises(InventoryInvariantError, match="enum"):
            load_doc(doc)

    def test_enum_values_forbidden_elsewhere(self):
        doc = minimal_doc()
        doc["components"][0]["prop_schema"] = [
            {"name": "body", "value_kind": "string", "enum_values": ["a"]}
        ]
        with pytest.raises(InventoryInvariantError):
            load_doc(doc)

    def test_default_must_match_kind(self):
        doc = minimal_doc()
        doc["components"][0]["prop_schema"] = [
            {"name": "count", "value_kind": "number", "default": "ten"}
        ]
        with pytest.raises(InventoryInvariantError, match="default"):
            load_doc(doc)

    def test_atomic_component_rejects_child_slots(self):
        doc = minimal_doc()
        doc["components"][0]["child_slots"] = [
            {"slot_name": "inner", "slot_category": "text"}
        ]
        with pytest.raises(InventoryInvariantError, match="atomic"):
            load_doc(doc)

    def test_min_count_above_max_count(self):
        doc = minimal_doc()
        doc["templates"][0]["slots"][0].update(min_count=3, max_count=2)
        with pytest.raises(InventoryInvariantError, match="min_count"):
            load_doc(doc)

    def test_dead_template_slot(self):
        # A slot whose category no component accepts can never be filled.
        doc = minimal_doc()
        doc["templates"][0]["slots"][0]["slot_category"] = "nothing-accepts-this"
        with pytest.raises(InventoryInvariantError, match="dead slot"):
            load_doc(doc)

    def test_dead_child_slot(self):
        doc = minimal_doc()
        doc["components"].append(
            {
                "type_name": "Box",
                "category": "container",
                "prop_schema": [],
                "allowed_slot_categories": ["text"],
                "child_slots": [{"slot_name": "inner", "slot_category": "void"}],
            }
        )
        with pytest.raises(InventoryInvariantError, match="dead slot"):
            load_doc(doc)

    def test_a11y_requirement_must_name_a_prop(self):
        doc = minimal_doc()
        doc["components"][0]["a11y_requirements"] = ["caption"]
        with pytest.raises(InventoryInvariantError, match="a11y"):
            load_doc(doc)

    def test_builtin_role_requirement_allowed(self):
        assert "role" in BUILTIN_A11Y_ATTRIBUTES
        doc = minimal_doc()
        doc["components"][0]["a11y_requirements"] = ["role"]
        loaded = load_doc(doc)
        assert loaded.components[0].a11y_requirements == ("role",)

    def test_skeleton_must_cover_every_slot_once(self):
        doc = minimal_doc()
        doc["templates"][0]["skeleton"] = []
        with pytest.raises(InventoryInvariantError, match="exactly once"):
            load_doc(doc)

    def test_skeleton_rejects_undeclared_slot(self):
        doc = minimal_doc()
        doc["templates"][0]["skeleton"].append({"slot_name": "ghost", "row": 1, "col": 0})
        with pytest.raises(InventoryInvariantError, match="undeclared"):
            load_doc(doc)

    def test_duplicate_prop_name(self):
        doc = minimal_doc()
        doc["components"][0]["prop_schema"].append(
            {"name": "body", "value_kind": "string"}
        )
        with pytest.raises(InventoryInvariantError, match="duplicate prop"):
            load_doc(doc)

    def test_duplicate_slot_name_in_template(self):
        doc = minimal_doc()
        doc["templates"][0]["slots"].append(
            {"slot_name": "main", "slot_category": "text"}
        )
        with pytest.raises(InventoryInvariantError, match="duplicate slot"):
            load_doc(doc)

    def test_slot_name_whitespace_rejected(self):
        doc = minimal_doc()
        doc["templates"][0]["slots"][0]["slot_name"] = "has space"
        with pytest.raises(InventoryInvariantError, match="whitespace"):
            load_doc(doc)


class TestLookup:
    def test_hit(self, inv):
        c = lookup_component(inv, "KpiCard")
        assert c is not None and c.type_name == "KpiCard"

    def test_miss_returns_none(self, inv):
        assert lookup_component(inv, "Carousel3D") is None

    def test_case_sensitive(self, inv):
        assert lookup_component(inv, "kpicard") is None

    def test_template_lookup(self, inv):
        assert inv.template("board.kanban.v1").template_id == "board.kanban.v1"
        assert inv.template("board.kanban.v9") is None


class TestPropValueMatches:
    def prop(self, kind, enum=()):
        return PropTypeDef(name="p", value_kind=kind, enum_values=tuple(enum))

    def test_string(self):
        assert prop_value_matches(self.prop("string"), "hi")
        assert not prop_value_matches(self.prop("string"), 3)

    def test_number_excludes_bool(self):
        p = self.prop("number")
        assert prop_value_matches(p, 3)
        assert prop_value_matches(p, 3.5)
        assert not prop_value_matches(p, True)
        assert not prop_value_matches(p, "3")

    def test_boolean(self):
        p = self.prop("boolean")
        assert prop_value_matches(p, False)
        assert not prop_value_matches(p, 0)

    def test_enum_membership(self):
        p = self.prop("enum", enum=("line", "bar"))
        assert prop_value_matches(p, "bar")
        assert not prop_value_matches(p, "pie")
        assert not prop_value_matches(p, 1)

    def test_string_list(self):
        p = self.prop("string_list")
        assert prop_value_matches(p, ["a", "b"])
        assert prop_value_matches(p, [])
        assert not prop_value_matches(p, ["a", 1])
        assert not prop_value_matches(p, "a")

    def test_data_ref_is_a_string(self):
        p = self.prop("data_ref")
        assert prop_value_matches(p, "sales.revenue")
        assert not prop_value_matches(p, {"source": "sales"})


class TestCatalogContent:
    """Spot checks of the bundled catalog that downstream modules lean on."""

    def test_kpi_card_shape(self, inv):
        kpi = lookup_component(inv, "KpiCard")
        assert kpi.category == "atomic"
        assert kpi.render_weight == 1
        assert kpi.prop_schema["title"].required
        assert kpi.prop_schema["value"].required
        assert kpi.prop_schema["value"].value_kind == "string"
        trend = kpi.prop_schema["trend"]
        assert trend.value_kind == "enum" and trend.default == "flat"
        assert kpi.a11y_requirements == ("title",)
        assert kpi.allowed_slot_categories == frozenset({"kpis", "content"})

    def test_container_child_slots(self, inv):
        section = lookup_component(inv, "Section")
        assert section.is_container
        assert section.child_slot("content").max_count is None
        grid = lookup_component(inv, "Grid")
        assert grid.child_slot("cells") is not None
        assert lookup_component(inv, "TextBlock").child_slots == ()

    def test_render_weights(self, inv):
        weights = {c.type_name: c.render_weight for c in inv.components}
        assert weights["DataTable"] == 4
        assert weights["Chart"] == 5
        assert weights["Section"] == 2

    def test_kanban_board_slot_is_mandatory(self, inv):
        t = inv.template("board.kanban.v1")
        main = t.slot("board.main")
        assert main.min_count == 1 and main.max_count == 1

    def test_analytics_skeleton_positions(self, inv):
        t = inv.template("dashboard.analytics.v1")
        names = [e.slot_name for e in t.skeleton]
        assert names[0] == "header.filters"
        # Each slot appears exactly once in the skeleton grid.
        assert sorted(names) == sorted(s.slot_name for s in t.slots)

    def test_to_dict_round_trips(self, inv):
        again = load_inventory(json.dumps(inv.to_dict()))
        assert again == inv
