import sys
from pathlib import Path

import pytest

from portal_agent.composition import ComponentSpec, Composition
from portal_agent.inventory import load_default_inventory
from portal_agent.pipeline import bundled_scenarios

sys.path.insert(0, str(Path(__file__).parent))

SCENARIO_DIR = Path(__file__).parent.parent / "src" / "portal_agent" / "data" / "scenarios"


@pytest.fixture(scope="session")
def inv():
    return load_default_inventory()


@pytest.fixture(scope="session")
def scenarios():
    docs = bundled_scenarios()
    return {doc["scenario_id"]: doc for doc in docs}


def make_kpi(card_id="k1", slot="header.metrics", title="Revenue", value="12", **extra):
    props = {"title": title, "value": value, **extra.pop("props", {})}
    return ComponentSpec(id=card_id, type="KpiCard", slot=slot, props=props, **extra)


def make_table(table_id="t1", slot="body.table", title="Orders", columns=None, **extra):
    props = {"title": title}
    if columns is not None:
        props["columns"] = columns
    props.update(extra.pop("props", {}))
    return ComponentSpec(id=table_id, type="DataTable", slot=slot, props=props, **extra)


@pytest.fixture
def dashboard_fixture():
    """2 KpiCards + 1 DataTable on the analytics template (the hand-counted page)."""
    return Composition(
        template="dashboard.analytics.v1",
        components=[
            make_kpi("k1", title="Revenue", value="12"),
            make_kpi("k2", title="Orders", value="34"),
            make_table("t1", columns=["date", "region"]),
        ],
    )
