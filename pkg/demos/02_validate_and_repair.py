# A composition is the whole plan for a page: a template id plus typed
# component placements. Validation checks it against the catalog and
# reports every violation with a path; repair fixes what a fixed rulebook
# can fix and refuses the rest.

import json

from portal_agent.composition import (
    canonicalize,
    composition_from_dict,
    fill_defaults,
    repair,
    validate,
)
from portal_agent.errors import RepairFailedError
from portal_agent.inventory import load_default_inventory

inv = load_default_inventory()

# Start from a plan with four deliberate mistakes: a prop the schema does
# not know, a number sent as a string, a misspelled slot, and a component
# type that is not in the catalog.
doc = {
    "template": "dashboard.analytics.v1",
    "components": [
        {
            "id": "revenue",
            "type": "KpiCard",
            "slot": "header.metrics",
            "props": {"title": "Revenue", "value": "12k", "sparkle": True},
        },
        {
            "id": "orders",
            "type": "DataTable",
            "slot": "body.tables",
            "props": {"title": "Orders", "page_size": "25"},
        },
        {
            "id": "spin",
            "type": "Carousel3D",
            "slot": "body.content",
            "props": {},
        },
    ],
}

composition = composition_from_dict(doc)
report = validate(inv, composition)
print("valid?", report.ok)
for v in report.violations:
    print(f"    {v.code} at {v.path}: {v.message}")
print()

fixed, log = repair(inv, composition, report)
print("repair actions:")
for action in log:
    print(f"    {action.action} at {action.path}  ({action.violation_code})")
print("valid after repair?", validate(inv, fixed).ok)
print()

# Repair never invents content. Drop a required prop and it gives up
# loudly instead of guessing a title.
broken = composition_from_dict({
    "template": "dashboard.analytics.v1",
    "components": [
        {"id": "k", "type": "KpiCard", "slot": "header.metrics",
         "props": {"value": "9"}},
    ],
})
try:
    repair(inv, broken, validate(inv, broken))
except RepairFailedError as exc:
    print("unrepairable:", exc)
print()

# Canonical form sorts slots and prop keys so equal plans serialize to
# equal bytes; defaults are materialized explicitly.
canonical = canonicalize(fill_defaults(inv, fixed))
print(json.dumps(canonical.to_dict(), indent=2)[:400])
