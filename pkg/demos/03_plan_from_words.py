"""
From a sentence to a typed plan
===============================

The planner reads a scenario (free text, or an explicit expected block),
extracts component requirements, picks the template whose slots fit them
best, and emits a composition that always validates. The trace records
every decision so nothing about the plan is a mystery.
"""

from portal_agent.inventory import load_default_inventory
from portal_agent.pipeline import bundled_scenarios
from portal_agent.planner import parse_intent, plan, select_template

inv = load_default_inventory()

# Plain words in, structured requirements out.
adhoc = {
    "scenario_id": "adhoc-demo",
    "description": "A dashboard with three KPIs, an orders table and a trends chart.",
}
intent = parse_intent(adhoc)
print("requirements extracted from the description:")
for req in intent.required_components:
    print(f"    {req.count} x {req.kind} ({req.importance})")
print("regions:", ", ".join(intent.required_regions))
print("template chosen:", select_template(intent, inv))
print()

composition, trace = plan(intent, inv)
print("planned placements:")
for spec in composition.components:
    print(f"    {spec.id}: {spec.type} -> {spec.slot}")
print()

# A bundled scenario carries datasets; the planner grounds props in them
# (the KPI value below is an aggregate computed from rows, not a guess).
sales = [d for d in bundled_scenarios() if d["scenario_id"] == "analytics-sales"][0]
intent = parse_intent(sales)
composition, trace = plan(intent, inv)
for spec in composition.components:
    binding = ""
    if spec.data is not None:
        agg = f" {spec.data.aggregate}" if spec.data.aggregate else ""
        binding = f"  [data: {spec.data.source}.{spec.data.field}{agg}]"
    print(f"{spec.id}: {spec.type} -> {spec.slot}{binding}")
    for name, value in sorted(spec.props.items()):
        print(f"    {name} = {value!r}")
print()

# The trace explains trade-offs, e.g. when a requested unit has no slot
# on the chosen template.
triage = [d for d in bundled_scenarios() if d["scenario_id"] == "board-triage"][0]
_, trace = plan(parse_intent(triage), inv)
print("trace for board-triage:")
print("    selection_reason:", trace.selection_reason)
for note in trace.notes:
    print("    note:", note)
