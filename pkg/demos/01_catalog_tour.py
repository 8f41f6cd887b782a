"""
Tour of the vetted component catalog
====================================

Everything the engine can ever place on a page is declared here: eight
component types with typed prop schemas, and three page templates with
named slots. Nothing outside this catalog reaches the renderer.
"""

from portal_agent.inventory import load_default_inventory, lookup_component

inv = load_default_inventory()

print(f"catalog schema_version: {inv.schema_version}")
print(f"{len(inv.components)} component types, {len(inv.templates)} templates")
print()

# Each component declares its props up front: kind, required (!), default,
# and which slot categories may hold it.
for typedef in inv.components:
    slots = ",".join(sorted(typedef.allowed_slot_categories))
    print(f"{typedef.type_name}  [{typedef.category}]  "
          f"slot categories: {slots}  weight {typedef.render_weight}")
    for prop in typedef.prop_schema.values():
        marker = "!" if prop.required else " "
        default = f" = {prop.default!r}" if prop.has_default else ""
        print(f"    {prop.name}{marker}: {prop.value_kind}{default}")
    if typedef.child_slots:
        names = ", ".join(s.slot_name for s in typedef.child_slots)
        print(f"    child slots: {names}")
    if typedef.a11y_requirements:
        print(f"    a11y: {', '.join(typedef.a11y_requirements)}")
print()

# Templates are fixed skeletons of named slots. A slot accepts one
# category of components and can bound how many it takes.
for template in inv.templates:
    print(f"template {template.template_id}")
    for slot in template.slots:
        bound = f"{slot.min_count}..{'*' if slot.max_count is None else slot.max_count}"
        print(f"    {slot.slot_name}: accepts {slot.slot_category}, cardinality {bound}")
print()

# Lookups are plain and case-sensitive; a miss is None, not a guess.
print("lookup KpiCard ->", lookup_component(inv, "KpiCard").type_name)
print("lookup kpicard ->", lookup_component(inv, "kpicard"))
