# Rendering is a pure function: valid composition in, HTML page out,
# same bytes every time. The page is self-describing through data-*
# attributes so evaluators can read it back without the composition.

import hashlib

from portal_agent.composition import canonicalize, composition_from_dict, validate
from portal_agent.errors import InvalidCompositionError
from portal_agent.inventory import load_default_inventory
from portal_agent.renderer import parse_html, render, serialize

inv = load_default_inventory()

composition = canonicalize(composition_from_dict({
    "template": "dashboard.analytics.v1",
    "components": [
        {"id": "rev", "type": "KpiCard", "slot": "header.metrics",
         "props": {"title": "Revenue", "value": "12k", "trend": "up"}},
        {"id": "tbl", "type": "DataTable", "slot": "body.table",
         "props": {"title": "Orders", "columns": ["date", "total"]}},
    ],
}))

output = render(inv, composition)
print(output.html)
print(f"nodes: {output.stats.node_count}, "
      f"weight: {output.stats.total_render_weight}, "
      f"depth: {output.stats.max_depth}")
print()

# Byte determinism: render twice, hash both.
again = render(inv, composition)
h1 = hashlib.sha256(output.html.encode()).hexdigest()
h2 = hashlib.sha256(again.html.encode()).hexdigest()
print("digest run 1:", h1[:16], "...")
print("digest run 2:", h2[:16], "...")
print("identical?", output.html == again.html)
print()

# The serialization round-trips: parse the page back into a tree and
# serialize again, and you get the same bytes.
tree = parse_html(output.html)
print("round trip exact?", serialize(tree) == output.html)
print()

# Invalid plans never render; the refusal carries the validation report.
bad = composition_from_dict({
    "template": "dashboard.analytics.v1",
    "components": [{"id": "x", "type": "Marquee", "slot": "body.content", "props": {}}],
})
assert not validate(inv, bad).ok
try:
    render(inv, bad)
except InvalidCompositionError as exc:
    print("refused:", [v.code for v in exc.report.violations])
