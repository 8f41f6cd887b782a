"""
Scoring a page two ways
=======================

Automatic metrics first: six subscores folded into one weighted
autoscore, plus machine-readable suggestions for closing each gap. Then
the rubric judge: here in mock mode, a fixed map from the subscores, so
runs stay reproducible without any endpoint.
"""

from portal_agent.evaluator import evaluate_output
from portal_agent.inventory import load_default_inventory
from portal_agent.judge import flag_for_adjudication, judge_pairwise, judge_single
from portal_agent.pipeline import bundled_scenarios
from portal_agent.planner import parse_intent, plan
from portal_agent.renderer import render

inv = load_default_inventory()
sales = [d for d in bundled_scenarios() if d["scenario_id"] == "analytics-sales"][0]
intent = parse_intent(sales)

# The planner's own page satisfies the intent it was planned from.
composition, _ = plan(intent, inv)
page = render(inv, composition)
report = evaluate_output(intent, page)
print("full page autoscore:", report.autoscore)
print("subscores:", report.subscores.to_dict())
print()

# Drop the chart and the filter bar: coverage falls, and the report says
# exactly what to add back.
thinner = composition.to_dict()
thinner["components"] = [
    c for c in thinner["components"] if c["type"] not in ("Chart", "FilterBar")
]
from portal_agent.composition import composition_from_dict

partial_page = render(inv, composition_from_dict(thinner))
partial = evaluate_output(intent, partial_page)
print("thinned page autoscore:", round(partial.autoscore, 4))
print("coverage subscore:", round(partial.subscores.s_cov, 4))
for diff in partial.diffs:
    print(f"    suggested: {diff.kind} {diff.target} -- {diff.detail}")
print()

# Rubric judging (mock backend: affine in the subscores, deterministic).
# Alongside the four rubric scores it scores the five report dimensions.
rubric, dimensions = judge_single(intent, page.html, partial.subscores)
print("rubric on the thinned page:")
print("    intent_alignment:", rubric.intent_alignment)
print("    semantic_correctness:", rubric.semantic_correctness)
print("    accessibility_signals:", rubric.accessibility_signals)
print("    visual_polish:", rubric.visual_polish)
print("    verdict:", rubric.overall_verdict)
print("    rationale:", rubric.rationale)
print("report dimensions:", dimensions.as_tuple())
print()

# Pairwise comparison judges both argument orders and only keeps a
# preference that survives the swap.
print("full vs thinned:", judge_pairwise(intent, page.html, partial_page.html))
print("thinned vs full:", judge_pairwise(intent, partial_page.html, page.html))
print("full vs itself: ", judge_pairwise(intent, page.html, page.html))
print()

# Disagreement between the two scoring channels flags a run for a human.
full_rubric, _ = judge_single(intent, page.html, report.subscores)
print("adjudicate full page?", flag_for_adjudication(report.subscores, full_rubric))
print("adjudicate thinned page?", flag_for_adjudication(partial.subscores, rubric))
