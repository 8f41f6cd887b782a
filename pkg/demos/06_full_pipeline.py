# The whole loop over the bundled corpus: parse, plan, render, score,
# judge, persist. One record per scenario, then dimension means across
# the corpus. Everything below runs offline; the judge is the mock
# backend.

import json
import tempfile
from pathlib import Path

from portal_agent.inventory import load_default_inventory
from portal_agent.pipeline import RunStore, aggregate, bundled_scenarios, run_corpus

inv = load_default_inventory()
workdir = Path(tempfile.mkdtemp(prefix="portal-agent-demo-"))
store = RunStore(workdir / "runs")

records = run_corpus(bundled_scenarios(), inv, store=store)
for record in records:
    print(f"{record.scenario_id:18s} autoscore={record.autoscore:.3f} "
          f"verdict={record.rubric.overall_verdict:10s} "
          f"adjudicate={record.adjudicate}")
print()

report = aggregate(records)
print("aggregate over", report.scenario_count, "scenarios:")
print(json.dumps(report.to_dict(), indent=2))
print()

# Records persist as one JSON file each plus an append-only index; any
# run can be reloaded bit-exact later.
listing = store.list_runs()
print("stored runs:", len(listing))
first = store.load(listing[0]["run_id"])
print("reloaded", first.run_id[:12], "->", first.scenario_id,
      "autoscore", first.autoscore)
print("store on disk:", workdir / "runs")
