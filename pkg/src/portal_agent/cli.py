"""Command-line front end.

    agent generate --scenario s.json [--backend rule|remote] [--out c.json]
    agent render --composition c.json [--out page.html]
    agent evaluate --scenario s.json --html page.html
    agent pipeline --scenarios dir/ --out runs/ [--backend rule|remote]
    agent aggregate --runs runs/
    agent serve --bind 127.0.0.1:8000 [--runs dir] [--static dir]

A global --inventory <path> swaps the bundled catalog for a custom one.
Engine errors print one line to stderr and exit 1.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .composition import canonicalize, composition_from_json, validate
from .errors import PortalAgentError
from .evaluator import evaluate_page
from .inventory import Inventory, load_default_inventory, load_inventory
from .judge import JudgeConfig
from .pipeline import (
    RunStore,
    aggregate,
    load_scenario_dir,
    load_scenario_file,
    run_corpus,
)
from .planner import PlannerConfig, parse_intent, plan
from .renderer import render


def _load_inventory_arg(path: Optional[str]) -> Inventory:
    if path is None:
        return load_default_inventory()
    return load_inventory(Path(path).read_bytes())


def _planner_config(backend: str) -> PlannerConfig:
    return PlannerConfig(backend="remote" if backend == "remote" else "rule_based")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def cmd_generate(args) -> int:
    inv = _load_inventory_arg(args.inventory)
    intent = parse_intent(load_scenario_file(args.scenario))
    composition, trace = plan(intent, inv, _planner_config(args.backend))
    composition = canonicalize(composition)
    doc = {
        "composition": composition.to_dict(),
        "report": validate(inv, composition).to_dict(),
        "trace": trace.to_dict(),
    }
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return 0


def cmd_render(args) -> int:
    inv = _load_inventory_arg(args.inventory)
    composition = canonicalize(
        composition_from_json(Path(args.composition).read_text(encoding="utf-8"))
    )
    output = render(inv, composition)
    _emit(output.html, args.out)
    if args.out:
        print(json.dumps(output.stats.to_dict()))
    return 0


def cmd_evaluate(args) -> int:
    intent = parse_intent(load_scenario_file(args.scenario))
    html = Path(args.html).read_text(encoding="utf-8")
    report = evaluate_page(intent, html)
    _emit(json.dumps(report.to_dict(), indent=2) + "\n", None)
    return 0


def cmd_pipeline(args) -> int:
    inv = _load_inventory_arg(args.inventory)
    docs = load_scenario_dir(args.scenarios)
    store = RunStore(args.out)
    records = run_corpus(docs, inv, _planner_config(args.backend), JudgeConfig(), store)
    for record in records:
        print(
            f"{record.scenario_id}: autoscore={record.autoscore:.3f} "
            f"verdict={record.rubric.overall_verdict} run_id={record.run_id}"
        )
    report = aggregate(records)
    (Path(args.out) / "aggregate.json").write_text(
        json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8"
    )
    print(json.dumps(report.to_dict(), indent=2))
    return 0


def cmd_aggregate(args) -> int:
    store = RunStore(args.runs)
    report = aggregate(store.load_all())
    print(json.dumps(report.to_dict(), indent=2))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .pipeline import bundled_scenarios
    from .service import create_app

    inv = _load_inventory_arg(args.inventory)
    host, _, port = args.bind.rpartition(":")
    scenario_docs = (
        load_scenario_dir(args.scenarios) if args.scenarios else bundled_scenarios()
    )
    app = create_app(
        inv=inv,
        store=RunStore(args.runs),
        scenario_docs=scenario_docs,
        static_dir=args.static,
    )
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agent",
        description="Plan, render, and score portal UIs from a vetted component catalog.",
    )
    parser.add_argument("--inventory", help="path to a catalog JSON (default: bundled)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="plan a composition from a scenario")
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--backend", choices=["rule", "remote"], default="rule")
    p.add_argument("--out", help="write the composition document here")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("render", help="render a composition to HTML")
    p.add_argument("--composition", required=True, help="composition JSON file")
    p.add_argument("--out", help="write the page here instead of stdout")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("evaluate", help="score a rendered page against a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--html", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("pipeline", help="run the five-step pipeline over a scenario dir")
    p.add_argument("--scenarios", required=True, help="directory of scenario JSON files")
    p.add_argument("--out", required=True, help="run store directory")
    p.add_argument("--backend", choices=["rule", "remote"], default="rule")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("aggregate", help="aggregate dimension means over stored runs")
    p.add_argument("--runs", required=True, help="run store directory")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("serve", help="serve the HTTP API and playground")
    p.add_argument("--bind", default="127.0.0.1:8000")
    p.add_argument("--runs", default="runs")
    p.add_argument("--scenarios", help="scenario directory (default: bundled corpus)")
    p.add_argument("--static", help="playground bundle directory to serve at /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PortalAgentError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
