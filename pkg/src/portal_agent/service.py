"""HTTP API over the engine, plus static serving for the playground.

Endpoints:
    POST /api/generate   description or scenario -> composition + report
    POST /api/render     composition -> html + stats
    POST /api/evaluate   scenario + html -> score report
    POST /api/pipeline   scenario -> persisted RunRecord
    GET  /api/scenarios  shipped + configured scenario corpus
    GET  /api/runs       run index in timestamp order
    GET  /api/runs/{id}  one stored run
    GET  /api/inventory  the active catalog

Every engine error maps to exactly one HTTP status with a stable code in
the body: {"error": {"code": ..., "message": ..., "violations": [...]?}}.
Shared state (inventory, configs) is immutable; the run store serializes
its own writes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .composition import canonicalize, composition_from_dict, validate
from .errors import ParseError, PortalAgentError
from .evaluator import evaluate_page
from .inventory import Inventory, load_default_inventory
from .judge import JudgeConfig
from .pipeline import RunStore, bundled_scenarios, run_pipeline
from .planner import PlannerConfig, parse_intent, plan
from .renderer import render

# One status per error code; anything unmapped is a 500.
ERROR_STATUS = {
    "ParseError": 400,
    "InventoryInvariantError": 400,
    "UnknownComponentType": 400,
    "DomainError": 400,
    "EmptyInput": 400,
    "InvalidComposition": 422,
    "RepairFailed": 422,
    "DepthExceeded": 422,
    "PlanningFailed": 502,
    "EndpointError": 502,
    "JudgeUnavailable": 502,
    "JudgeParseError": 502,
    "RunNotFound": 404,
}


def error_body(exc: PortalAgentError) -> dict:
    body: dict = {"error": {"code": exc.code, "message": str(exc)}}
    report = getattr(exc, "report", None)
    if report is not None:
        body["error"]["violations"] = [v.to_dict() for v in report.violations]
    violations = getattr(exc, "violations", None)
    if violations:
        body["error"]["violations"] = [v.to_dict() for v in violations]
    return body


def create_app(
    inv: Optional[Inventory] = None,
    store: Optional[RunStore] = None,
    scenario_docs: Optional[list[dict]] = None,
    planner_cfg: Optional[PlannerConfig] = None,
    judge_cfg: Optional[JudgeConfig] = None,
    static_dir: Optional[str | Path] = None,
) -> FastAPI:
    inv = inv or load_default_inventory()
    store = store or RunStore("runs")
    scenario_docs = scenario_docs if scenario_docs is not None else bundled_scenarios()
    planner_cfg = planner_cfg or PlannerConfig()
    judge_cfg = judge_cfg or JudgeConfig()

    app = FastAPI(title="portal-agent", docs_url=None, redoc_url=None)

    @app.exception_handler(PortalAgentError)
    async def portal_error_handler(_request: Request, exc: PortalAgentError):
        return JSONResponse(
            status_code=ERROR_STATUS.get(exc.code, 500), content=error_body(exc)
        )

    async def read_json(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception:
            raise ParseError("request body must be a JSON object") from None
        if not isinstance(body, dict):
            raise ParseError("request body must be a JSON object")
        return body

    def scenario_from_body(body: dict) -> dict:
        if isinstance(body.get("scenario"), dict):
            return body["scenario"]
        if isinstance(body.get("scenario_id"), str):
            wanted = body["scenario_id"]
            for doc in scenario_docs:
                if doc.get("scenario_id") == wanted:
                    return doc
            raise ParseError(f"unknown scenario_id '{wanted}'")
        if isinstance(body.get("description"), str) and body["description"].strip():
            return {"scenario_id": "adhoc", "description": body["description"]}
        raise ParseError(
            "request needs 'scenario', 'scenario_id', or a non-empty 'description'"
        )

    def planner_cfg_from_body(body: dict) -> PlannerConfig:
        backend = body.get("backend")
        if backend is None:
            return planner_cfg
        if backend == "rule":
            backend = "rule_based"
        try:
            return PlannerConfig(
                backend=backend,
                max_retries=planner_cfg.max_retries,
                endpoint=body.get("endpoint", planner_cfg.endpoint),
                model_id=body.get("model_id", planner_cfg.model_id),
                temperature=planner_cfg.temperature,
                prompt_template_id=planner_cfg.prompt_template_id,
            )
        except ValueError as exc:
            raise ParseError(str(exc)) from None

    @app.post("/api/generate")
    async def api_generate(request: Request):
        body = await read_json(request)
        intent = parse_intent(scenario_from_body(body))
        composition, trace = plan(intent, inv, planner_cfg_from_body(body))
        composition = canonicalize(composition)
        return {
            "composition": composition.to_dict(),
            "report": validate(inv, composition).to_dict(),
            "intent": intent.to_dict(),
            "trace": trace.to_dict(),
        }

    @app.post("/api/render")
    async def api_render(request: Request):
        body = await read_json(request)
        raw = body.get("composition", body)
        composition = canonicalize(composition_from_dict(raw))
        output = render(inv, composition)
        return {"html": output.html, "stats": output.stats.to_dict()}

    @app.post("/api/evaluate")
    async def api_evaluate(request: Request):
        body = await read_json(request)
        intent = parse_intent(scenario_from_body(body))
        html = body.get("html")
        if not isinstance(html, str) or not html.strip():
            raise ParseError("request needs a non-empty 'html' string")
        return evaluate_page(intent, html).to_dict()

    @app.post("/api/pipeline")
    async def api_pipeline(request: Request):
        body = await read_json(request)
        record = run_pipeline(
            scenario_from_body(body), inv,
            planner_cfg_from_body(body), judge_cfg, store=store,
        )
        return record.to_dict()

    @app.get("/api/scenarios")
    async def api_scenarios():
        return {"scenarios": scenario_docs}

    @app.get("/api/runs")
    async def api_runs():
        return {"runs": store.list_runs()}

    @app.get("/api/runs/{run_id}")
    async def api_run(run_id: str):
        return store.load(run_id).to_dict()

    @app.get("/api/inventory")
    async def api_inventory():
        return inv.to_dict()

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="static")

    return app
