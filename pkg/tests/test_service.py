"""HTTP API surface: routes, payloads, and the error-code contract."""

import json

import pytest
from fastapi.testclient import TestClient

from portal_agent.inventory import load_default_inventory
from portal_agent.pipeline import RunStore, bundled_scenarios
from portal_agent.renderer import parse_html, serialize
from portal_agent.service import ERROR_STATUS, create_app


@pytest.fixture()
def client(tmp_path):
    app = create_app(store=RunStore(tmp_path / "runs"))
    with TestClient(app) as c:
        yield c


def post(client, path, body):
    return client.post(path, content=json.dumps(body),
                       headers={"content-type": "application/json"})


class TestGenerate:
    def test_by_scenario_id(self, client):
        r = post(client, "/api/generate", {"scenario_id": "analytics-sales"})
        assert r.status_code == 200
        body = r.json()
        assert body["report"]["ok"] is True
        assert body["composition"]["template"] == "dashboard.analytics.v1"
        assert body["intent"]["scenario_id"] == "analytics-sales"
        assert body["trace"]["backend"] == "rule_based"

    def test_by_inline_scenario(self, client, scenarios):
        r = post(client, "/api/generate", {"scenario": scenarios["board-delivery"]})
        assert r.status_code == 200
        assert r.json()["composition"]["template"] == "board.kanban.v1"

    def test_by_description(self, client):
        r = post(client, "/api/generate", {"description": "Kanban board for chores"})
        assert r.status_code == 200
        body = r.json()
        assert body["intent"]["scenario_id"] == "adhoc"
        assert body["composition"]["template"] == "board.kanban.v1"

    def test_composition_is_canonical(self, client):
        r = post(client, "/api/generate", {"scenario_id": "analytics-sales"})
        comps = r.json()["composition"]["components"]
        slots = [c["slot"] for c in comps]
        assert slots == sorted(slots)

    def test_unknown_scenario_id(self, client):
        r = post(client, "/api/generate", {"scenario_id": "ghost"})
        assert r.status_code == 400
        assert r.json()["error"]["code"] == "ParseError"

    def test_empty_body(self, client):
        r = post(client, "/api/generate", {})
        assert r.status_code == 400

    def test_non_object_body(self, client):
        r = client.post("/api/generate", content="[]",
                        headers={"content-type": "application/json"})
        assert r.status_code == 400
        assert r.json()["error"]["code"] == "ParseError"

    def test_rule_backend_alias(self, client):
        r = post(client, "/api/generate",
                 {"scenario_id": "portal-news", "backend": "rule"})
        assert r.status_code == 200

    def test_unknown_backend(self, client):
        r = post(client, "/api/generate",
                 {"scenario_id": "portal-news", "backend": "psychic"})
        assert r.status_code == 400

    def test_remote_backend_without_endpoint_is_502(self, client, monkeypatch):
        monkeypatch.delenv("PORTAL_AGENT_LLM_ENDPOINT", raising=False)
        r = post(client, "/api/generate",
                 {"scenario_id": "portal-news", "backend": "remote"})
        assert r.status_code == 502
        assert r.json()["error"]["code"] == "EndpointError"


class TestRender:
    def composition(self, client):
        return post(client, "/api/generate",
                    {"scenario_id": "analytics-sales"}).json()["composition"]

    def test_round_trip(self, client):
        composition = self.composition(client)
        r = post(client, "/api/render", {"composition": composition})
        assert r.status_code == 200
        body = r.json()
        assert body["stats"]["node_count"] == 30
        assert body["stats"]["total_render_weight"] == 12
        assert body["stats"]["max_depth"] == 6
        assert serialize(parse_html(body["html"])) == body["html"]

    def test_bare_composition_body(self, client):
        # The composition may be the whole body instead of nested.
        composition = self.composition(client)
        r = post(client, "/api/render", composition)
        assert r.status_code == 200

    def test_deterministic(self, client):
        composition = self.composition(client)
        first = post(client, "/api/render", {"composition": composition}).json()
        second = post(client, "/api/render", {"composition": composition}).json()
        assert first["html"] == second["html"]

    def test_invalid_composition_422_with_violations(self, client):
        bad = {
            "template": "dashboard.analytics.v1",
            "components": [
                {"id": "x", "type": "Carousel3D", "slot": "body.content", "props": {}}
            ],
        }
        r = post(client, "/api/render", {"composition": bad})
        assert r.status_code == 422
        err = r.json()["error"]
        assert err["code"] == "InvalidComposition"
        assert err["violations"][0]["code"] == "UnknownComponentType"

    def test_malformed_composition_400(self, client):
        r = post(client, "/api/render", {"composition": {"components": []}})
        assert r.status_code == 400
        assert r.json()["error"]["code"] == "ParseError"


class TestEvaluate:
    def test_scores_posted_page(self, client):
        composition = post(client, "/api/generate",
                           {"scenario_id": "analytics-sales"}).json()["composition"]
        html = post(client, "/api/render", {"composition": composition}).json()["html"]
        r = post(client, "/api/evaluate",
                 {"scenario_id": "analytics-sales", "html": html})
        assert r.status_code == 200
        body = r.json()
        assert body["autoscore"] == 1.0
        assert body["diffs"] == []
        assert set(body["subscores"]) == {"cov", "prop", "data", "layout", "a11y", "perf"}

    def test_external_page_scored(self, client):
        # Any page with the data-* vocabulary can be scored, not only ours.
        html = (
            '<main data-role="template-root" data-template="x">'
            '<section data-role="slot" data-slot="s" data-slot-category="kpis">'
            '<article aria-label="t" data-a11y-required="aria-label"'
            ' data-component-categories="kpis" data-component-id="k1"'
            ' data-component-type="KpiCard" data-role="kpi-card"></article>'
            "</section></main>\n"
        )
        r = post(client, "/api/evaluate",
                 {"scenario": {"scenario_id": "adhoc", "description": "one kpi"},
                  "html": html})
        assert r.status_code == 200
        assert r.json()["subscores"]["cov"] == 1.0

    def test_missing_html(self, client):
        r = post(client, "/api/evaluate", {"scenario_id": "analytics-sales"})
        assert r.status_code == 400

    def test_junk_html(self, client):
        r = post(client, "/api/evaluate",
                 {"scenario_id": "analytics-sales", "html": "no tags"})
        assert r.status_code == 400
        assert r.json()["error"]["code"] == "ParseError"


class TestPipelineRoute:
    def test_runs_and_persists(self, client):
        r = post(client, "/api/pipeline", {"scenario_id": "board-triage"})
        assert r.status_code == 200
        record = r.json()
        assert record["autoscore"] == 0.8333333333333333
        assert record["rubric"]["overall_verdict"] == "pass"

        listing = client.get("/api/runs").json()["runs"]
        assert [e["run_id"] for e in listing] == [record["run_id"]]

        fetched = client.get(f"/api/runs/{record['run_id']}")
        assert fetched.status_code == 200
        assert fetched.json() == record

    def test_missing_run_404(self, client):
        r = client.get("/api/runs/doesnotexist")
        assert r.status_code == 404
        assert r.json()["error"]["code"] == "RunNotFound"


class TestCatalogRoutes:
    def test_scenarios_listing(self, client):
        r = client.get("/api/scenarios")
        ids = [s["scenario_id"] for s in r.json()["scenarios"]]
        assert ids == [d["scenario_id"] for d in bundled_scenarios()]

    def test_inventory_round_trips(self, client):
        from portal_agent.inventory import load_inventory

        r = client.get("/api/inventory")
        assert r.status_code == 200
        assert load_inventory(json.dumps(r.json())) == load_default_inventory()


class TestErrorContract:
    def test_status_map_is_total_over_codes(self):
        from portal_agent import errors

        mapped = set(ERROR_STATUS)
        for name in dir(errors):
            obj = getattr(errors, name)
            if isinstance(obj, type) and issubclass(obj, errors.PortalAgentError):
                code = getattr(obj, "code", None)
                if code and code != "InternalError":
                    assert code in mapped, code

    def test_custom_scenarios_config(self, tmp_path):
        docs = [{"scenario_id": "only-one", "description": "a board"}]
        app = create_app(store=RunStore(tmp_path / "runs"), scenario_docs=docs)
        with TestClient(app) as c:
            assert [s["scenario_id"] for s in c.get("/api/scenarios").json()["scenarios"]] == [
                "only-one"
            ]
            assert post(c, "/api/generate", {"scenario_id": "only-one"}).status_code == 200

    def test_static_mount(self, tmp_path):
        static = tmp_path / "static"
        static.mkdir()
        (static / "index.html").write_text("<!doctype html><title>playground</title>")
        app = create_app(store=RunStore(tmp_path / "runs"), static_dir=static)
        with TestClient(app) as c:
            r = c.get("/")
            assert r.status_code == 200
            assert "playground" in r.text
