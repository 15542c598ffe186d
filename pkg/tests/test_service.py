import json

import pytest
from fastapi.testclient import TestClient

from nl2query.checkpoint import save_checkpoint
from nl2query.server import create_app


@pytest.fixture(scope="module")
def service(tmp_path_factory, graph_schema_text, overfit):
    records, ckpt, _ = overfit
    root = tmp_path_factory.mktemp("service")
    schema_path = root / "schema.json"
    schema_path.write_text(graph_schema_text, encoding="utf-8")
    ckpt_path = root / "model.ckpt"
    save_checkpoint(ckpt, ckpt_path)
    app = create_app(ckpt_path, schema_path)
    with TestClient(app) as client:
        yield client, records


@pytest.fixture(scope="module")
def modelless_service(tmp_path_factory, graph_schema_text):
    root = tmp_path_factory.mktemp("modelless")
    schema_path = root / "schema.json"
    schema_path.write_text(graph_schema_text, encoding="utf-8")
    app = create_app(None, schema_path)
    with TestClient(app) as client:
        yield client


class TestSchemaEndpoint:
    def test_descriptor_and_stats(self, service, graph_schema_text):
        client, _ = service
        resp = client.get("/v1/schema")
        assert resp.status_code == 200
        body = resp.json()
        assert body["descriptor"] == json.loads(graph_schema_text)
        assert body["stats"]["class_count"] == 5
        assert body["stats"]["edge_count"] == 5

    def test_byte_stable_across_calls(self, service):
        client, _ = service
        assert client.get("/v1/schema").content == client.get("/v1/schema").content

    def test_cors_header_for_browser_clients(self, service):
        client, _ = service
        resp = client.get("/v1/schema", headers={"Origin": "http://localhost:5173"})
        assert resp.headers.get("access-control-allow-origin") == "*"


class TestPredictEndpoint:
    def test_memorized_question_comes_back_first(self, service):
        client, records = service
        for record in records[:3]:
            resp = client.post(
                "/v1/predict", json={"question": record.source, "k": 5}
            )
            assert resp.status_code == 200
            body = resp.json()
            assert body["candidates"], record.source
            top = body["candidates"][0]
            assert top["target"] == record.target
            assert set(top) == {"query_graph", "score", "paraphrase", "target"}
            assert isinstance(top["score"], float)
            assert top["paraphrase"]

    def test_candidate_count_bounded_by_k(self, service):
        client, records = service
        resp = client.post("/v1/predict", json={"question": records[0].source, "k": 3})
        assert resp.status_code == 200
        body = resp.json()
        assert 1 <= len(body["candidates"]) + body["failures"] <= 3

    def test_query_graph_is_service_document(self, service):
        client, records = service
        resp = client.post("/v1/predict", json={"question": records[0].source, "k": 1})
        doc = resp.json()["candidates"][0]["query_graph"]
        assert set(doc) == {"select", "constraints", "joins"}
        assert all("." in path for path in doc["select"])

    def test_missing_question_rejected(self, service):
        client, _ = service
        assert client.post("/v1/predict", json={"k": 3}).status_code == 400

    def test_blank_question_rejected(self, service):
        client, _ = service
        resp = client.post("/v1/predict", json={"question": "   "})
        assert resp.status_code == 400

    @pytest.mark.parametrize("k", [0, 11, "3", 2.5, True])
    def test_bad_k_rejected(self, service, k):
        client, _ = service
        resp = client.post("/v1/predict", json={"question": "show title", "k": k})
        assert resp.status_code == 400

    def test_non_object_body_rejected(self, service):
        client, _ = service
        resp = client.post("/v1/predict", json=["question"])
        assert resp.status_code == 400

    def test_malformed_json_rejected(self, service):
        client, _ = service
        resp = client.post(
            "/v1/predict",
            content=b"{not json",
            headers={"content-type": "application/json"},
        )
        assert resp.status_code == 400

    def test_exhausted_time_budget_means_504(
        self, tmp_path, graph_schema_text, overfit
    ):
        records, ckpt, _ = overfit
        schema_path = tmp_path / "schema.json"
        schema_path.write_text(graph_schema_text, encoding="utf-8")
        ckpt_path = tmp_path / "model.ckpt"
        save_checkpoint(ckpt, ckpt_path)
        app = create_app(ckpt_path, schema_path, predict_timeout_seconds=0.0)
        with TestClient(app) as client:
            resp = client.post(
                "/v1/predict", json={"question": records[0].source, "k": 1}
            )
        assert resp.status_code == 504

    def test_no_model_means_503(self, modelless_service):
        resp = modelless_service.post(
            "/v1/predict", json={"question": "show title in movie"}
        )
        assert resp.status_code == 503

    def test_schema_still_served_without_model(self, modelless_service):
        assert modelless_service.get("/v1/schema").status_code == 200


class TestTranslateEndpoint:
    DOC = {
        "select": ["movie.title", "person.fullname"],
        "constraints": [{"path": "movie.runtime", "op": ">", "value": "@value"}],
        "joins": ["movie.director_id.person"],
    }

    def test_sql(self, service):
        client, _ = service
        resp = client.post(
            "/v1/translate", json={"dialect": "sql", "query_graph": self.DOC}
        )
        assert resp.status_code == 200
        text = resp.json()["query_text"]
        assert text.startswith("SELECT ")
        assert "INNER JOIN person ON movie.director_id = person.id" in text
        assert "movie.runtime > @value" in text

    def test_cypher(self, service):
        client, _ = service
        resp = client.post(
            "/v1/translate", json={"dialect": "cypher", "query_graph": self.DOC}
        )
        assert resp.status_code == 200
        text = resp.json()["query_text"]
        assert text.startswith("MATCH ")
        assert "$value" in text

    def test_service_round_trip(self, service):
        client, _ = service
        resp = client.post(
            "/v1/translate", json={"dialect": "service", "query_graph": self.DOC}
        )
        assert resp.status_code == 200
        assert json.loads(resp.json()["query_text"]) == self.DOC

    def test_unknown_dialect_rejected(self, service):
        client, _ = service
        resp = client.post(
            "/v1/translate", json={"dialect": "mongo", "query_graph": self.DOC}
        )
        assert resp.status_code == 400

    def test_non_dict_document_rejected(self, service):
        client, _ = service
        resp = client.post(
            "/v1/translate", json={"dialect": "sql", "query_graph": "movie"}
        )
        assert resp.status_code == 400

    def test_unknown_class_rejected(self, service):
        client, _ = service
        doc = {"select": ["ghost.title"], "constraints": [], "joins": []}
        resp = client.post(
            "/v1/translate", json={"dialect": "sql", "query_graph": doc}
        )
        assert resp.status_code == 400
        assert "ghost" in resp.json()["detail"]

    def test_unknown_join_rejected(self, service):
        client, _ = service
        doc = {
            "select": ["movie.title"],
            "constraints": [],
            "joins": ["movie.nonsense.person"],
        }
        resp = client.post(
            "/v1/translate", json={"dialect": "sql", "query_graph": doc}
        )
        assert resp.status_code == 400

    def test_predict_then_translate_round_trip(self, service):
        client, records = service
        predicted = client.post(
            "/v1/predict", json={"question": records[1].source, "k": 1}
        ).json()
        doc = predicted["candidates"][0]["query_graph"]
        resp = client.post(
            "/v1/translate", json={"dialect": "sql", "query_graph": doc}
        )
        assert resp.status_code == 200
        assert resp.json()["query_text"].startswith("SELECT ")
