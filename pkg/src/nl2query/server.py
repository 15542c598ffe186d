"""HTTP service exposing schema browsing, prediction, and translation.

All state (checkpoint, schema) is loaded at startup; request handling is
read-only, so concurrent identical requests return identical bodies.
Endpoints are versioned under ``/v1/`` and JSON throughout:

* ``GET  /v1/schema``     -> full descriptor plus summary statistics
* ``POST /v1/predict``    -> ranked query-graph candidates for a question
* ``POST /v1/translate``  -> one candidate rendered in a chosen dialect
"""

from __future__ import annotations

import asyncio
import json
import pathlib

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware

from . import emit
from .checkpoint import Checkpoint, build_model, load_checkpoint
from .decoding import predict_query_graphs
from .querygraph import validate_query_graph
from .schema import SchemaGraph, parse_schema_descriptor, schema_stats

MAX_K = 10


def create_app(
    checkpoint_path: str | pathlib.Path | None,
    schema_path: str | pathlib.Path,
    predict_timeout_seconds: float = 30.0,
) -> FastAPI:
    """Build the service around one checkpoint and one schema.

    ``checkpoint_path`` may be None, in which case ``/v1/predict`` answers
    503 until the service is restarted with a model.  Beam decoding runs
    in a worker thread so slow predictions neither block other requests
    nor run past ``predict_timeout_seconds`` (answered with 504).
    """
    schema_text = pathlib.Path(schema_path).read_text(encoding="utf-8")
    schema: SchemaGraph = parse_schema_descriptor(schema_text)
    ckpt: Checkpoint | None = None
    model = None
    if checkpoint_path is not None:
        ckpt = load_checkpoint(checkpoint_path)
        model = build_model(ckpt)

    stats = schema_stats(schema)
    schema_body = {
        "descriptor": json.loads(schema_text),
        "stats": {
            "class_count": stats.class_count,
            "total_attributes": stats.total_attributes,
            "unique_attributes": stats.unique_attributes,
            "edge_count": stats.edge_count,
        },
    }

    app = FastAPI(title="nl2query service", version="1")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )

    @app.get("/v1/schema")
    def get_schema() -> dict:
        return schema_body

    @app.post("/v1/predict")
    async def post_predict(request: Request) -> dict:
        body = await _json_body(request)
        question = body.get("question")
        k = body.get("k", 5)
        if not isinstance(question, str) or not question.strip():
            raise HTTPException(400, "question must be a nonempty string")
        if not isinstance(k, int) or isinstance(k, bool) or not 1 <= k <= MAX_K:
            raise HTTPException(400, f"k must be an integer in 1..{MAX_K}")
        if ckpt is None:
            raise HTTPException(503, "no model checkpoint loaded")
        loop = asyncio.get_running_loop()
        try:
            result = await asyncio.wait_for(
                loop.run_in_executor(
                    None,
                    lambda: predict_query_graphs(
                        question, ckpt, schema, k, model=model
                    ),
                ),
                timeout=predict_timeout_seconds,
            )
        except asyncio.TimeoutError:
            raise HTTPException(
                504, f"prediction exceeded {predict_timeout_seconds:g}s"
            ) from None
        return {
            "candidates": [
                {
                    "query_graph": emit.to_service_query(c.query, schema),
                    "score": c.score,
                    "paraphrase": emit.paraphrase(c.query),
                    "target": c.target,
                }
                for c in result.candidates
            ],
            "failures": len(result.failures),
        }

    @app.post("/v1/translate")
    async def post_translate(request: Request) -> dict:
        body = await _json_body(request)
        dialect = body.get("dialect")
        if dialect not in ("sql", "cypher", "service"):
            raise HTTPException(400, f"unknown dialect {dialect!r}")
        doc = body.get("query_graph")
        if not isinstance(doc, dict):
            raise HTTPException(400, "query_graph must be a service query document")
        try:
            query = emit.from_service_query(doc, schema)
            validate_query_graph(query, schema)
            if dialect == "sql":
                text = emit.to_sql(query, schema)
            elif dialect == "cypher":
                text = emit.to_cypher(query, schema)
            else:
                text = json.dumps(emit.to_service_query(query, schema), indent=2)
        except (emit.EmissionError, ValueError, KeyError) as exc:
            raise HTTPException(400, f"invalid query document: {exc}") from exc
        return {"query_text": text}

    return app


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except json.JSONDecodeError as exc:
        raise HTTPException(400, f"request body is not valid JSON: {exc}") from exc
    if not isinstance(body, dict):
        raise HTTPException(400, "request body must be a JSON object")
    return body
