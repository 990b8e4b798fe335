"""FastAPI app exposing the classifier wire protocol.

POST /classify  {"text": "..."}  ->  {"label": "...", "probs": {...}}
GET  /health                     ->  {"model": "...", "labels": [...]}

Malformed JSON is a 400, oversized bodies are a 413; responses are UTF-8
JSON with HTTP 200 on success, matching the engine-side schema bit for bit.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .config import ServerConfig
from .inference import SentimentModel


def create_app(config: ServerConfig,
               model: SentimentModel | None = None) -> FastAPI:
    model = model or SentimentModel(config.model, config.device)
    app = FastAPI(title="classifier shim", docs_url=None, redoc_url=None)
    app.state.model = model
    app.state.config = config

    @app.get("/health")
    async def health():
        return {"model": model.model_id, "labels": model.labels}

    @app.post("/classify")
    async def classify(request: Request):
        body = await request.body()
        if len(body) > config.max_body_bytes:
            return JSONResponse({"error": "request body too large"},
                                status_code=413)
        try:
            payload = json.loads(body)
        except json.JSONDecodeError:
            return JSONResponse({"error": "malformed JSON body"},
                                status_code=400)
        if not isinstance(payload, dict) or \
                not isinstance(payload.get("text"), str) or not payload["text"]:
            return JSONResponse(
                {"error": "body must be {\"text\": <non-empty string>}"},
                status_code=400)
        return model.classify(payload["text"])

    return app
