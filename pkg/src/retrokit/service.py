"""Read-only HTTP service: recommendations, attributions, model metadata.

Request bodies are parsed by hand so malformed JSON maps to a clean 400 and
feature problems map to a 422 that names the offending column; the framework
never guesses at coercions.  Handlers take one snapshot of the artifact per
request, so a concurrent hot swap is invisible mid-request.

The payload builders are plain functions over (artifact, features) and are
shared with the command line, which prints the same structures.
"""

from __future__ import annotations

import json
from functools import lru_cache
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .artifact import ModelArtifact, load_model
from .features import EncodingError
from .measures import load_measure_map
from .mlp import forward
from .shapley import shapley_exact, shapley_sampled, waterfall

# Full subset enumeration is exact and still cheap at this width; beyond it
# the cost doubles per feature, so wider inputs fall back to sampling.
EXACT_FEATURE_LIMIT = 16
SAMPLED_PERMUTATIONS = 200


class ServiceError(Exception):
    """Carries an HTTP status and response payload to the handler boundary."""

    def __init__(self, status: int, payload: dict):
        super().__init__(payload.get("error", ""))
        self.status = status
        self.payload = payload


class ArtifactStore:
    """Holder for the served model.

    swap() is a single reference assignment, so every handler sees either
    the previous artifact or the new one in full, never a partial load.
    """

    def __init__(self, artifact: ModelArtifact | None = None):
        self._artifact = artifact

    def get(self) -> ModelArtifact | None:
        return self._artifact

    def swap(self, artifact: ModelArtifact) -> None:
        self._artifact = artifact

    def load(self, path: str | Path) -> ModelArtifact:
        # parse and verify completely before the swap becomes visible
        artifact = load_model(path)
        self.swap(artifact)
        return artifact


@lru_cache(maxsize=1)
def _category_info() -> dict:
    return load_measure_map().describe()


def _display_name(label: str) -> str:
    info = _category_info().get(label)
    return info["display_name"] if info else label


def _description(label: str) -> str:
    info = _category_info().get(label)
    return info["description"] if info else ""


def recommend_payload(artifact: ModelArtifact, features: dict) -> dict:
    """Probabilities and thresholded flags for one request; raises
    EncodingError when the features are unusable."""
    x = artifact.encoder.transform_dict(features)
    probs = forward(artifact.model, x[None, :])[0]
    return {
        "artifact_id": artifact.artifact_id,
        "threshold": artifact.threshold,
        "recommendations": [
            {
                "category": name,
                "display_name": _display_name(name),
                "probability": float(p),
                "recommended": bool(p >= artifact.threshold),
            }
            for name, p in zip(artifact.encoder.label_names, probs)
        ],
    }


def explain_payload(artifact: ModelArtifact, features: dict) -> dict:
    """Per-label attributions with waterfall rows for one request.

    Exact subset enumeration up to EXACT_FEATURE_LIMIT features, permutation
    sampling beyond it.
    """
    x = artifact.encoder.transform_dict(features)
    exact = x.shape[0] <= EXACT_FEATURE_LIMIT
    probs = forward(artifact.model, x[None, :])[0]
    names = artifact.encoder.feature_names
    labels = []
    for j, label in enumerate(artifact.encoder.label_names):
        if exact:
            att = shapley_exact(
                artifact.model,
                x,
                artifact.background,
                j,
                feature_names=names,
                label_name=label,
            )
        else:
            att = shapley_sampled(
                artifact.model,
                x,
                artifact.background,
                j,
                n_permutations=SAMPLED_PERMUTATIONS,
                seed=0,
                feature_names=names,
                label_name=label,
            )
        entry = att.to_dict()
        entry["display_name"] = _display_name(label)
        entry["probability"] = float(probs[j])
        entry["recommended"] = bool(probs[j] >= artifact.threshold)
        entry["waterfall"] = waterfall(att)
        labels.append(entry)
    return {
        "artifact_id": artifact.artifact_id,
        "threshold": artifact.threshold,
        "method": "exact" if exact else "sampled",
        "labels": labels,
    }


def model_info_payload(artifact: ModelArtifact) -> dict:
    """Everything a client form needs to drive the model."""
    encoder = artifact.encoder
    schema = artifact.schema
    features = encoder.describe()
    target = None
    if encoder.delta is not None:
        final_col = encoder.delta.final_col
        classes = next(f["categories"] for f in features if f["name"] == final_col)
        target = {
            "column": final_col,
            "initial_column": encoder.delta.initial_col,
            "classes": classes,
        }
    return {
        "artifact_id": artifact.artifact_id,
        "threshold": artifact.threshold,
        "provenance": artifact.provenance,
        "schema": {
            "id": schema.id,
            "version": schema.version,
            "fingerprint": schema.fingerprint(),
        },
        "features": features,
        "labels": [
            {
                "category": name,
                "display_name": _display_name(name),
                "description": _description(name),
            }
            for name in encoder.label_names
        ],
        "target": target,
        "explanation_method": "exact"
        if encoder.n_features <= EXACT_FEATURE_LIMIT
        else "sampled",
    }


def _parse_body(raw: bytes) -> dict:
    try:
        body = json.loads(raw)
    except (ValueError, UnicodeDecodeError):
        raise ServiceError(400, {"error": "malformed JSON body"})
    if not isinstance(body, dict):
        raise ServiceError(400, {"error": "request body must be a JSON object"})
    return body


def _request_features(body: dict, artifact: ModelArtifact) -> dict:
    features = body.get("features")
    if not isinstance(features, dict):
        raise ServiceError(400, {"error": "body must carry a 'features' object"})
    features = dict(features)
    target = body.get("target_energy_class")
    if target is not None:
        if artifact.encoder.delta is None:
            raise ServiceError(
                422,
                {
                    "error": "this model takes no target energy class",
                    "column": "target_energy_class",
                },
            )
        features[artifact.encoder.delta.final_col] = target
    return features


def _encoding_error(exc: EncodingError) -> ServiceError:
    payload: dict[str, Any] = {"error": str(exc)}
    column = getattr(exc, "column", None)
    if column is not None:
        payload["column"] = column
    return ServiceError(422, payload)


def create_app(
    artifact: ModelArtifact | None = None,
    artifact_path: str | Path | None = None,
) -> FastAPI:
    """Build the service application around an artifact store.

    The store is reachable as app.state.store so an embedding process can
    hot-swap the model; the HTTP surface itself is read-only.
    """
    app = FastAPI(title="retrokit", docs_url=None, redoc_url=None, openapi_url=None)
    store = ArtifactStore(artifact)
    if artifact_path is not None:
        store.load(artifact_path)
    app.state.store = store

    def current() -> ModelArtifact:
        snapshot = store.get()
        if snapshot is None:
            raise ServiceError(503, {"error": "no model loaded"})
        return snapshot

    async def run(request: Request, payload_fn) -> JSONResponse:
        try:
            snapshot = current()
            body = _parse_body(await request.body())
            features = _request_features(body, snapshot)
            try:
                return JSONResponse(payload_fn(snapshot, features))
            except EncodingError as exc:
                raise _encoding_error(exc)
        except ServiceError as exc:
            return JSONResponse(exc.payload, status_code=exc.status)

    @app.post("/recommend")
    async def recommend(request: Request) -> JSONResponse:
        return await run(request, recommend_payload)

    @app.post("/explain")
    async def explain(request: Request) -> JSONResponse:
        return await run(request, explain_payload)

    @app.get("/model/info")
    async def model_info() -> JSONResponse:
        try:
            snapshot = current()
        except ServiceError as exc:
            return JSONResponse(exc.payload, status_code=exc.status)
        return JSONResponse(model_info_payload(snapshot))

    return app
