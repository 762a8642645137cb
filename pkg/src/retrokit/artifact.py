"""Self-contained model artifact: one JSON file that fully determines inference.

The document carries the dataset schema (plus its fingerprint), the fitted
feature encoder, the network parameters as base64 little-endian float64
blocks, the decision threshold, background rows for attribution, the energy
class table when the model uses the derived headroom feature, and provenance
notes.  A content checksum detects truncation or edits, and the format
version gates forward compatibility.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .energy import EnergyClassTable
from .features import FeatureEncoder
from .mlp import MLPModel, forward
from .schema import DatasetSchema

FORMAT_VERSION = 1


class ArtifactError(RuntimeError):
    """Artifact cannot be built, written, or read."""


class ChecksumError(ArtifactError):
    """Stored content does not match its checksum (truncated or edited)."""


class VersionError(ArtifactError):
    """Artifact was written by an incompatible format version."""


def _encode_array(arr: np.ndarray) -> dict:
    a = np.asarray(arr, dtype=np.float64)
    return {
        "shape": list(a.shape),
        "data": base64.b64encode(a.astype("<f8").tobytes()).decode("ascii"),
    }


def _decode_array(block: dict) -> np.ndarray:
    raw = base64.b64decode(block["data"])
    return np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(block["shape"])


def make_background(
    encoder: FeatureEncoder, records, max_rows: int = 100, seed: int = 0
) -> np.ndarray:
    """Deterministic subsample of encoded rows for attribution baselines."""
    X = encoder.transform(records, warn_clamp=False)
    if len(X) <= max_rows:
        return X
    idx = np.sort(np.random.default_rng(seed).choice(len(X), size=max_rows, replace=False))
    return X[idx]


@dataclass
class ModelArtifact:
    """Everything inference and explanation need, as one unit."""

    schema: DatasetSchema
    encoder: FeatureEncoder
    model: MLPModel
    background: np.ndarray
    threshold: float = 0.5
    energy_table: EnergyClassTable | None = None
    train_config: dict | None = None
    hpo_summary: dict | None = None
    provenance: dict = field(default_factory=lambda: {"data": "real"})

    def __post_init__(self) -> None:
        if not self.encoder.fitted:
            raise ArtifactError("artifact needs a fitted encoder")
        if self.model.input_dim != self.encoder.n_features:
            raise ArtifactError(
                f"model expects {self.model.input_dim} features, "
                f"encoder produces {self.encoder.n_features}"
            )
        self.background = np.asarray(self.background, dtype=np.float64)
        if self.background.ndim != 2 or self.background.shape[1] != self.model.input_dim:
            raise ArtifactError("background rows must match the model input width")
        if len(self.background) == 0:
            raise ArtifactError("artifact needs at least one background row")
        if not (0.0 <= self.threshold <= 1.0):
            raise ArtifactError("threshold must be within [0, 1]")
        # a delta-deriving encoder depends on its class table, so the table
        # must travel inside the artifact or reconstruction would drift
        if self.encoder.delta is not None and self.energy_table is None:
            self.energy_table = self.encoder.energy_table

    @property
    def artifact_id(self) -> str:
        return _payload_checksum(self._payload())[:12]

    @property
    def label_names(self) -> list[str]:
        return self.encoder.label_names

    def predict(self, features: dict) -> tuple[np.ndarray, list[bool]]:
        """Probabilities and thresholded recommendations for one request."""
        x = self.encoder.transform_dict(features)
        probs = forward(self.model, x)
        return probs, [bool(p >= self.threshold) for p in probs]

    def _payload(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "schema": self.schema.to_dict(),
            "schema_fingerprint": self.schema.fingerprint(),
            "encoder": self.encoder.to_dict(),
            "model": {
                "weights": [_encode_array(w) for w in self.model.weights],
                "biases": [_encode_array(b) for b in self.model.biases],
            },
            "background": _encode_array(self.background),
            "threshold": self.threshold,
            "energy_table": None if self.energy_table is None else self.energy_table.to_dict(),
            "train_config": self.train_config,
            "hpo_summary": self.hpo_summary,
            "provenance": self.provenance,
        }


def _payload_checksum(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def save_model(artifact: ModelArtifact, path: str | Path) -> Path:
    """Write atomically: the file never holds a half-written artifact."""
    path = Path(path)
    payload = artifact._payload()
    doc = dict(payload)
    doc["checksum"] = _payload_checksum(payload)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(doc, indent=1), encoding="utf-8")
    os.replace(tmp, path)
    return path


def load_model(path: str | Path) -> ModelArtifact:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ChecksumError(f"artifact file is truncated or corrupt: {exc}") from exc
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise ArtifactError("not a model artifact document")
    if doc["format_version"] != FORMAT_VERSION:
        raise VersionError(
            f"artifact format version {doc['format_version']} is not supported "
            f"(this build reads version {FORMAT_VERSION})"
        )
    stored_sum = doc.pop("checksum", None)
    if stored_sum is None:
        raise ChecksumError("artifact has no checksum")
    actual = _payload_checksum(doc)
    if actual != stored_sum:
        raise ChecksumError("artifact checksum mismatch; file was edited or truncated")

    try:
        schema = DatasetSchema.from_dict(doc["schema"])
        if schema.fingerprint() != doc["schema_fingerprint"]:
            raise ArtifactError("schema fingerprint mismatch inside artifact")
        energy_table = (
            None
            if doc["energy_table"] is None
            else EnergyClassTable.from_dict(doc["energy_table"])
        )
        encoder = FeatureEncoder.from_dict(schema, doc["encoder"], energy_table=energy_table)
        model = MLPModel(
            [_decode_array(b) for b in doc["model"]["weights"]],
            [_decode_array(b) for b in doc["model"]["biases"]],
        )
        return ModelArtifact(
            schema=schema,
            encoder=encoder,
            model=model,
            background=_decode_array(doc["background"]),
            threshold=float(doc["threshold"]),
            energy_table=energy_table,
            train_config=doc.get("train_config"),
            hpo_summary=doc.get("hpo_summary"),
            provenance=doc.get("provenance") or {"data": "real"},
        )
    except KeyError as exc:
        raise ArtifactError(f"artifact is missing field {exc}") from exc
