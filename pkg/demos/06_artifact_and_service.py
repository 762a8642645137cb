"""
One signed file from training to serving
=========================================

Everything inference needs (schema, encoder state, weights, threshold,
background rows, provenance) travels as a single JSON artifact with a
checksum over its canonical form.  The HTTP service loads that file and
answers three questions: what inputs exist, what is recommended, why.
"""

import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from retrokit.artifact import ChecksumError, ModelArtifact, load_model, make_background, save_model
from retrokit.features import DeltaSpec, FeatureEncoder
from retrokit.mlp import MLPConfig, train
from retrokit.schema import SplitSpec, split
from retrokit.service import create_app

from _survey import SCHEMA, build_survey

records = build_survey(300)
parts = split(records, SplitSpec(seed=7))
encoder = FeatureEncoder(
    SCHEMA, delta=DeltaSpec("class_before", "class_after", "area")
).fit(parts.train + parts.val)
model, _ = train(
    encoder.transform(parts.train), encoder.labels(parts.train),
    MLPConfig([32, 16], max_epochs=80, patience=8, seed=0),
    encoder.transform(parts.val), encoder.labels(parts.val),
)

artifact = ModelArtifact(
    schema=SCHEMA,
    encoder=encoder,
    model=model,
    background=make_background(encoder, parts.train, max_rows=64, seed=0),
    threshold=0.5,
    provenance={"data": "real", "rows": len(parts.train) + len(parts.val)},
)

workdir = Path(tempfile.mkdtemp(prefix="retrokit-demo-"))
path = workdir / "model.json"
save_model(artifact, path)
print(f"saved {path.stat().st_size:,} bytes, artifact id {artifact.artifact_id}")

reloaded = load_model(path)
print("reload keeps the id:", reloaded.artifact_id == artifact.artifact_id)

# flip one byte of the stored weights: the load refuses
tampered = workdir / "tampered.json"
text = path.read_text()
needle = '"data": "'
i = text.index(needle, text.index('"weights"')) + len(needle)
tampered.write_text(text[:i] + ("A" if text[i] != "A" else "B") + text[i + 1:])
try:
    load_model(tampered)
except ChecksumError as err:
    print(f"tampered copy rejected: {err}")

# the service is stateless per request; the artifact is the only state
client = TestClient(create_app(artifact=reloaded))

info = client.get("/model/info").json()
print(f"\nGET /model/info -> {len(info['features'])} input controls, "
      f"labels: {[l['category'] for l in info['labels']]}")

building = {
    "area": 310.0,
    "region": "Latgale",
    "class_before": "F",
    "class_after": "A",
    "insulated": False,
}
rec = client.post("/recommend", json={"features": building}).json()
print("\nPOST /recommend")
for row in rec["recommendations"]:
    marker = "->" if row["recommended"] else "  "
    print(f"  {marker} {row['display_name']:<34} {row['probability']:.2f}")

exp = client.post(
    "/explain", json={"features": building, "target_energy_class": "B"}
).json()
first = exp["labels"][0]
print(f"\nPOST /explain (what if the target were class B instead?)")
print(f"  method: {exp['method']}; '{first['display_name']}' now "
      f"{first['probability']:.2f}, waterfall of {len(first['waterfall'])} steps")
