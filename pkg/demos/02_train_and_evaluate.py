"""
Training the multi-label measure classifier
============================================

One network, four sigmoid outputs: each retrofit category is its own
yes/no decision, and a single building can need several at once.  The
derived headroom feature gives the model the regulation's own view of
how demanding the planned class jump is.
"""

import numpy as np

from retrokit.features import DeltaSpec, FeatureEncoder
from retrokit.metrics import evaluate_multilabel
from retrokit.mlp import MLPConfig, forward, train
from retrokit.schema import SplitSpec, split

from _survey import SCHEMA, build_survey

records = build_survey(300)
parts = split(records, SplitSpec(seed=7))

# fit the encoder on train+val only; the test partition stays unseen
encoder = FeatureEncoder(
    SCHEMA, delta=DeltaSpec("class_before", "class_after", "area")
).fit(parts.train + parts.val)
print("model inputs:", ", ".join(f["name"] for f in encoder.describe()),
      "+ energy_class_delta")

config = MLPConfig(layer_sizes=[32, 16], learning_rate=1e-3,
                   batch_size=32, max_epochs=120, patience=10, seed=0)
model, report = train(
    encoder.transform(parts.train), encoder.labels(parts.train),
    config,
    encoder.transform(parts.val), encoder.labels(parts.val),
)
print(f"stopped after epoch {report.stopped_epoch} "
      f"(best validation loss {report.val_losses[report.best_epoch - 1]:.4f} "
      f"at epoch {report.best_epoch})")

probs = forward(model, encoder.transform(parts.test, warn_clamp=False))
result = evaluate_multilabel(
    encoder.labels(parts.test), probs, encoder.label_names, threshold=0.5
)

print()
print(f"{'label':<32} {'precision':>9} {'recall':>7} {'f1':>6} {'accuracy':>9}")
for row in result["per_label"]:
    print(f"{row['label']:<32} {row['precision']:9.3f} {row['recall']:7.3f} "
          f"{row['f1']:6.3f} {row['accuracy']:9.3f}")
m = result["macro"]
print(f"{'macro':<32} {m['precision']:9.3f} {m['recall']:7.3f} "
      f"{m['f1']:6.3f} {m['accuracy']:9.3f}")

rare = min(result["per_label"], key=lambda r: r["recall"])
if rare["recall"] < 0.5:
    print(f"\nnote the starved label ({rare['label']}: recall {rare['recall']:.2f});")
    print("05_generate_and_quality.py shows how balanced synthetic rows fix this")

# the probabilities themselves are the product: a planner reads them as
# how confidently each measure belongs in this building's renovation
sample = parts.test[0]
print()
print("one building:", {k: sample[k] for k in ("area", "class_before", "class_after")})
for name, p in zip(encoder.label_names, probs[0]):
    marker = "->" if p >= 0.5 else "  "
    print(f"  {marker} {name:<32} {p:5.2f}")
