"""
Hyperparameter search with pruning
===================================

The tuner samples architectures from discrete choice sets, warms up
uniformly, then steers further draws toward the configurations whose
validation losses landed in the best quartile.  Trials that trail the
median of their peers at the same epoch are cut early, so the budget
concentrates on promising shapes instead of finishing every loser.
"""

from retrokit.features import DeltaSpec, FeatureEncoder
from retrokit.schema import SplitSpec, split
from retrokit.tuning import SearchSpace, optimize

from _survey import SCHEMA, build_survey

records = build_survey(300)
parts = split(records, SplitSpec(seed=7))
encoder = FeatureEncoder(
    SCHEMA, delta=DeltaSpec("class_before", "class_after", "area")
).fit(parts.train + parts.val)

# a compact space keeps the demo quick; the defaults are wider
space = SearchSpace(
    n_layers_choices=(1, 2),
    layer_size_choices=(16, 32, 64),
    learning_rate_choices=(1e-3, 1e-2),
    batch_size_choices=(32, 64),
)

best, trials = optimize(
    encoder.transform(parts.train), encoder.labels(parts.train),
    encoder.transform(parts.val), encoder.labels(parts.val),
    space=space, n_trials=12, seed=3, max_epochs=40, patience=6,
)

print(f"{'trial':>5} {'status':<9} {'layers':<16} {'lr':>7} {'batch':>5} {'val loss':>9}")
for t in trials:
    value = f"{t.final_value:.4f}" if t.final_value is not None else "-"
    note = f"pruned@{t.pruned_step}" if t.status == "pruned" else t.status
    print(f"{t.id:>5} {note:<9} {str(t.config.layer_sizes):<16} "
          f"{t.config.learning_rate:>7.0e} {t.config.batch_size:>5} {value:>9}")

pruned = sum(1 for t in trials if t.status == "pruned")
print(f"\n{pruned} of {len(trials)} trials pruned before finishing")
print(f"winner: layers {best.layer_sizes}, lr {best.learning_rate:g}, "
      f"batch {best.batch_size}")
print("the winning config feeds straight into training (the CLI wires the"
      " two commands together through a JSON file)")
