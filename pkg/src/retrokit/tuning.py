"""Hyperparameter search: TPE sampling over a discrete space, median pruning.

The sampler is a univariate tree-structured Parzen estimator over finite
choice sets.  After a uniform warm-up, completed trials are split into a
"good" best-quantile and a "bad" rest; each parameter is then drawn by
sampling candidates from the good empirical density l(x) (add-one smoothed)
and keeping the candidate with the largest l(x)/g(x) ratio.  Parameters are
modeled independently; hidden-layer sizes are per-position parameters that
only exist for trials deep enough to have that position.

The pruner kills a running trial at an epoch when at least ``min_trials``
completed trials have reported a loss at that epoch and the trial is strictly
worse than their median.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .mlp import MLPConfig, TrainingError, train

N_STARTUP = 10
GOOD_QUANTILE = 0.25
N_CANDIDATES = 24
MIN_TRIALS_AT_STEP = 5


class TuningError(RuntimeError):
    """Search cannot produce a winner (e.g. everything was pruned)."""


class _Pruned(Exception):
    """Internal control flow: raised inside the epoch callback."""

    def __init__(self, step: int):
        self.step = step


@dataclass(frozen=True)
class SearchSpace:
    """Discrete choice sets; defaults are the model's tuning table."""

    n_layers_choices: tuple[int, ...] = (2, 3, 4, 5, 6)
    layer_size_choices: tuple[int, ...] = (32, 64, 128, 256, 512)
    learning_rate_choices: tuple[float, ...] = (1e-4, 1e-3, 1e-2)
    batch_size_choices: tuple[int, ...] = (16, 32, 64, 128)

    def __post_init__(self) -> None:
        for name in (
            "n_layers_choices",
            "layer_size_choices",
            "learning_rate_choices",
            "batch_size_choices",
        ):
            choices = getattr(self, name)
            if not choices or len(set(choices)) != len(choices):
                raise ValueError(f"{name} must be a non-empty set of distinct values")
        if any(n < 1 for n in self.n_layers_choices):
            raise ValueError("layer counts must be positive")
        if any(s < 1 for s in self.layer_size_choices):
            raise ValueError("layer sizes must be positive")
        if any(lr <= 0 for lr in self.learning_rate_choices):
            raise ValueError("learning rates must be positive")
        if any(b < 1 for b in self.batch_size_choices):
            raise ValueError("batch sizes must be positive")


@dataclass
class Trial:
    """One sampled config and what happened to it."""

    id: int
    config: MLPConfig
    intermediate: list[tuple[int, float]] = field(default_factory=list)
    status: str = "running"  # running | pruned | complete
    final_value: float | None = None
    pruned_step: int | None = None

    def loss_at(self, step: int) -> float | None:
        for s, v in self.intermediate:
            if s == step:
                return v
        return None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "status": self.status,
            "final_value": self.final_value,
            "pruned_step": self.pruned_step,
            "config": {
                "layer_sizes": list(self.config.layer_sizes),
                "learning_rate": self.config.learning_rate,
                "batch_size": self.config.batch_size,
                "seed": self.config.seed,
            },
            "intermediate": [[s, v] for s, v in self.intermediate],
        }


def write_trial_log(trials: list[Trial], path: str | Path) -> None:
    """One JSON document per line, in trial order."""
    with open(path, "w", encoding="utf-8") as fh:
        for t in trials:
            fh.write(json.dumps(t.to_dict()) + "\n")


def _tpe_pick(
    choices: list, good_values: list, bad_values: list, rng: np.random.Generator
):
    """Draw candidates from the smoothed good density, keep the best l/g ratio."""
    k = len(choices)
    if k == 1:
        return choices[0]
    good_counts = np.array([sum(1 for v in good_values if v == c) for c in choices], dtype=float)
    bad_counts = np.array([sum(1 for v in bad_values if v == c) for c in choices], dtype=float)
    l_density = (good_counts + 1.0) / (len(good_values) + k)
    g_density = (bad_counts + 1.0) / (len(bad_values) + k)
    candidate_idx = rng.choice(k, size=N_CANDIDATES, p=l_density)
    ratios = l_density[candidate_idx] / g_density[candidate_idx]
    return choices[int(candidate_idx[int(np.argmax(ratios))])]


def _uniform_config(space: SearchSpace, rng: np.random.Generator) -> dict:
    n_layers = int(rng.choice(space.n_layers_choices))
    return {
        "layer_sizes": [int(rng.choice(space.layer_size_choices)) for _ in range(n_layers)],
        "learning_rate": float(rng.choice(space.learning_rate_choices)),
        "batch_size": int(rng.choice(space.batch_size_choices)),
    }


def suggest(history: list[Trial], space: SearchSpace, rng_seed: int) -> dict:
    """Sample the next parameter set (as plain values, not yet an MLPConfig).

    Uniform during warm-up (fewer than N_STARTUP past trials, or fewer than
    two completed ones); TPE afterwards.
    """
    rng = np.random.default_rng(rng_seed)
    completed = sorted(
        (t for t in history if t.status == "complete" and t.final_value is not None),
        key=lambda t: (t.final_value, t.id),
    )
    if len(history) < N_STARTUP or len(completed) < 2:
        return _uniform_config(space, rng)

    n_good = max(1, math.ceil(GOOD_QUANTILE * len(completed)))
    good, bad = completed[:n_good], completed[n_good:]

    def values(trials: list[Trial], getter) -> list:
        return [getter(t) for t in trials if getter(t) is not None]

    n_layers = _tpe_pick(
        list(space.n_layers_choices),
        values(good, lambda t: len(t.config.layer_sizes)),
        values(bad, lambda t: len(t.config.layer_sizes)),
        rng,
    )
    layer_sizes = []
    for pos in range(n_layers):

        def size_at(t: Trial, pos=pos):
            return t.config.layer_sizes[pos] if len(t.config.layer_sizes) > pos else None

        layer_sizes.append(
            _tpe_pick(
                list(space.layer_size_choices),
                values(good, size_at),
                values(bad, size_at),
                rng,
            )
        )
    learning_rate = _tpe_pick(
        list(space.learning_rate_choices),
        values(good, lambda t: t.config.learning_rate),
        values(bad, lambda t: t.config.learning_rate),
        rng,
    )
    batch_size = _tpe_pick(
        list(space.batch_size_choices),
        values(good, lambda t: t.config.batch_size),
        values(bad, lambda t: t.config.batch_size),
        rng,
    )
    return {
        "layer_sizes": [int(s) for s in layer_sizes],
        "learning_rate": float(learning_rate),
        "batch_size": int(batch_size),
    }


def should_prune(
    trial: Trial, step: int, history: list[Trial], min_trials: int = MIN_TRIALS_AT_STEP
) -> bool:
    """Median rule: strictly worse than the median of completed trials' losses
    at this step, once at least ``min_trials`` of them reported that step."""
    current = trial.loss_at(step)
    if current is None:
        return False
    peers = [
        v
        for t in history
        if t.status == "complete"
        for s, v in t.intermediate
        if s == step
    ]
    if len(peers) < min_trials or not peers:
        return False
    return current > float(np.median(peers))


def optimize(
    X: np.ndarray,
    Y: np.ndarray,
    X_val: np.ndarray,
    Y_val: np.ndarray,
    space: SearchSpace | None = None,
    n_trials: int = 50,
    seed: int = 0,
    max_epochs: int = 200,
    patience: int = 10,
    min_trials: int = MIN_TRIALS_AT_STEP,
) -> tuple[MLPConfig, list[Trial]]:
    """Run the search: sample, train, prune; return the winning config.

    The winner is the completed trial with the lowest final validation loss
    (the trial's best epoch), ties broken by earliest trial id.  Fully
    reproducible: one seed sequence drives per-trial sampling and training.
    """
    space = space or SearchSpace()
    master = np.random.SeedSequence(seed)
    trials: list[Trial] = []

    for trial_id in range(n_trials):
        suggest_seq, train_seq = master.spawn(2)
        # generate_state gives distinct ints per child; keep plain ints so the
        # config serializes cleanly
        suggest_seed = int(suggest_seq.generate_state(1)[0])
        params = suggest(trials, space, rng_seed=suggest_seed)
        train_seed = int(train_seq.generate_state(1)[0])
        config = MLPConfig(
            layer_sizes=params["layer_sizes"],
            learning_rate=params["learning_rate"],
            batch_size=params["batch_size"],
            max_epochs=max_epochs,
            patience=patience,
            seed=train_seed,
        )
        trial = Trial(id=trial_id, config=config)

        def on_epoch(epoch: int, val_loss: float, trial=trial):
            trial.intermediate.append((epoch, val_loss))
            if should_prune(trial, epoch, trials, min_trials=min_trials):
                raise _Pruned(epoch)

        try:
            _, report = train(X, Y, config, X_val, Y_val, epoch_callback=on_epoch)
        except _Pruned as p:
            trial.status = "pruned"
            trial.pruned_step = p.step
        else:
            trial.status = "complete"
            trial.final_value = float(min(report.val_losses))
        trials.append(trial)

    completed = [t for t in trials if t.status == "complete"]
    if not completed:
        raise TuningError(
            "no trial completed (all pruned); raise the pruning warm-up "
            "(min_trials) or the trial count"
        )
    best = min(completed, key=lambda t: (t.final_value, t.id))
    return best.config, trials
