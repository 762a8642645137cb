"""Multi-layer perceptron: ReLU hidden layers, sigmoid outputs, BCE loss,
Adam updates, early stopping on validation loss.

Everything is plain numpy float64.  Training is deterministic given the
config seed: one generator drives weight init and every epoch's shuffle, so
the same data and config reproduce bit-identical parameters.  Backprop is
written against the *clipped* loss, so finite-difference checks agree with it
everywhere (the clip zeroes the gradient where it zeroes the sensitivity).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: BCE probability clip, and numerical floor for relative-error denominators.
BCE_EPS = 1e-7

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class TrainingError(RuntimeError):
    """Training aborted (non-finite loss) or inputs unusable."""


@dataclass
class MLPConfig:
    """Training-time knobs.  ``layer_sizes`` lists hidden widths only."""

    layer_sizes: list[int]
    learning_rate: float = 1e-3
    batch_size: int = 32
    max_epochs: int = 200
    patience: int = 10
    min_delta: float = 1e-4
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.layer_sizes or any(
            not isinstance(s, (int, np.integer)) or s <= 0 for s in self.layer_sizes
        ):
            raise ValueError("layer_sizes must be a non-empty list of positive integers")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        for name in ("batch_size", "max_epochs", "patience"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.min_delta < 0:
            raise ValueError("min_delta must be non-negative")


@dataclass
class MLPModel:
    """Parameter container: weights[l] has shape (fan_in, fan_out).

    Hidden layers apply ReLU; the final layer applies a sigmoid, one
    independent probability per output.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self) -> None:
        if not self.weights or len(self.weights) != len(self.biases):
            raise ValueError("need matching, non-empty weight and bias lists")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ValueError(f"layer {l}: weight/bias shapes inconsistent")
            if l > 0 and w.shape[0] != self.weights[l - 1].shape[1]:
                raise ValueError(f"layer {l}: input width does not chain")

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[1]

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def validate_finite(self) -> None:
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise TrainingError(f"layer {l} holds non-finite parameters")

    def copy(self) -> "MLPModel":
        return MLPModel([w.copy() for w in self.weights], [b.copy() for b in self.biases])


@dataclass
class TrainReport:
    """Per-epoch losses and where early stopping landed (epochs 1-indexed)."""

    train_losses: list[float] = field(default_factory=list)
    val_losses: list[float] = field(default_factory=list)
    stopped_epoch: int = 0
    best_epoch: int = 0


def init_model(
    input_dim: int, hidden_sizes: list[int], output_dim: int, rng: np.random.Generator
) -> MLPModel:
    """Uniform init in +-sqrt(6 / (fan_in + fan_out)); biases zero."""
    sizes = [input_dim, *hidden_sizes, output_dim]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MLPModel(weights, biases)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # evaluated piecewise to avoid overflow in exp for large |z|
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _as_batch(x: np.ndarray, input_dim: int) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != input_dim:
        raise ValueError(f"expected inputs of width {input_dim}, got shape {x.shape}")
    return x, single


def forward_logits(model: MLPModel, x: np.ndarray) -> np.ndarray:
    """Pre-sigmoid outputs (the score scale)."""
    h, single = _as_batch(x, model.input_dim)
    last = len(model.weights) - 1
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        h = h @ w + b
        if l < last:
            h = np.maximum(h, 0.0)
    return h[0] if single else h


def forward(model: MLPModel, x: np.ndarray) -> np.ndarray:
    """Probability outputs, strictly inside (0, 1) for finite inputs."""
    return _sigmoid(forward_logits(model, x))


def bce_loss(probs: np.ndarray, labels: np.ndarray) -> float:
    """Binary cross-entropy, mean over every (sample, label) cell.

    Probabilities are clipped to [eps, 1-eps] first.
    """
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if probs.shape != labels.shape:
        raise ValueError(f"shape mismatch: probs {probs.shape} vs labels {labels.shape}")
    if probs.size == 0:
        raise ValueError("cannot score zero cells")
    p = np.clip(probs, BCE_EPS, 1.0 - BCE_EPS)
    return float(np.mean(-(labels * np.log(p) + (1.0 - labels) * np.log1p(-p))))


def _forward_cached(model: MLPModel, x: np.ndarray):
    activations = [x]  # post-activation inputs to each layer
    pre = []
    h = x
    last = len(model.weights) - 1
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ w + b
        pre.append(z)
        h = np.maximum(z, 0.0) if l < last else _sigmoid(z)
        activations.append(h)
    return activations, pre


def backprop_gradients(
    model: MLPModel, x: np.ndarray, y: np.ndarray
) -> tuple[list[np.ndarray], list[np.ndarray], float]:
    """Exact gradients of the clipped BCE mean w.r.t. every parameter.

    Returns (weight grads, bias grads, loss).  Where the clip saturates, the
    loss no longer depends on the probability and the gradient is zero.
    """
    x, _ = _as_batch(x, model.input_dim)
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[None, :]
    if y.shape != (x.shape[0], model.output_dim):
        raise ValueError(f"labels must have shape {(x.shape[0], model.output_dim)}")

    activations, pre = _forward_cached(model, x)
    probs = activations[-1]
    loss = bce_loss(probs, y)

    n_cells = probs.size
    inside = (probs > BCE_EPS) & (probs < 1.0 - BCE_EPS)
    delta = np.where(inside, probs - y, 0.0) / n_cells  # dL/dz at the output layer

    grads_w: list[np.ndarray] = [np.empty(0)] * len(model.weights)
    grads_b: list[np.ndarray] = [np.empty(0)] * len(model.biases)
    for l in range(len(model.weights) - 1, -1, -1):
        grads_w[l] = activations[l].T @ delta
        grads_b[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ model.weights[l].T) * (pre[l - 1] > 0.0)
    return grads_w, grads_b, loss


def finite_difference_gradients(
    model: MLPModel, x: np.ndarray, y: np.ndarray, h: float = 1e-5
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Central-difference gradients of the same clipped loss, every parameter."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)

    def loss_at() -> float:
        return bce_loss(forward(model, x), y)

    grads_w, grads_b = [], []
    for params, grads in ((model.weights, grads_w), (model.biases, grads_b)):
        for arr in params:
            g = np.empty_like(arr)
            flat = arr.ravel()
            gflat = g.ravel()
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + h
                up = loss_at()
                flat[i] = orig - h
                down = loss_at()
                flat[i] = orig
                gflat[i] = (up - down) / (2.0 * h)
            grads.append(g)
    return grads_w, grads_b


def gradient_check(model: MLPModel, x: np.ndarray, y: np.ndarray, h: float = 1e-5) -> float:
    """Max relative disagreement between backprop and central differences.

    Relative error per parameter is |a - f| / max(|a| + |f|, 1e-8).
    """
    if model.n_params >= 5000:
        raise ValueError("gradient_check is for small models (< 5k parameters)")
    bw, bb, _ = backprop_gradients(model, x, y)
    fw, fb = finite_difference_gradients(model, x, y, h)
    worst = 0.0
    for analytic, numeric in zip(bw + bb, fw + fb):
        denom = np.maximum(np.abs(analytic) + np.abs(numeric), 1e-8)
        worst = max(worst, float((np.abs(analytic - numeric) / denom).max()))
    return worst


class EarlyStopping:
    """Validation-loss bookkeeping shared by training and the tuner.

    Tracks the best (strictly minimal) epoch, and counts consecutive epochs
    without a *significant* improvement (>= min_delta below the best seen);
    ``update`` returns True when that count reaches the patience and training
    should stop.
    """

    def __init__(self, patience: int, min_delta: float):
        self.patience = patience
        self.min_delta = min_delta
        self.best_loss = np.inf
        self.best_epoch = 0
        self.bad_epochs = 0

    def update(self, epoch: int, val_loss: float) -> bool:
        significant = self.best_loss - val_loss >= self.min_delta
        if val_loss < self.best_loss:
            self.best_loss = val_loss
            self.best_epoch = epoch
        if significant:
            self.bad_epochs = 0
        else:
            self.bad_epochs += 1
        return self.bad_epochs >= self.patience


def train(
    X: np.ndarray,
    Y: np.ndarray,
    config: MLPConfig,
    X_val: np.ndarray,
    Y_val: np.ndarray,
    epoch_callback=None,
) -> tuple[MLPModel, TrainReport]:
    """Mini-batch Adam training with early stopping.

    Returns the parameters of the best-validation epoch, not the last one.
    ``epoch_callback(epoch, val_loss)``, when given, may raise to abort early
    (the tuner's pruning hook); the exception propagates.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    X_val = np.asarray(X_val, dtype=np.float64)
    Y_val = np.asarray(Y_val, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise TrainingError("train matrix and labels must be 2-D with matching rows")
    if X.shape[0] == 0 or X_val.shape[0] == 0:
        raise TrainingError("train and validation sets must be non-empty")
    if X_val.shape[1] != X.shape[1] or Y_val.shape[1] != Y.shape[1]:
        raise TrainingError("validation widths must match training widths")

    rng = np.random.default_rng(config.seed)
    model = init_model(X.shape[1], list(config.layer_sizes), Y.shape[1], rng)

    m_w = [np.zeros_like(w) for w in model.weights]
    v_w = [np.zeros_like(w) for w in model.weights]
    m_b = [np.zeros_like(b) for b in model.biases]
    v_b = [np.zeros_like(b) for b in model.biases]
    t = 0
    lr = config.learning_rate

    stopper = EarlyStopping(config.patience, config.min_delta)
    report = TrainReport()
    best_model = model.copy()
    n = X.shape[0]

    for epoch in range(1, config.max_epochs + 1):
        perm = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            gw, gb, loss = backprop_gradients(model, X[idx], Y[idx])
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite training loss at epoch {epoch}")
            batch_losses.append(loss)
            t += 1
            bc1 = 1.0 - ADAM_BETA1**t
            bc2 = 1.0 - ADAM_BETA2**t
            for l in range(len(model.weights)):
                for g, m, v, p in (
                    (gw[l], m_w[l], v_w[l], model.weights[l]),
                    (gb[l], m_b[l], v_b[l], model.biases[l]),
                ):
                    m *= ADAM_BETA1
                    m += (1.0 - ADAM_BETA1) * g
                    v *= ADAM_BETA2
                    v += (1.0 - ADAM_BETA2) * g * g
                    p -= lr * (m / bc1) / (np.sqrt(v / bc2) + ADAM_EPS)

        report.train_losses.append(float(np.mean(batch_losses)))
        val_loss = bce_loss(forward(model, X_val), Y_val)
        if not np.isfinite(val_loss):
            raise TrainingError(f"non-finite validation loss at epoch {epoch}")
        report.val_losses.append(val_loss)

        improved_strictly = val_loss < stopper.best_loss
        should_stop = stopper.update(epoch, val_loss)
        if improved_strictly:
            best_model = model.copy()
        if epoch_callback is not None:
            epoch_callback(epoch, val_loss)
        if should_stop:
            report.stopped_epoch = epoch
            break
    else:
        report.stopped_epoch = config.max_epochs

    report.best_epoch = stopper.best_epoch
    best_model.validate_finite()
    return best_model, report
