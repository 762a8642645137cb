"""Conditional tabular GAN for augmenting imbalanced building records.

Continuous columns are encoded mode-specifically: an expectation-maximization
Gaussian mixture is fitted per column, and each value becomes a scalar
alpha = (x - mu_k) / (4 sigma_k) (clipped to [-1, 1]) plus a one-hot of the
mode k, with k sampled proportionally to the mixture responsibility.
Discrete columns become one-hots.  A conditional vector (one category of one
discrete column, chosen by log-frequency) is appended to both generator and
discriminator inputs, and generation rejects rows that do not satisfy the
requested condition, so delivered counts are exact.

The adversary is a pac-grouped WGAN with gradient penalty.  Everything here
is plain numpy; the gradient-penalty term needs a second derivative of the
discriminator, which is hand-derived for the leaky-ReLU stack (see
`_gp_param_grads`).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .schema import BuildingRecord, DatasetSchema

MAX_MODES = 10
WEIGHT_THRESHOLD = 0.005
ALPHA_SCALE = 4.0  # alpha spans +-4 sigma before clipping
LEAKY_SLOPE = 0.2
GUMBEL_TAU = 0.2
REJECTION_BUDGET = 100  # generated rows allowed per delivered row


class DataGenError(RuntimeError):
    """Encoding, training, or sampling cannot proceed."""


# ---------------------------------------------------------------------------
# mode-specific normalization


@dataclass(frozen=True)
class ModeNormalizer:
    """Per-column Gaussian mixture used to encode a continuous value."""

    column: str
    means: tuple[float, ...]
    stds: tuple[float, ...]
    weights: tuple[float, ...]
    # fitted data range; decode clamps into it so sampled rows stay physical
    lo: float | None = None
    hi: float | None = None

    def __post_init__(self) -> None:
        if not self.means or not (len(self.means) == len(self.stds) == len(self.weights)):
            raise DataGenError(f"inconsistent mixture for column {self.column!r}")
        if any(s <= 0 for s in self.stds):
            raise DataGenError(f"non-positive mode std for column {self.column!r}")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise DataGenError(f"mode weights do not sum to 1 for column {self.column!r}")

    @property
    def n_modes(self) -> int:
        return len(self.means)

    def responsibilities(self, values: np.ndarray) -> np.ndarray:
        """(n, k) posterior probability of each mode for each value."""
        x = np.asarray(values, dtype=np.float64)[:, None]
        mu = np.array(self.means)
        sd = np.array(self.stds)
        log_w = np.log(np.array(self.weights))
        log_pdf = -0.5 * ((x - mu) / sd) ** 2 - np.log(sd) - 0.5 * math.log(2 * math.pi)
        log_post = log_w + log_pdf
        log_post -= log_post.max(axis=1, keepdims=True)
        post = np.exp(log_post)
        return post / post.sum(axis=1, keepdims=True)

    def encode(self, values: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Returns (alpha (n,), mode index (n,)); the mode is sampled."""
        x = np.asarray(values, dtype=np.float64)
        post = self.responsibilities(x)
        cum = np.cumsum(post, axis=1)
        draws = rng.uniform(size=(len(x), 1))
        modes = (draws > cum).sum(axis=1)
        mu = np.array(self.means)[modes]
        sd = np.array(self.stds)[modes]
        alpha = np.clip((x - mu) / (ALPHA_SCALE * sd), -1.0, 1.0)
        return alpha, modes

    def decode(self, alpha: np.ndarray, modes: np.ndarray) -> np.ndarray:
        mu = np.array(self.means)[modes]
        sd = np.array(self.stds)[modes]
        out = np.asarray(alpha, dtype=np.float64) * ALPHA_SCALE * sd + mu
        if self.lo is not None:
            out = np.clip(out, self.lo, self.hi)
        return out


def _em_fit(x: np.ndarray, k: int, rng: np.random.Generator, n_iter: int = 200):
    """One EM run; returns (means, stds, weights, loglik) or None if it broke."""
    n = len(x)
    # quantile-spread init keeps runs deterministic and well separated
    means = np.quantile(x, (np.arange(k) + 0.5) / k)
    means = means + rng.normal(scale=1e-9 * max(1.0, float(np.std(x))), size=k)
    var_floor = max(1e-6 * float(np.var(x)), 1e-12)
    variances = np.full(k, max(float(np.var(x)), var_floor))
    weights = np.full(k, 1.0 / k)
    prev_ll = -np.inf
    for _ in range(n_iter):
        log_pdf = (
            -0.5 * ((x[:, None] - means) ** 2) / variances
            - 0.5 * np.log(2 * math.pi * variances)
        )
        log_joint = np.log(weights) + log_pdf
        m = log_joint.max(axis=1, keepdims=True)
        log_norm = m[:, 0] + np.log(np.exp(log_joint - m).sum(axis=1))
        ll = float(log_norm.sum())
        post = np.exp(log_joint - log_norm[:, None])
        nk = post.sum(axis=0)
        nk = np.maximum(nk, 1e-12)
        weights = nk / n
        means = (post * x[:, None]).sum(axis=0) / nk
        variances = (post * (x[:, None] - means) ** 2).sum(axis=0) / nk
        variances = np.maximum(variances, var_floor)
        if not np.isfinite(ll):
            return None
        if abs(ll - prev_ll) < 1e-7 * (abs(ll) + 1.0):
            prev_ll = ll
            break
        prev_ll = ll
    return means, np.sqrt(variances), weights, prev_ll


def fit_mode_normalizer(
    column: str,
    values,
    max_modes: int = MAX_MODES,
    weight_threshold: float = WEIGHT_THRESHOLD,
    seed: int = 0,
) -> ModeNormalizer:
    """EM mixture per candidate mode count, picked by BIC, light modes dropped."""
    x = np.asarray(list(values), dtype=np.float64)
    if len(x) < 10:
        raise DataGenError(f"column {column!r} needs at least 10 values to fit modes")
    if not np.all(np.isfinite(x)):
        raise DataGenError(f"column {column!r} contains non-finite values")
    if float(np.ptp(x)) == 0.0:
        sigma = max(1e-6 * abs(float(x[0])), 1e-6)
        return ModeNormalizer(
            column, (float(x[0]),), (sigma,), (1.0,), lo=float(x[0]), hi=float(x[0])
        )

    rng = np.random.default_rng(seed)
    best = None
    for k in range(1, min(max_modes, len(np.unique(x))) + 1):
        fit = _em_fit(x, k, rng)
        if fit is None:
            continue
        means, stds, weights, ll = fit
        bic = -2.0 * ll + (3 * k - 1) * math.log(len(x))
        if best is None or bic < best[0]:
            best = (bic, means, stds, weights)
    if best is None:
        raise DataGenError(f"mixture fit failed for column {column!r}")
    _, means, stds, weights = best
    keep = weights >= weight_threshold
    if not keep.any():
        keep[np.argmax(weights)] = True
    means, stds, weights = means[keep], stds[keep], weights[keep]
    weights = weights / weights.sum()
    order = np.argsort(means)
    return ModeNormalizer(
        column,
        tuple(float(v) for v in means[order]),
        tuple(float(v) for v in stds[order]),
        tuple(float(v) for v in weights[order]),
        lo=float(x.min()),
        hi=float(x.max()),
    )


# ---------------------------------------------------------------------------
# table codec: records <-> GAN matrix


@dataclass(frozen=True)
class DiscreteSpec:
    """Category inventory of one discrete column, in first-appearance order."""

    column: str
    categories: tuple
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.categories or len(self.categories) != len(self.counts):
            raise DataGenError(f"bad category spec for column {self.column!r}")

    def index_of(self, value) -> int:
        for i, cat in enumerate(self.categories):
            if cat == value:
                return i
        raise DataGenError(f"unseen category {value!r} for column {self.column!r}")


@dataclass(frozen=True)
class ColumnBlock:
    """Where one column lives inside the encoded matrix."""

    name: str
    kind: str  # "continuous" | "discrete"
    offset: int
    width: int
    normalizer: ModeNormalizer | None = None
    spec: DiscreteSpec | None = None
    cond_offset: int | None = None  # discrete columns only


class TableCodec:
    """Fitted encoder between building records and the GAN's matrix space."""

    def __init__(self, blocks: list[ColumnBlock], cond_dim: int, n_rows_fit: int):
        self.blocks = blocks
        self.cond_dim = cond_dim
        self.n_rows_fit = n_rows_fit
        self.data_dim = sum(b.width for b in blocks)
        self.discrete_blocks = [b for b in blocks if b.kind == "discrete"]
        if not self.discrete_blocks:
            raise DataGenError("conditional sampling needs at least one discrete column")

    @property
    def column_names(self) -> list[str]:
        return [b.name for b in self.blocks]

    def encode(self, records: list[BuildingRecord], rng: np.random.Generator) -> np.ndarray:
        X = np.zeros((len(records), self.data_dim))
        for block in self.blocks:
            raw = [r[block.name] for r in records]
            if any(v is None for v in raw):
                raise DataGenError(f"column {block.name!r} has nulls; drop them before fitting")
            if block.kind == "continuous":
                alpha, modes = block.normalizer.encode(np.asarray(raw, dtype=np.float64), rng)
                X[:, block.offset] = alpha
                X[np.arange(len(records)), block.offset + 1 + modes] = 1.0
            else:
                idx = np.array([block.spec.index_of(v) for v in raw])
                X[np.arange(len(records)), block.offset + idx] = 1.0
        return X

    def decode(self, X: np.ndarray) -> list[BuildingRecord]:
        X = np.asarray(X, dtype=np.float64)
        columns = {}
        for block in self.blocks:
            sub = X[:, block.offset : block.offset + block.width]
            if block.kind == "continuous":
                alpha = np.clip(sub[:, 0], -1.0, 1.0)
                modes = np.argmax(sub[:, 1:], axis=1)
                columns[block.name] = block.normalizer.decode(alpha, modes)
            else:
                idx = np.argmax(sub, axis=1)
                columns[block.name] = [block.spec.categories[i] for i in idx]
        records = []
        for i in range(len(X)):
            values = {}
            for block in self.blocks:
                v = columns[block.name][i]
                values[block.name] = float(v) if block.kind == "continuous" else v
            records.append(BuildingRecord(values))
        return records

    # ----- conditions

    def condition_onehot(self, block: ColumnBlock, cat_idx: int) -> np.ndarray:
        c = np.zeros(self.cond_dim)
        c[block.cond_offset + cat_idx] = 1.0
        return c

    def block_for(self, column: str) -> ColumnBlock:
        for b in self.blocks:
            if b.name == column:
                return b
        raise DataGenError(f"unknown column {column!r}")

    def sample_conditions(self, n: int, rng: np.random.Generator):
        """Training-by-sampling draw: uniform column, log-frequency category.

        Returns (list of (block, cat_idx), stacked one-hot matrix).
        """
        pairs = []
        C = np.zeros((n, self.cond_dim))
        col_choices = rng.integers(0, len(self.discrete_blocks), size=n)
        for row, ci in enumerate(col_choices):
            block = self.discrete_blocks[ci]
            logf = np.log1p(np.asarray(block.spec.counts, dtype=np.float64))
            p = logf / logf.sum()
            cat = int(rng.choice(len(p), p=p))
            pairs.append((block, cat))
            C[row, block.cond_offset + cat] = 1.0
        return pairs, C


def fit_codec(
    records: list[BuildingRecord],
    schema: DatasetSchema,
    max_modes: int = MAX_MODES,
    weight_threshold: float = WEIGHT_THRESHOLD,
    seed: int = 0,
) -> TableCodec:
    """Fit per-column transforms over the modeled (feature + label) columns."""
    if not records:
        raise DataGenError("no records to fit")
    blocks: list[ColumnBlock] = []
    offset = 0
    cond_offset = 0
    for col in schema.modeled_columns():
        raw = [r[col.name] for r in records]
        if any(v is None for v in raw):
            raise DataGenError(f"column {col.name!r} has nulls; drop them before fitting")
        if col.kind == "numerical":
            norm = fit_mode_normalizer(
                col.name, raw, max_modes=max_modes, weight_threshold=weight_threshold, seed=seed
            )
            width = 1 + norm.n_modes
            blocks.append(ColumnBlock(col.name, "continuous", offset, width, normalizer=norm))
        else:
            categories: list = []
            counts: list[int] = []
            for v in raw:
                if v in categories:
                    counts[categories.index(v)] += 1
                else:
                    categories.append(v)
                    counts.append(1)
            spec = DiscreteSpec(col.name, tuple(categories), tuple(counts))
            width = len(categories)
            blocks.append(
                ColumnBlock(
                    col.name, "discrete", offset, width, spec=spec, cond_offset=cond_offset
                )
            )
            cond_offset += width
        offset += width
    return TableCodec(blocks, cond_dim=cond_offset, n_rows_fit=len(records))


def rows_matching_conditions(
    codec: TableCodec, records: list[BuildingRecord]
) -> dict[tuple[str, int], np.ndarray]:
    """Index lists used to draw real rows that satisfy a sampled condition."""
    out: dict[tuple[str, int], np.ndarray] = {}
    for block in codec.discrete_blocks:
        values = [r[block.name] for r in records]
        for cat_idx, cat in enumerate(block.spec.categories):
            idx = np.array([i for i, v in enumerate(values) if v == cat], dtype=np.int64)
            out[(block.name, cat_idx)] = idx
    return out


# ---------------------------------------------------------------------------
# networks


@dataclass(frozen=True)
class GanConfig:
    epochs: int = 800
    batch_size: int = 60
    pac: int = 10
    noise_dim: int = 128
    gen_width: int = 256
    disc_width: int = 256
    gp_weight: float = 10.0
    learning_rate: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.9
    tau: float = GUMBEL_TAU
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise DataGenError("epochs must be positive")
        if self.pac < 1 or self.batch_size % self.pac != 0:
            raise DataGenError("pac must be positive and divide batch_size")
        if min(self.noise_dim, self.gen_width, self.disc_width) < 1:
            raise DataGenError("network widths must be positive")
        if self.gp_weight < 0 or self.learning_rate <= 0:
            raise DataGenError("bad optimizer settings")
        if not (0 < self.tau):
            raise DataGenError("tau must be positive")


def _xavier(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


class _Adam:
    """In-place Adam over a list of arrays."""

    def __init__(self, params: list[np.ndarray], lr: float, beta1: float, beta2: float):
        self.params = params
        self.lr, self.b1, self.b2 = lr, beta1, beta2
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads: list[np.ndarray]) -> None:
        self.t += 1
        bc1 = 1.0 - self.b1**self.t
        bc2 = 1.0 - self.b2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            p -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + 1e-8)


# ----- generator: two concat-residual blocks, span-wise output activations


def _init_generator(codec: TableCodec, config: GanConfig, rng: np.random.Generator):
    d_in = config.noise_dim + codec.cond_dim
    w = config.gen_width
    d_out = codec.data_dim
    weights = [
        _xavier(rng, d_in, w),
        _xavier(rng, d_in + w, w),
        _xavier(rng, d_in + 2 * w, d_out),
    ]
    biases = [np.zeros(w), np.zeros(w), np.zeros(d_out)]
    return weights, biases


def _generator_forward(weights, biases, z, cond, codec: TableCodec, tau: float, rng):
    """Returns (soft output rows, cache for backprop)."""
    x0 = np.concatenate([z, cond], axis=1)
    z1 = x0 @ weights[0] + biases[0]
    h1 = np.maximum(z1, 0.0)
    x1 = np.concatenate([h1, x0], axis=1)
    z2 = x1 @ weights[1] + biases[1]
    h2 = np.maximum(z2, 0.0)
    x2 = np.concatenate([h2, x1], axis=1)
    raw = x2 @ weights[2] + biases[2]

    out = np.empty_like(raw)
    softmaxes = {}
    for block in codec.blocks:
        lo = block.offset
        if block.kind == "continuous":
            out[:, lo] = np.tanh(raw[:, lo])
            lo_c, hi_c = lo + 1, lo + block.width
        else:
            lo_c, hi_c = lo, lo + block.width
        logits = raw[:, lo_c:hi_c]
        gumbel = -np.log(-np.log(rng.uniform(size=logits.shape) + 1e-12) + 1e-12)
        u = (logits + gumbel) / tau
        u -= u.max(axis=1, keepdims=True)
        e = np.exp(u)
        y = e / e.sum(axis=1, keepdims=True)
        out[:, lo_c:hi_c] = y
        softmaxes[lo_c] = y
    cache = {"x0": x0, "z1": z1, "x1": x1, "z2": z2, "x2": x2, "raw": raw, "soft": softmaxes}
    return out, cache


def _generator_backward_raw(weights, cache, grad_raw):
    """Backprop a gradient at the raw output through the residual chain."""
    x2, x1, x0, z2, z1 = cache["x2"], cache["x1"], cache["x0"], cache["z2"], cache["z1"]
    w = z1.shape[1]
    gw2 = x2.T @ grad_raw
    gb2 = grad_raw.sum(axis=0)
    grad_x2 = grad_raw @ weights[2].T
    grad_h2 = grad_x2[:, :w] * (z2 > 0)
    grad_x1 = grad_x2[:, w:] + grad_h2 @ weights[1].T
    gw1 = x1.T @ grad_h2
    gb1 = grad_h2.sum(axis=0)
    grad_h1 = grad_x1[:, :w] * (z1 > 0)
    gw0 = x0.T @ grad_h1
    gb0 = grad_h1.sum(axis=0)
    return [gw0, gw1, gw2], [gb0, gb1, gb2]


def _generator_backward(weights, cache, grad_out, codec: TableCodec, tau: float):
    """Gradients of a scalar loss wrt generator parameters.

    ``grad_out`` is the loss gradient wrt the soft output rows; softmax and
    tanh jacobians fold it back onto the raw pre-activations first.
    """
    raw = cache["raw"]
    grad_raw = np.zeros_like(raw)
    for block in codec.blocks:
        lo = block.offset
        if block.kind == "continuous":
            t = np.tanh(raw[:, lo])
            grad_raw[:, lo] = grad_out[:, lo] * (1.0 - t * t)
            lo_c, hi_c = lo + 1, lo + block.width
        else:
            lo_c, hi_c = lo, lo + block.width
        y = cache["soft"][lo_c]
        g = grad_out[:, lo_c:hi_c]
        inner = (g * y).sum(axis=1, keepdims=True)
        grad_raw[:, lo_c:hi_c] = y * (g - inner) / tau
    return _generator_backward_raw(weights, cache, grad_raw)


def _add_condition_ce(grad_raw_out, raw, pairs, codec: TableCodec, n: int):
    """Cross-entropy between the conditioned block's raw logits and the
    requested category; returns the loss and adds its gradient in place.

    ``grad_raw_out`` addresses the raw logits, so the caller must route it
    around the gumbel-softmax (this term deliberately skips the sampling
    noise, as the condition should hold regardless of the draw).
    """
    total = 0.0
    for row, (block, cat) in enumerate(pairs):
        lo = block.offset
        hi = lo + block.width
        logits = raw[row, lo:hi]
        shifted = logits - logits.max()
        log_probs = shifted - math.log(np.exp(shifted).sum())
        total -= log_probs[cat]
        probs = np.exp(log_probs)
        probs[cat] -= 1.0
        grad_raw_out[row, lo:hi] += probs / n
    return total / n


# ----- discriminator: pac-flattened leaky-ReLU stack with gradient penalty


def _init_discriminator(d_in: int, config: GanConfig, rng: np.random.Generator):
    w = config.disc_width
    weights = [_xavier(rng, d_in, w), _xavier(rng, w, w), _xavier(rng, w, 1)]
    biases = [np.zeros(w), np.zeros(w), np.zeros(1)]
    return weights, biases


def _disc_forward(weights, biases, x):
    """Returns (scores (n,), cache). Input is already pac-flattened."""
    z1 = x @ weights[0] + biases[0]
    a1 = np.where(z1 > 0, z1, LEAKY_SLOPE * z1)
    z2 = a1 @ weights[1] + biases[1]
    a2 = np.where(z2 > 0, z2, LEAKY_SLOPE * z2)
    z3 = a2 @ weights[2] + biases[2]
    masks = [np.where(z1 > 0, 1.0, LEAKY_SLOPE), np.where(z2 > 0, 1.0, LEAKY_SLOPE)]
    cache = {"x": x, "a1": a1, "a2": a2, "masks": masks}
    return z3[:, 0], cache


def _disc_backward(weights, cache, upstream):
    """Standard backprop of sum(upstream * score) wrt parameters and input."""
    x, a1, a2 = cache["x"], cache["a1"], cache["a2"]
    m1, m2 = cache["masks"]
    d3 = upstream[:, None]
    gw3 = a2.T @ d3
    gb3 = d3.sum(axis=0)
    d2 = (d3 @ weights[2].T) * m2
    gw2 = a1.T @ d2
    gb2 = d2.sum(axis=0)
    d1 = (d2 @ weights[1].T) * m1
    gw1 = x.T @ d1
    gb1 = d1.sum(axis=0)
    grad_x = d1 @ weights[0].T
    return [gw1, gw2, gw3], [gb1, gb2, gb3], grad_x


def _disc_input_gradient(weights, cache):
    """r = d score / d input per row, plus the suffix products s_l needed by
    the double-backprop below."""
    m1, m2 = cache["masks"]
    n = cache["x"].shape[0]
    s3 = np.ones((n, 1))
    s2 = (s3 @ weights[2].T) * m2
    s1 = (s2 @ weights[1].T) * m1
    s0 = s1 @ weights[0].T
    return s0, (s1, s2, s3)


def _gp_param_grads(weights, cache, v, suffixes):
    """Weight gradients of c = sum(v * r) with activation masks frozen.

    With masks frozen the input gradient r is a linear chain in the weights;
    for each layer, grad W_l = (p_{l-1} * M_{l-1})^T s_l where p is the
    forward prefix seeded with v and s the backward suffix seeded with ones.
    Masks do not depend on biases almost everywhere, so bias gradients are 0.
    """
    m1, m2 = cache["masks"]
    s1, s2, s3 = suffixes
    p0 = v
    p1 = p0 @ weights[0]
    p2 = (p1 * m1) @ weights[1]
    gw1 = p0.T @ s1
    gw2 = (p1 * m1).T @ s2
    gw3 = (p2 * m2).T @ s3
    return [gw1, gw2, gw3]


def _gradient_penalty(weights, biases, real_flat, fake_flat, gp_weight, rng):
    """Penalty value and its parameter gradients at random interpolates."""
    n = real_flat.shape[0]
    u = rng.uniform(size=(n, 1))
    x_hat = u * real_flat + (1.0 - u) * fake_flat
    _, cache = _disc_forward(weights, biases, x_hat)
    r, suffixes = _disc_input_gradient(weights, cache)
    norms = np.sqrt((r * r).sum(axis=1))
    penalty = gp_weight * float(np.mean((norms - 1.0) ** 2))
    coeff = gp_weight * 2.0 * (norms - 1.0) / (n * np.maximum(norms, 1e-12))
    v = coeff[:, None] * r
    grads_w = _gp_param_grads(weights, cache, v, suffixes)
    grads_b = [np.zeros_like(b) for b in biases]
    return penalty, grads_w, grads_b


def _pac_flatten(data_rows: np.ndarray, cond_rows: np.ndarray, pac: int) -> np.ndarray:
    joined = np.concatenate([data_rows, cond_rows], axis=1)
    n, d = joined.shape
    return joined.reshape(n // pac, pac * d)


# ---------------------------------------------------------------------------
# training


@dataclass
class GanGenerator:
    """Trained generator plus everything needed to sample from it."""

    codec: TableCodec
    config: GanConfig
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    epoch_losses: list[tuple[float, float]] = field(default_factory=list)

    def raw_sample(self, cond: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        z = rng.standard_normal((cond.shape[0], self.config.noise_dim))
        out, _ = _generator_forward(
            self.weights, self.biases, z, cond, self.codec, self.config.tau, rng
        )
        return out

    def sample_records(
        self, n: int, rng: np.random.Generator, condition: tuple[str, object] | None = None
    ) -> tuple[list[BuildingRecord], float]:
        """Decoded rows plus the fraction whose raw output honored the
        condition (1.0 when unconditioned)."""
        if condition is None:
            _, C = self.codec.sample_conditions(n, rng)
            out = self.raw_sample(C, rng)
            return self.codec.decode(out), 1.0
        column, value = condition
        block = self.codec.block_for(column)
        if block.kind != "discrete":
            raise DataGenError(f"cannot condition on continuous column {column!r}")
        cat = block.spec.index_of(value)
        C = np.tile(self.codec.condition_onehot(block, cat), (n, 1))
        out = self.raw_sample(C, rng)
        hit = np.argmax(out[:, block.offset : block.offset + block.width], axis=1) == cat
        return self.codec.decode(out), float(np.mean(hit))


def train_gan(
    codec: TableCodec,
    X: np.ndarray,
    match_index: dict[tuple[str, int], np.ndarray],
    config: GanConfig,
) -> GanGenerator:
    """Adversarial training; deterministic for a given config seed."""
    n = X.shape[0]
    if n < 100:
        raise DataGenError("training needs at least 100 rows")
    rng = np.random.default_rng(config.seed)
    batch = min(config.batch_size, (n // config.pac) * config.pac)
    if batch < config.pac:
        raise DataGenError("dataset too small for one pac group")

    gw, gb = _init_generator(codec, config, rng)
    d_in = config.pac * (codec.data_dim + codec.cond_dim)
    dw, db = _init_discriminator(d_in, config, rng)
    g_opt = _Adam(gw + gb, config.learning_rate, config.beta1, config.beta2)
    d_opt = _Adam(dw + db, config.learning_rate, config.beta1, config.beta2)

    steps = max(1, n // batch)
    n_groups = batch // config.pac
    losses = []
    for epoch in range(config.epochs):
        d_epoch, g_epoch = 0.0, 0.0
        for step in range(steps):
            # --- discriminator phase
            pairs, C = codec.sample_conditions(batch, rng)
            real_idx = np.array(
                [rng.choice(match_index[(block.name, cat)]) for block, cat in pairs]
            )
            real = X[real_idx]
            z = rng.standard_normal((batch, config.noise_dim))
            fake, _ = _generator_forward(gw, gb, z, C, codec, config.tau, rng)

            real_flat = _pac_flatten(real, C, config.pac)
            fake_flat = _pac_flatten(fake, C, config.pac)
            real_scores, real_cache = _disc_forward(dw, db, real_flat)
            fake_scores, fake_cache = _disc_forward(dw, db, fake_flat)
            up_fake = np.full(n_groups, 1.0 / n_groups)
            up_real = np.full(n_groups, -1.0 / n_groups)
            gwf, gbf, _ = _disc_backward(dw, fake_cache, up_fake)
            gwr, gbr, _ = _disc_backward(dw, real_cache, up_real)
            penalty, gwp, gbp = _gradient_penalty(
                dw, db, real_flat, fake_flat, config.gp_weight, rng
            )
            d_loss = float(np.mean(fake_scores) - np.mean(real_scores)) + penalty
            d_grads = [a + b + c for a, b, c in zip(gwf, gwr, gwp)] + [
                a + b + c for a, b, c in zip(gbf, gbr, gbp)
            ]
            d_opt.step(d_grads)

            # --- generator phase
            pairs, C = codec.sample_conditions(batch, rng)
            z = rng.standard_normal((batch, config.noise_dim))
            fake, g_cache = _generator_forward(gw, gb, z, C, codec, config.tau, rng)
            fake_flat = _pac_flatten(fake, C, config.pac)
            scores, d_cache = _disc_forward(dw, db, fake_flat)
            _, _, grad_flat = _disc_backward(dw, d_cache, np.full(n_groups, -1.0 / n_groups))
            grad_joined = grad_flat.reshape(batch, codec.data_dim + codec.cond_dim)
            grad_fake = grad_joined[:, : codec.data_dim]
            g_grads_w, g_grads_b = _generator_backward(gw, g_cache, grad_fake, codec, config.tau)

            grad_raw_ce = np.zeros_like(g_cache["raw"])
            ce = _add_condition_ce(grad_raw_ce, g_cache["raw"], pairs, codec, batch)
            ce_w, ce_b = _generator_backward_raw(gw, g_cache, grad_raw_ce)
            g_grads_w = [a + b for a, b in zip(g_grads_w, ce_w)]
            g_grads_b = [a + b for a, b in zip(g_grads_b, ce_b)]

            g_loss = float(-np.mean(scores)) + ce
            g_opt.step(g_grads_w + g_grads_b)

            if not (np.isfinite(d_loss) and np.isfinite(g_loss)):
                raise DataGenError(
                    f"training diverged at epoch {epoch + 1} step {step + 1}: "
                    f"d_loss={d_loss}, g_loss={g_loss}"
                )
            d_epoch += d_loss
            g_epoch += g_loss
        losses.append((d_epoch / steps, g_epoch / steps))
    return GanGenerator(codec, config, gw, gb, losses)


# ---------------------------------------------------------------------------
# balance planning and conditional generation


@dataclass(frozen=True)
class PlanEntry:
    column: str
    value: object
    count: int

    def __post_init__(self) -> None:
        if self.count < 0:
            raise DataGenError("plan counts must be non-negative")


def make_balance_plan(
    labels: np.ndarray, label_names: list[str], budget: int
) -> list[PlanEntry]:
    """Greedy allocation toward 50% positive rates on every label.

    One grant at a time: pick the (label, value) farthest below half, add one
    expected row conditioned on it, update every label's expected positive
    count by the empirical conditional rate P(other label | conditioned value).
    """
    if budget < 0:
        raise DataGenError("budget must be non-negative")
    Y = np.asarray(labels, dtype=np.float64)
    if Y.ndim != 2 or Y.shape[1] != len(label_names):
        raise DataGenError("labels matrix does not match label names")
    n0, k = Y.shape
    if n0 == 0:
        raise DataGenError("need rows to plan against")

    # conditional positive rates: cond_rate[j][v][k] = P(label_k = 1 | label_j = v)
    marginal = Y.mean(axis=0)
    cond_rate = np.empty((k, 2, k))
    for j in range(k):
        for v in (0, 1):
            rows = Y[Y[:, j] == v]
            cond_rate[j, v] = rows.mean(axis=0) if len(rows) else marginal

    pos = Y.sum(axis=0)
    total = float(n0)
    grants = np.zeros((k, 2), dtype=np.int64)
    for _ in range(budget):
        rates = pos / total
        # deficit of value 1 is 0.5 - rate; of value 0 it is rate - 0.5;
        # exact ties go to the least-granted pair so symmetry spreads evenly
        j, v = min(
            ((jj, vv) for jj in range(k) for vv in (0, 1)),
            key=lambda p: (
                -(rates[p[0]] - 0.5 if p[1] == 0 else 0.5 - rates[p[0]]),
                grants[p[0], p[1]],
                p,
            ),
        )
        grants[j, v] += 1
        pos += cond_rate[j, v]
        total += 1.0
    plan = []
    for j in range(k):
        for v in (1, 0):
            if grants[j, v]:
                plan.append(PlanEntry(label_names[j], bool(v), int(grants[j, v])))
    plan.sort(key=lambda e: -e.count)
    return plan


def expected_rates_after(
    labels: np.ndarray, label_names: list[str], plan: list[PlanEntry]
) -> dict[str, float]:
    """Expected post-augmentation positive rates implied by a plan."""
    Y = np.asarray(labels, dtype=np.float64)
    n0, k = Y.shape
    marginal = Y.mean(axis=0)
    pos = Y.sum(axis=0)
    total = float(n0)
    for entry in plan:
        j = label_names.index(entry.column)
        v = int(bool(entry.value))
        rows = Y[Y[:, j] == v]
        rate = rows.mean(axis=0) if len(rows) else marginal
        pos += entry.count * rate
        total += entry.count
    return {name: float(p / total) for name, p in zip(label_names, pos)}


def generate(
    generator: GanGenerator, plan: list[PlanEntry], seed: int = 0
) -> tuple[list[BuildingRecord], dict]:
    """Deliver exactly the planned rows via rejection resampling.

    Each plan entry gets its own seeded stream, so entries are independent
    and the whole run is reproducible.  A row is kept only if its decoded
    conditioned column equals the requested value; the generator may produce
    up to REJECTION_BUDGET times the requested count before giving up with a
    warning and a partial result.
    """
    master = np.random.SeedSequence(seed)
    records: list[BuildingRecord] = []
    entries_report = []
    for entry, seq in zip(plan, master.spawn(max(len(plan), 1))):
        rng = np.random.default_rng(seq)
        kept: list[BuildingRecord] = []
        produced = 0
        raw_hits = 0
        budget_rows = REJECTION_BUDGET * entry.count
        while len(kept) < entry.count and produced < budget_rows:
            m = min(max(entry.count - len(kept), 64), 4096, budget_rows - produced)
            rows, _ = generator.sample_records(m, rng, condition=(entry.column, entry.value))
            produced += m
            for r in rows:
                if r[entry.column] == entry.value:
                    raw_hits += 1
                    if len(kept) < entry.count:
                        kept.append(r)
        if len(kept) < entry.count:
            warnings.warn(
                f"rejection budget exhausted for {entry.column}={entry.value!r}: "
                f"delivered {len(kept)} of {entry.count}",
                RuntimeWarning,
            )
        records.extend(kept)
        entries_report.append(
            {
                "column": entry.column,
                "value": entry.value,
                "requested": entry.count,
                "delivered": len(kept),
                "rows_generated": produced,
                "raw_satisfaction": raw_hits / produced if produced else 1.0,
            }
        )
    manifest = {
        "seed": seed,
        "plan": [
            {"column": e.column, "value": e.value, "count": e.count} for e in plan
        ],
        "config": {
            "epochs": generator.config.epochs,
            "batch_size": generator.config.batch_size,
            "pac": generator.config.pac,
            "noise_dim": generator.config.noise_dim,
            "seed": generator.config.seed,
        },
        "entries": entries_report,
    }
    return records, manifest
