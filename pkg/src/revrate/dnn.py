"""Embedding + LSTM rating regressor with hand-written backward passes.

Layout of the head input (default widths)::

    [ h_L (100) | category one-hot (5) | item embedding (20) | reviewer embedding (20) | time (1) ]

optionally followed by the two scaled engineered counts.
"""

import io
import csv
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .numerics import Adam, AdamHyper, check_finite, mse_loss, sigmoid

log = logging.getLogger(__name__)

N_GATES = 4  # input, forget, cell candidate, output
N_CATEGORIES = 5


@dataclass(frozen=True)
class DnnArch:
    vocab_size: int
    n_reviewers: int          # table rows, row 0 = unknown
    n_items: int
    embed_dim: int = 32
    hidden: int = 100
    id_embed_dim: int = 20
    # (max reviewer count, max item count) when the engineered counts are appended
    count_scale: Optional[tuple] = None

    @property
    def head_width(self) -> int:
        extra = 2 if self.count_scale else 0
        return self.hidden + N_CATEGORIES + 2 * self.id_embed_dim + 1 + extra


@dataclass(frozen=True)
class DnnTrainConfig:
    learning_rate: float = 0.01
    epochs: int = 100
    batch_size: int = 128
    seed: int = 42
    init_scale: float = 0.05
    clamp_predictions: bool = True

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass
class LstmParams:
    """Gate blocks are stacked along the last axis in the order i, f, g, o."""

    w_input: np.ndarray   # [E, 4H]
    w_hidden: np.ndarray  # [H, 4H]
    bias: np.ndarray      # [4H]

    @property
    def hidden(self) -> int:
        return self.w_hidden.shape[0]

    @property
    def input_dim(self) -> int:
        return self.w_input.shape[0]

    def gate_slice(self, gate: int) -> slice:
        h = self.hidden
        return slice(gate * h, (gate + 1) * h)


@dataclass
class DnnModel:
    arch: DnnArch
    text_embedding: np.ndarray      # [V, E]
    reviewer_embedding: np.ndarray  # [R, W]
    item_embedding: np.ndarray      # [I, W]
    lstm: LstmParams
    head_weights: np.ndarray        # [1, D]
    head_bias: np.ndarray           # [1]

    @classmethod
    def init(cls, arch: DnnArch, seed: int = 42, scale: float = 0.05) -> "DnnModel":
        rng = np.random.default_rng(seed)
        E, H, W = arch.embed_dim, arch.hidden, arch.id_embed_dim

        def u(*shape):
            return rng.uniform(-scale, scale, size=shape)

        return cls(
            arch=arch,
            text_embedding=u(arch.vocab_size, E),
            reviewer_embedding=u(arch.n_reviewers, W),
            item_embedding=u(arch.n_items, W),
            lstm=LstmParams(u(E, N_GATES * H), u(H, N_GATES * H), np.zeros(N_GATES * H)),
            head_weights=u(1, arch.head_width),
            head_bias=np.zeros(1),
        )

    @classmethod
    def zeros(cls, arch: DnnArch) -> "DnnModel":
        E, H, W = arch.embed_dim, arch.hidden, arch.id_embed_dim
        return cls(arch, np.zeros((arch.vocab_size, E)), np.zeros((arch.n_reviewers, W)),
                   np.zeros((arch.n_items, W)),
                   LstmParams(np.zeros((E, 4 * H)), np.zeros((H, 4 * H)), np.zeros(4 * H)),
                   np.zeros((1, arch.head_width)), np.zeros(1))

    def parameters(self) -> dict:
        """Named views of every trainable array (updates through them are in place)."""
        return {
            "text_embedding": self.text_embedding,
            "reviewer_embedding": self.reviewer_embedding,
            "item_embedding": self.item_embedding,
            "lstm_w_input": self.lstm.w_input,
            "lstm_w_hidden": self.lstm.w_hidden,
            "lstm_bias": self.lstm.bias,
            "head_weights": self.head_weights,
            "head_bias": self.head_bias,
        }

    @classmethod
    def from_parameters(cls, arch: DnnArch, params: dict) -> "DnnModel":
        return cls(arch, params["text_embedding"], params["reviewer_embedding"], params["item_embedding"],
                   LstmParams(params["lstm_w_input"], params["lstm_w_hidden"], params["lstm_bias"]),
                   params["head_weights"], params["head_bias"])


# --- single-example primitives ---------------------------------------------------------

def embed_lookup(table: np.ndarray, index: int) -> np.ndarray:
    if not 0 <= index < table.shape[0]:
        raise IndexError(f"embedding index {index} out of range for table with {table.shape[0]} rows")
    return table[index]


def embed_backward(table_shape: tuple, indices: np.ndarray, grad_rows: np.ndarray) -> np.ndarray:
    """Scatter-add row gradients; rows never looked up get exactly zero."""
    grad = np.zeros(table_shape)
    np.add.at(grad, np.asarray(indices).reshape(-1), grad_rows.reshape(-1, table_shape[1]))
    return grad


def _lstm_scan(xs: np.ndarray, p: LstmParams):
    """Run the recurrence over xs [B, L, E] from zero state; returns (h_L, cache)."""
    B, L, E = xs.shape
    if E != p.input_dim:
        raise ValueError(f"input width {E} does not match LSTM input width {p.input_dim}")
    H = p.hidden
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    cache = []
    for t in range(L):
        z = xs[:, t] @ p.w_input + h @ p.w_hidden + p.bias
        i = sigmoid(z[:, :H])
        f = sigmoid(z[:, H:2 * H])
        g = np.tanh(z[:, 2 * H:3 * H])
        o = sigmoid(z[:, 3 * H:])
        c_prev, h_prev = c, h
        c = f * c_prev + i * g
        tc = np.tanh(c)
        h = o * tc
        cache.append((i, f, g, o, c_prev, h_prev, tc))
    return h, cache


def _lstm_scan_backward(dh: np.ndarray, xs: np.ndarray, p: LstmParams, cache):
    """Backpropagate dL/dh_L through time. Returns (dxs, dW_input, dW_hidden, dbias)."""
    dxs = np.zeros_like(xs)
    dWx = np.zeros_like(p.w_input)
    dWh = np.zeros_like(p.w_hidden)
    db = np.zeros_like(p.bias)
    dc = np.zeros_like(dh)
    for t in range(xs.shape[1] - 1, -1, -1):
        i, f, g, o, c_prev, h_prev, tc = cache[t]
        do = dh * tc
        dc = dc + dh * o * (1.0 - tc * tc)
        dz = np.concatenate([
            dc * g * i * (1.0 - i),
            dc * c_prev * f * (1.0 - f),
            dc * i * (1.0 - g * g),
            do * o * (1.0 - o),
        ], axis=1)
        dWx += xs[:, t].T @ dz
        dWh += h_prev.T @ dz
        db += dz.sum(axis=0)
        dxs[:, t] = dz @ p.w_input.T
        dh = dz @ p.w_hidden.T
        dc = dc * f
    return dxs, dWx, dWh, db


def lstm_forward(embedded_sequence: np.ndarray, params: LstmParams) -> np.ndarray:
    """Final hidden state of one sequence [L, E]; every step (padding included) is processed."""
    xs = np.asarray(embedded_sequence, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[0] < 1:
        raise ValueError("expected a non-empty [L, E] sequence")
    h, _ = _lstm_scan(xs[None], params)
    return h[0]


# --- batched forward / backward ----------------------------------------------------------

@dataclass
class Batch:
    token_ids: np.ndarray   # [B, L] int
    onehot: np.ndarray      # [B, 5]
    time: np.ndarray        # [B]
    reviewer: np.ndarray    # [B] int
    item: np.ndarray        # [B] int
    counts: np.ndarray      # [B, 2] raw engineered counts
    target: np.ndarray      # [B]

    def __len__(self):
        return len(self.target)

    def subset(self, idx) -> "Batch":
        return Batch(self.token_ids[idx], self.onehot[idx], self.time[idx], self.reviewer[idx],
                     self.item[idx], self.counts[idx], self.target[idx])


def collate(examples: Sequence) -> Batch:
    if not examples:
        raise ValueError("cannot collate an empty example list")
    return Batch(
        token_ids=np.stack([e.token_ids for e in examples]).astype(np.int64),
        onehot=np.stack([e.category_onehot for e in examples]).astype(np.float64),
        time=np.array([e.time_norm for e in examples], dtype=np.float64),
        reviewer=np.array([e.reviewer_idx for e in examples], dtype=np.int64),
        item=np.array([e.item_idx for e in examples], dtype=np.int64),
        counts=np.array([[e.reviewer_history, e.product_popularity] for e in examples], dtype=np.float64),
        target=np.array([e.target for e in examples], dtype=np.float64),
    )


def _check_indices(model: DnnModel, batch: Batch) -> None:
    for name, idx, table in (("token", batch.token_ids, model.text_embedding),
                             ("reviewer", batch.reviewer, model.reviewer_embedding),
                             ("item", batch.item, model.item_embedding)):
        if idx.size and (idx.min() < 0 or idx.max() >= table.shape[0]):
            raise IndexError(f"{name} index out of range for table with {table.shape[0]} rows")


def _forward(model: DnnModel, batch: Batch):
    _check_indices(model, batch)
    arch = model.arch
    xs = model.text_embedding[batch.token_ids]
    h, cache = _lstm_scan(xs, model.lstm)
    parts = [h, batch.onehot, model.item_embedding[batch.item],
             model.reviewer_embedding[batch.reviewer], batch.time[:, None]]
    if arch.count_scale:
        parts.append(batch.counts / np.asarray(arch.count_scale, dtype=np.float64))
    feat = np.concatenate(parts, axis=1)
    out = feat @ model.head_weights[0] + model.head_bias[0]
    return out, (xs, cache, feat)


def forward_batch(model: DnnModel, batch: Batch) -> np.ndarray:
    """Raw (unclamped) predictions for a batch."""
    return _forward(model, batch)[0]


def loss_and_grads(model: DnnModel, batch: Batch):
    """Batch MSE on raw outputs and the gradient for every named parameter."""
    out, (xs, cache, feat) = _forward(model, batch)
    arch = model.arch
    H, W = arch.hidden, arch.id_embed_dim
    diff = out - batch.target
    loss = float(np.mean(diff * diff))
    dout = 2.0 * diff / len(diff)

    dfeat = np.outer(dout, model.head_weights[0])
    grads = {
        "head_weights": (dout @ feat)[None, :],
        "head_bias": np.array([dout.sum()]),
    }
    off = H + N_CATEGORIES
    grads["item_embedding"] = embed_backward(model.item_embedding.shape, batch.item, dfeat[:, off:off + W])
    grads["reviewer_embedding"] = embed_backward(model.reviewer_embedding.shape, batch.reviewer,
                                                 dfeat[:, off + W:off + 2 * W])
    dxs, dWx, dWh, db = _lstm_scan_backward(dfeat[:, :H], xs, model.lstm, cache)
    grads["lstm_w_input"] = dWx
    grads["lstm_w_hidden"] = dWh
    grads["lstm_bias"] = db
    grads["text_embedding"] = embed_backward(model.text_embedding.shape, batch.token_ids, dxs)
    return loss, grads


def dnn_forward(example, model: DnnModel) -> float:
    return float(forward_batch(model, collate([example]))[0])


def clamp_rating(raw):
    return np.clip(raw, 1.0, 5.0)


def dnn_predict(model: DnnModel, example) -> float:
    return float(clamp_rating(dnn_forward(example, model)))


def predict_batch(model: DnnModel, examples: Sequence, clamp: bool = True,
                  chunk: int = 512) -> np.ndarray:
    batch = collate(examples)
    out = np.concatenate([forward_batch(model, batch.subset(slice(s, s + chunk)))
                          for s in range(0, len(batch), chunk)])
    return clamp_rating(out) if clamp else out


# --- training ----------------------------------------------------------------------------

@dataclass
class LossCurve:
    train_mse: list = field(default_factory=list)
    validation_mse: list = field(default_factory=list)

    def __len__(self):
        return len(self.train_mse)

    def rows(self):
        for epoch, tr in enumerate(self.train_mse, 1):
            va = self.validation_mse[epoch - 1] if self.validation_mse else None
            yield epoch, tr, va

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epoch", "train_mse", "validation_mse"])
        for epoch, tr, va in self.rows():
            w.writerow([epoch, repr(tr), "" if va is None else repr(va)])
        return buf.getvalue()


def _batch_mse(model: DnnModel, batch: Batch, chunk: int = 512) -> float:
    out = np.concatenate([forward_batch(model, batch.subset(slice(s, s + chunk)))
                          for s in range(0, len(batch), chunk)])
    return mse_loss(out, batch.target)


def train_dnn(train: Sequence, validation: Optional[Sequence], config: DnnTrainConfig,
              arch: DnnArch, model: Optional[DnnModel] = None):
    """Minibatch Adam on MSE of raw outputs. Returns ``(model, LossCurve)``.

    Deterministic given (example order, config, arch): the seed drives both
    initialization and the per-epoch shuffles.
    """
    if not train:
        raise ValueError("train_dnn needs a non-empty training set")
    rng = np.random.default_rng(config.seed)
    if model is None:
        model = DnnModel.init(arch, seed=config.seed, scale=config.init_scale)
    train_batch = collate(train)
    val_batch = collate(validation) if validation else None
    optimizer = Adam(AdamHyper(learning_rate=config.learning_rate))
    params = model.parameters()
    curve = LossCurve()
    n = len(train_batch)
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = train_batch.subset(order[start:start + config.batch_size])
            _, grads = loss_and_grads(model, batch)
            optimizer.step(params, grads)
        curve.train_mse.append(_batch_mse(model, train_batch))
        if val_batch is not None:
            curve.validation_mse.append(_batch_mse(model, val_batch))
        log.info("epoch %d/%d train_mse=%.4f%s", epoch + 1, config.epochs, curve.train_mse[-1],
                 f" validation_mse={curve.validation_mse[-1]:.4f}" if val_batch is not None else "")
    for name, p in params.items():
        check_finite(p, name)
    return model, curve
