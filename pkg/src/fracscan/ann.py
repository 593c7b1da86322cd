"""Four-layer feed-forward classifier: 22 inputs, two hidden layers, one logistic output.

Plain numpy implementation with mini-batch SGD on binary cross-entropy.
Training is single-threaded and fully seeded so identical (seed, data, config)
always reproduces identical weights.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DivergenceError, FracscanError
from .features import FeatureNormalizer, VECTOR_WIDTH

MODEL_FORMAT_VERSION = 1


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class TrainConfig:
    learning_rate: float = 0.05
    epochs: int = 500
    batch_size: int = 16
    seed: int = 0
    h1: int = 16
    h2: int = 8
    patience: int = 50
    val_fraction: float = 0.1
    activation: str = "sigmoid"

    def validate(self) -> None:
        if self.learning_rate < 0:
            raise FracscanError(f"learning rate must be >= 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise FracscanError(f"epochs must be >= 1, got {self.epochs}")


@dataclass
class NetworkModel:
    layer_sizes: list[int]
    weights: list[np.ndarray]  # weights[l] has shape (out, in)
    biases: list[np.ndarray]  # biases[l] has shape (out,)
    activation: str = "sigmoid"
    normalizer: FeatureNormalizer | None = None
    seed: int = 0
    threshold: float = 0.5
    meta: dict = field(default_factory=dict)

    def copy_weights(self) -> tuple[list[np.ndarray], list[np.ndarray]]:
        return [w.copy() for w in self.weights], [b.copy() for b in self.biases]


def init_model(cfg: TrainConfig, n_inputs: int = VECTOR_WIDTH) -> NetworkModel:
    """Fresh model with zero biases and symmetric scaled-uniform weights."""
    cfg.validate()
    sizes = [n_inputs, cfg.h1, cfg.h2, 1]
    rng = np.random.default_rng(cfg.seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        scale = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-scale, scale, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return NetworkModel(layer_sizes=sizes, weights=weights, biases=biases, activation=cfg.activation, seed=cfg.seed)


def forward_batch(model: NetworkModel, X: np.ndarray) -> np.ndarray:
    """Scores in (0, 1) for a batch of input vectors, shape (n, n_inputs) -> (n,)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.layer_sizes[0]:
        raise FracscanError(f"expected input width {model.layer_sizes[0]}, got {X.shape[1]}")
    a = X.T
    for w, b in zip(model.weights, model.biases):
        a = sigmoid(w @ a + b[:, None])
    return a.ravel()


def forward(model: NetworkModel, v: np.ndarray) -> float:
    """Fracture score of a single feature vector."""
    return float(forward_batch(model, np.asarray(v, dtype=np.float64).reshape(1, -1))[0])


def classify(model: NetworkModel, v: np.ndarray, threshold: float = 0.5) -> str:
    if not (0 < threshold < 1):
        raise FracscanError(f"threshold must lie in (0, 1), got {threshold}")
    return "fractured" if forward(model, v) >= threshold else "non-fractured"


def bce_loss(scores: np.ndarray, y: np.ndarray, eps: float = 1e-12) -> float:
    p = np.clip(scores, eps, 1.0 - eps)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def _forward_activations(model: NetworkModel, X: np.ndarray) -> list[np.ndarray]:
    activations = [X.T]
    for w, b in zip(model.weights, model.biases):
        activations.append(sigmoid(w @ activations[-1] + b[:, None]))
    return activations


def gradients(model: NetworkModel, X: np.ndarray, y: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Analytic mean-BCE gradients for every weight matrix and bias vector."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    n = len(y)
    acts = _forward_activations(model, X)
    # With a logistic output and cross-entropy, the output delta collapses to (p - y)/n.
    delta = (acts[-1] - y[None, :]) / n
    grad_w = [np.empty(0)] * len(model.weights)
    grad_b = [np.empty(0)] * len(model.biases)
    for layer in range(len(model.weights) - 1, -1, -1):
        grad_w[layer] = delta @ acts[layer].T
        grad_b[layer] = delta.sum(axis=1)
        if layer > 0:
            a = acts[layer]
            delta = (model.weights[layer].T @ delta) * a * (1.0 - a)
    return grad_w, grad_b


def train(model: NetworkModel, X: np.ndarray, y: np.ndarray, cfg: TrainConfig) -> NetworkModel:
    """Mini-batch SGD with early stopping on a seeded validation carve-out.

    Returns a new model holding the weights with the best validation loss
    (training loss when ``val_fraction`` leaves no validation rows).
    """
    cfg.validate()
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    if len(y) == 0:
        raise FracscanError("training set is empty")

    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(len(y))
    n_val = int(round(cfg.val_fraction * len(y)))
    val_idx, train_idx = order[:n_val], order[n_val:]
    if len(train_idx) == 0:
        train_idx, val_idx = order, order[:0]
    X_tr, y_tr = X[train_idx], y[train_idx]
    X_val, y_val = X[val_idx], y[val_idx]

    weights, biases = model.copy_weights()
    work = NetworkModel(
        layer_sizes=list(model.layer_sizes),
        weights=weights,
        biases=biases,
        activation=model.activation,
        normalizer=model.normalizer,
        seed=cfg.seed,
    )
    best_w, best_b = work.copy_weights()
    best_loss = np.inf
    stale = 0
    batch = max(1, cfg.batch_size)

    for epoch in range(cfg.epochs):
        perm = rng.permutation(len(y_tr))
        for start in range(0, len(y_tr), batch):
            idx = perm[start : start + batch]
            gw, gb = gradients(work, X_tr[idx], y_tr[idx])
            for layer in range(len(work.weights)):
                work.weights[layer] -= cfg.learning_rate * gw[layer]
                work.biases[layer] -= cfg.learning_rate * gb[layer]
        monitor_x, monitor_y = (X_val, y_val) if len(y_val) else (X_tr, y_tr)
        loss = bce_loss(forward_batch(work, monitor_x), monitor_y)
        if not np.isfinite(loss):
            raise DivergenceError(epoch)
        if loss < best_loss - 1e-12:
            best_loss = loss
            best_w, best_b = work.copy_weights()
            stale = 0
        else:
            stale += 1
            if cfg.patience > 0 and stale >= cfg.patience:
                break

    return NetworkModel(
        layer_sizes=list(model.layer_sizes),
        weights=best_w,
        biases=best_b,
        activation=model.activation,
        normalizer=model.normalizer,
        seed=cfg.seed,
        meta={"best_loss": best_loss, "val_rows": int(len(y_val))},
    )


def numeric_gradients(
    model: NetworkModel, X: np.ndarray, y: np.ndarray, eps: float = 1e-5
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Central finite-difference gradients, for checking the analytic ones."""

    def loss_with(params_w, params_b):
        probe = NetworkModel(
            layer_sizes=list(model.layer_sizes),
            weights=params_w,
            biases=params_b,
            activation=model.activation,
        )
        return bce_loss(forward_batch(probe, X), np.asarray(y, dtype=np.float64).ravel())

    grad_w, grad_b = [], []
    for layer, w in enumerate(model.weights):
        gw = np.zeros_like(w)
        for i in range(w.shape[0]):
            for j in range(w.shape[1]):
                wp = [m.copy() for m in model.weights]
                wm = [m.copy() for m in model.weights]
                wp[layer][i, j] += eps
                wm[layer][i, j] -= eps
                gw[i, j] = (loss_with(wp, model.biases) - loss_with(wm, model.biases)) / (2 * eps)
        grad_w.append(gw)
    for layer, b in enumerate(model.biases):
        gb = np.zeros_like(b)
        for i in range(len(b)):
            bp = [m.copy() for m in model.biases]
            bm = [m.copy() for m in model.biases]
            bp[layer][i] += eps
            bm[layer][i] -= eps
            gb[i] = (loss_with(model.weights, bp) - loss_with(model.weights, bm)) / (2 * eps)
        grad_b.append(gb)
    return grad_w, grad_b


def save_model(model: NetworkModel, path: str | Path) -> None:
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "layer_sizes": model.layer_sizes,
        "weights": [w.tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
        "activation": model.activation,
        "normalizer": model.normalizer.to_dict() if model.normalizer is not None else None,
        "seed": model.seed,
        "threshold": model.threshold,
    }
    Path(path).write_text(json.dumps(doc))


def load_model(path: str | Path) -> NetworkModel:
    doc = json.loads(Path(path).read_text())
    normalizer = FeatureNormalizer.from_dict(doc["normalizer"]) if doc.get("normalizer") else None
    return NetworkModel(
        layer_sizes=list(doc["layer_sizes"]),
        weights=[np.array(w, dtype=np.float64) for w in doc["weights"]],
        biases=[np.array(b, dtype=np.float64) for b in doc["biases"]],
        activation=doc.get("activation", "sigmoid"),
        normalizer=normalizer,
        seed=int(doc.get("seed", 0)),
        threshold=float(doc.get("threshold", 0.5)),
    )
