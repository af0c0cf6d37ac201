"""From-scratch regressors and naive benchmarks behind one fit/predict contract.

Implemented here: CART regression trees, bagged forests with per-split
feature subsampling, k-nearest-neighbors, a linear epsilon-insensitive
support vector regressor trained by full-batch subgradient descent, and
a one-hidden-layer perceptron trained by mini-batch gradient descent.
Plus the three naive baselines: persistence (bm1), the train-set
average cycle curve indexed by the target run's cycle position (bm2,
deliberately a hindsight benchmark), and the global train mean (bm3).

Every predict is pure and deterministic once fitted; all randomness is
driven by explicit seeds through independent substreams, so a forest
trained on eight threads predicts bit-identically to a serial one.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import (
    ConfigError,
    DivergedLoss,
    EmptyTrain,
    EmptyTraining,
    KTooLarge,
    ModelError,
)
from .features import Standardizer, SupervisedSet

MODEL_KINDS = ("dt", "rf", "knn", "svr", "mlp")
BENCHMARK_KINDS = ("bm1", "bm2", "bm3")
MODEL_FORMAT = "chamberhealth-model"
MODEL_FORMAT_VERSION = 1

DEFAULT_HYPERPARAMS: dict[str, dict[str, float]] = {
    "dt": {"max_depth": 8, "min_samples_leaf": 5},
    "rf": {"n_trees": 100, "max_depth": 8, "min_samples_leaf": 5, "features_per_split": 0},
    "knn": {"k": 5},
    "svr": {"epsilon": 0.5, "reg_lambda": 1e-4, "steps": 10_000, "step_size": 0.1},
    "mlp": {"hidden_units": 64, "epochs": 200, "batch_size": 32, "learning_rate": 1e-3},
}

# distance/gradient models consume standardized features; axis-aligned
# trees are scale invariant and consume them raw
STANDARDIZED_KINDS = ("knn", "svr", "mlp")


@dataclass(frozen=True)
class RegressorSpec:
    """Which model to train, with what hyperparameters and seed."""

    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {self.kind!r}, expected one of {MODEL_KINDS}")
        unknown = set(self.params) - set(DEFAULT_HYPERPARAMS[self.kind])
        if unknown:
            raise ConfigError(f"unknown hyperparameters for {self.kind}: {sorted(unknown)}")

    def resolved(self) -> dict:
        out = dict(DEFAULT_HYPERPARAMS[self.kind])
        out.update(self.params)
        return out


# -- CART regression tree -------------------------------------------------


class _Node:
    __slots__ = ("feature", "threshold", "left", "right", "value", "n")

    def __init__(self, value: float, n: int):
        self.feature: Optional[int] = None
        self.threshold = 0.0
        self.left: Optional["_Node"] = None
        self.right: Optional["_Node"] = None
        self.value = value
        self.n = n


def _best_split(
    X: np.ndarray, y: np.ndarray, feats: np.ndarray, min_leaf: int
) -> Optional[tuple[int, float, float]]:
    """Exhaustive threshold search over the given (ascending) feature ids.

    Candidate thresholds are midpoints between consecutive distinct
    sorted values; the score is the summed left+right SSE computed from
    prefix sums. SSE ties resolve to the lower feature index, then the
    lower threshold (first argmin in ascending threshold order).
    """
    n = y.size
    if n < 2 * min_leaf:
        return None
    Xf = X[:, feats]
    order = np.argsort(Xf, axis=0, kind="stable")
    xs = np.take_along_axis(Xf, order, axis=0)
    ys = y[order]
    s1 = np.cumsum(ys, axis=0)
    s2 = np.cumsum(ys * ys, axis=0)
    total1 = s1[-1, :]
    total2 = s2[-1, :]
    nl = np.arange(1, n, dtype=np.float64)[:, None]
    nr = n - nl
    s1l, s2l = s1[:-1, :], s2[:-1, :]
    sse = (s2l - s1l * s1l / nl) + ((total2 - s2l) - (total1 - s1l) * (total1 - s1l) / nr)
    valid = (xs[:-1, :] < xs[1:, :]) & (nl >= min_leaf) & (nr >= min_leaf)
    sse = np.where(valid, sse, np.inf)

    best: Optional[tuple[int, float, float]] = None
    for j in range(feats.size):
        col = sse[:, j]
        i = int(np.argmin(col))
        score = float(col[i])
        if not math.isfinite(score):
            continue
        if best is None or score < best[2]:
            best = (int(feats[j]), 0.5 * (float(xs[i, j]) + float(xs[i + 1, j])), score)
    return best


def _build_tree(
    X: np.ndarray,
    y: np.ndarray,
    depth: int,
    max_depth: int,
    min_leaf: int,
    features_per_split: Optional[int],
    rng: Optional[np.random.Generator],
) -> _Node:
    node = _Node(value=float(y.mean()), n=int(y.size))
    if depth >= max_depth or y.size < 2 * min_leaf or float(np.ptp(y)) == 0.0:
        return node
    m = X.shape[1]
    if features_per_split is not None and features_per_split < m:
        feats = np.sort(rng.choice(m, size=features_per_split, replace=False))
    else:
        feats = np.arange(m)
    split = _best_split(X, y, feats, min_leaf)
    if split is None:
        return node
    feature, threshold, _ = split
    mask = X[:, feature] <= threshold
    node.feature = feature
    node.threshold = threshold
    node.left = _build_tree(X[mask], y[mask], depth + 1, max_depth, min_leaf, features_per_split, rng)
    node.right = _build_tree(X[~mask], y[~mask], depth + 1, max_depth, min_leaf, features_per_split, rng)
    return node


def _predict_tree(root: _Node, X: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[0], dtype=np.float64)
    stack = [(root, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if node.feature is None:
            out[idx] = node.value
            continue
        mask = X[idx, node.feature] <= node.threshold
        stack.append((node.left, idx[mask]))
        stack.append((node.right, idx[~mask]))
    return out


def _node_to_dict(node: _Node) -> dict:
    if node.feature is None:
        return {"value": node.value, "n": node.n}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "value": node.value,
        "n": node.n,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(data: dict) -> _Node:
    node = _Node(value=float(data["value"]), n=int(data["n"]))
    if "feature" in data:
        node.feature = int(data["feature"])
        node.threshold = float(data["threshold"])
        node.left = _node_from_dict(data["left"])
        node.right = _node_from_dict(data["right"])
    return node


@dataclass
class DTModel:
    root: _Node
    max_depth: int
    min_samples_leaf: int

    def predict(self, X: np.ndarray) -> np.ndarray:
        return _predict_tree(self.root, np.asarray(X, dtype=np.float64))

    def to_payload(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "root": _node_to_dict(self.root),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "DTModel":
        return cls(
            root=_node_from_dict(payload["root"]),
            max_depth=int(payload["max_depth"]),
            min_samples_leaf=int(payload["min_samples_leaf"]),
        )


def fit_decision_tree(
    X: np.ndarray, y: np.ndarray, max_depth: int = 8, min_samples_leaf: int = 5
) -> DTModel:
    """Greedy CART: axis-aligned splits minimizing summed squared error,
    leaf value = mean target. Stops on depth, leaf size or zero variance."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y.size == 0:
        raise EmptyTraining("decision tree needs at least one sample")
    if max_depth < 0 or min_samples_leaf < 1:
        raise ConfigError("need max_depth >= 0 and min_samples_leaf >= 1")
    root = _build_tree(X, y, 0, max_depth, min_samples_leaf, None, None)
    return DTModel(root=root, max_depth=max_depth, min_samples_leaf=min_samples_leaf)


# -- random forest ---------------------------------------------------------


@dataclass
class RFModel:
    trees: list[_Node]
    n_trees: int
    max_depth: int
    min_samples_leaf: int
    features_per_split: int
    bootstrap: bool
    seed: int

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        preds = np.stack([_predict_tree(t, X) for t in self.trees])
        return preds.mean(axis=0)

    def to_payload(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "features_per_split": self.features_per_split,
            "bootstrap": self.bootstrap,
            "seed": self.seed,
            "trees": [_node_to_dict(t) for t in self.trees],
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "RFModel":
        return cls(
            trees=[_node_from_dict(t) for t in payload["trees"]],
            n_trees=int(payload["n_trees"]),
            max_depth=int(payload["max_depth"]),
            min_samples_leaf=int(payload["min_samples_leaf"]),
            features_per_split=int(payload["features_per_split"]),
            bootstrap=bool(payload["bootstrap"]),
            seed=int(payload["seed"]),
        )


def _fit_forest_tree(
    X: np.ndarray,
    y: np.ndarray,
    tree_index: int,
    seed: int,
    max_depth: int,
    min_leaf: int,
    features_per_split: int,
    bootstrap: bool,
) -> _Node:
    # independent substream per (seed, tree): parallel == serial
    rng = np.random.default_rng(np.random.SeedSequence((seed, tree_index)))
    if bootstrap:
        idx = rng.integers(0, y.size, size=y.size)
        Xb, yb = X[idx], y[idx]
    else:
        Xb, yb = X, y
    fps = features_per_split if features_per_split < X.shape[1] else None
    return _build_tree(Xb, yb, 0, max_depth, min_leaf, fps, rng)


def fit_random_forest(
    X: np.ndarray,
    y: np.ndarray,
    n_trees: int = 100,
    max_depth: int = 8,
    min_samples_leaf: int = 5,
    features_per_split: Optional[int] = None,
    seed: int = 0,
    bootstrap: bool = True,
    threads: int = 1,
) -> RFModel:
    """Bagged CART trees with a uniform random feature subset at each split.

    features_per_split defaults to ceil(m / 3). Prediction is the plain
    mean over trees, so it is independent of training order.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y.size == 0:
        raise EmptyTraining("random forest needs at least one sample")
    if n_trees < 1:
        raise ConfigError(f"n_trees must be >= 1, got {n_trees}")
    m = X.shape[1]
    fps = int(features_per_split) if features_per_split else int(math.ceil(m / 3))
    fps = max(1, min(fps, m))

    def build(i: int) -> _Node:
        return _fit_forest_tree(X, y, i, seed, max_depth, min_samples_leaf, fps, bootstrap)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            trees = list(pool.map(build, range(n_trees)))
    else:
        trees = [build(i) for i in range(n_trees)]
    return RFModel(
        trees=trees,
        n_trees=n_trees,
        max_depth=max_depth,
        min_samples_leaf=min_samples_leaf,
        features_per_split=fps,
        bootstrap=bootstrap,
        seed=seed,
    )


# -- k nearest neighbors -----------------------------------------------------


@dataclass
class KNNModel:
    X: np.ndarray
    y: np.ndarray
    k: int

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(X.shape[0], dtype=np.float64)
        for i in range(X.shape[0]):
            d2 = np.sum((self.X - X[i]) ** 2, axis=1)
            # stable sort: distance ties resolve to the lower train index
            nearest = np.argsort(d2, kind="stable")[: self.k]
            out[i] = self.y[nearest].mean()
        return out

    def to_payload(self) -> dict:
        return {"k": self.k, "X": self.X.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_payload(cls, payload: dict) -> "KNNModel":
        return cls(
            X=np.array(payload["X"], dtype=np.float64),
            y=np.array(payload["y"], dtype=np.float64),
            k=int(payload["k"]),
        )


def fit_knn(X_std: np.ndarray, y: np.ndarray, k: int = 5) -> KNNModel:
    """Memorize the (standardized) training set; predict the mean target
    of the k nearest rows by Euclidean distance."""
    X_std = np.asarray(X_std, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y.size == 0:
        raise EmptyTraining("knn needs at least one sample")
    if not 1 <= k <= y.size:
        raise KTooLarge(f"k must be in [1, {y.size}], got {k}")
    return KNNModel(X=X_std.copy(), y=y.copy(), k=k)


# -- linear epsilon-insensitive SVR ------------------------------------------


@dataclass
class SVRModel:
    w: np.ndarray
    b: float
    epsilon: float
    reg_lambda: float

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.w + self.b

    def to_payload(self) -> dict:
        return {
            "w": self.w.tolist(),
            "b": self.b,
            "epsilon": self.epsilon,
            "reg_lambda": self.reg_lambda,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "SVRModel":
        return cls(
            w=np.array(payload["w"], dtype=np.float64),
            b=float(payload["b"]),
            epsilon=float(payload["epsilon"]),
            reg_lambda=float(payload["reg_lambda"]),
        )


def fit_linear_svr(
    X_std: np.ndarray,
    y: np.ndarray,
    epsilon: float = 0.5,
    reg_lambda: float = 1e-4,
    steps: int = 10_000,
    step_size: float = 0.1,
    seed: int = 0,
) -> SVRModel:
    """Minimize lambda*||w||^2 + mean(max(0, |y - w.x - b| - epsilon)).

    Full-batch subgradient descent with step decay step_size/sqrt(1+t),
    starting from w = 0, b = mean(y); the final iterate is returned.
    The loss is a mean, so duplicating every row leaves the fit
    unchanged. Full-batch updates are already deterministic; the seed is
    accepted for interface uniformity but never consumed.
    """
    X = np.asarray(X_std, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y.size == 0:
        raise EmptyTraining("svr needs at least one sample")
    n = y.size
    w = np.zeros(X.shape[1], dtype=np.float64)
    b = float(y.mean())
    for t in range(steps):
        r = y - (X @ w + b)
        active = np.abs(r) > epsilon
        sign = np.sign(r) * active
        grad_w = 2.0 * reg_lambda * w - (X.T @ sign) / n
        grad_b = -float(sign.sum()) / n
        step = step_size / math.sqrt(1.0 + t)
        w -= step * grad_w
        b -= step * grad_b
    return SVRModel(w=w, b=b, epsilon=epsilon, reg_lambda=reg_lambda)


# -- one-hidden-layer MLP -----------------------------------------------------


def mlp_init(n_in: int, hidden_units: int, seed: int) -> tuple[np.ndarray, ...]:
    """Seeded uniform(+-sqrt(6/(fan_in+fan_out))) weights, zero biases."""
    rng = np.random.default_rng(seed)
    a1 = math.sqrt(6.0 / (n_in + hidden_units))
    a2 = math.sqrt(6.0 / (hidden_units + 1))
    W1 = rng.uniform(-a1, a1, size=(n_in, hidden_units))
    b1 = np.zeros(hidden_units)
    W2 = rng.uniform(-a2, a2, size=(hidden_units, 1))
    b2 = np.zeros(1)
    return W1, b1, W2, b2


def mlp_loss(params: Sequence[np.ndarray], X: np.ndarray, y: np.ndarray) -> float:
    """Mean squared error of the relu-hidden, linear-output network."""
    W1, b1, W2, b2 = params
    hidden = np.maximum(X @ W1 + b1, 0.0)
    pred = (hidden @ W2 + b2).ravel()
    return float(np.mean((pred - y) ** 2))


def mlp_gradients(
    params: Sequence[np.ndarray], X: np.ndarray, y: np.ndarray
) -> tuple[np.ndarray, ...]:
    """Backprop gradients of mlp_loss w.r.t. every parameter array."""
    W1, b1, W2, b2 = params
    n = y.size
    z = X @ W1 + b1
    hidden = np.maximum(z, 0.0)
    pred = (hidden @ W2 + b2).ravel()
    dpred = (2.0 / n) * (pred - y)[:, None]
    dW2 = hidden.T @ dpred
    db2 = dpred.sum(axis=0)
    dhidden = dpred @ W2.T
    dz = dhidden * (z > 0.0)
    dW1 = X.T @ dz
    db1 = dz.sum(axis=0)
    return dW1, db1, dW2, db2


@dataclass
class MLPModel:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        hidden = np.maximum(X @ self.W1 + self.b1, 0.0)
        return (hidden @ self.W2 + self.b2).ravel()

    def to_payload(self) -> dict:
        return {
            "W1": self.W1.tolist(),
            "b1": self.b1.tolist(),
            "W2": self.W2.tolist(),
            "b2": self.b2.tolist(),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "MLPModel":
        return cls(
            W1=np.array(payload["W1"], dtype=np.float64),
            b1=np.array(payload["b1"], dtype=np.float64),
            W2=np.array(payload["W2"], dtype=np.float64),
            b2=np.array(payload["b2"], dtype=np.float64),
        )


def fit_mlp(
    X_std: np.ndarray,
    y: np.ndarray,
    hidden_units: int = 64,
    epochs: int = 200,
    batch_size: int = 32,
    learning_rate: float = 1e-3,
    seed: int = 0,
) -> MLPModel:
    """Mini-batch gradient descent on mean squared error.

    Batch order is a seeded permutation per epoch (the final partial
    batch is kept), so the whole trajectory is reproducible from the
    seed. Raises DivergedLoss as soon as the loss goes non-finite.
    """
    X = np.asarray(X_std, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y.size == 0:
        raise EmptyTraining("mlp needs at least one sample")
    if batch_size < 1 or epochs < 1 or hidden_units < 1:
        raise ConfigError("hidden_units, epochs and batch_size must be >= 1")
    params = list(mlp_init(X.shape[1], hidden_units, seed))
    rng = np.random.default_rng(np.random.SeedSequence((seed, 1)))
    n = y.size
    for _ in range(epochs):
        perm = rng.permutation(n)
        for lo in range(0, n, batch_size):
            idx = perm[lo : lo + batch_size]
            grads = mlp_gradients(params, X[idx], y[idx])
            for p, g in zip(params, grads):
                p -= learning_rate * g
        if not math.isfinite(mlp_loss(params, X, y)):
            raise DivergedLoss("mlp loss became non-finite; lower the learning rate")
    return MLPModel(*params)


# -- naive benchmarks ---------------------------------------------------------


def benchmark_predict(
    kind: str, train: SupervisedSet, test: SupervisedSet
) -> np.ndarray:
    """Predictions of one naive baseline on the test rows.

    bm1 repeats the current HI of each row (persistence); bm2 looks up
    the mean train target at the target run's cycle position, falling
    back to the nearest populated position (ties toward the lower one);
    bm3 is the global train target mean.
    """
    if train.n_rows == 0:
        raise EmptyTrain("benchmarks need a non-empty train set")
    if kind == "bm1":
        return np.array([m.hi_current for m in test.meta], dtype=np.float64)
    if kind == "bm3":
        return np.full(test.n_rows, float(train.y.mean()))
    if kind == "bm2":
        sums: dict[int, float] = {}
        counts: dict[int, int] = {}
        for value, m in zip(train.y, train.meta):
            pos = m.n_runs_target
            sums[pos] = sums.get(pos, 0.0) + float(value)
            counts[pos] = counts.get(pos, 0) + 1
        positions = np.array(sorted(sums))
        means = {pos: sums[pos] / counts[pos] for pos in sums}
        out = np.empty(test.n_rows, dtype=np.float64)
        for i, m in enumerate(test.meta):
            pos = m.n_runs_target
            if pos in means:
                out[i] = means[pos]
            else:
                gaps = np.abs(positions - pos)
                out[i] = means[int(positions[int(np.argmin(gaps))])]
        return out
    raise ConfigError(f"unknown benchmark kind {kind!r}, expected one of {BENCHMARK_KINDS}")


# -- trained-model wrapper and persistence ------------------------------------


@dataclass
class TrainedModel:
    """A fitted regressor plus the metadata needed to apply it to raw rows."""

    kind: str
    inner: Union[DTModel, RFModel, KNNModel, SVRModel, MLPModel]
    feature_names: tuple[str, ...]
    standardizer: Optional[Standardizer]
    seed: int

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1] != len(self.feature_names):
            raise ModelError(
                f"{self.kind}: expected {len(self.feature_names)} features, got {X.shape[1]}"
            )
        if self.standardizer is not None:
            X = self.standardizer.transform(X)
        return self.inner.predict(X)


def train_model(spec: RegressorSpec, train: SupervisedSet, threads: int = 1) -> TrainedModel:
    """Fit one model kind on a (fully encoded) train set."""
    params = spec.resolved()
    std = None
    X = train.X
    if spec.kind in STANDARDIZED_KINDS:
        std = Standardizer.fit(train.X)
        X = std.transform(train.X)
    if spec.kind == "dt":
        inner = fit_decision_tree(
            X, train.y, int(params["max_depth"]), int(params["min_samples_leaf"])
        )
    elif spec.kind == "rf":
        inner = fit_random_forest(
            X,
            train.y,
            n_trees=int(params["n_trees"]),
            max_depth=int(params["max_depth"]),
            min_samples_leaf=int(params["min_samples_leaf"]),
            features_per_split=int(params["features_per_split"]) or None,
            seed=spec.seed,
            threads=threads,
        )
    elif spec.kind == "knn":
        inner = fit_knn(X, train.y, int(params["k"]))
    elif spec.kind == "svr":
        inner = fit_linear_svr(
            X,
            train.y,
            epsilon=float(params["epsilon"]),
            reg_lambda=float(params["reg_lambda"]),
            steps=int(params["steps"]),
            step_size=float(params["step_size"]),
            seed=spec.seed,
        )
    else:
        inner = fit_mlp(
            X,
            train.y,
            hidden_units=int(params["hidden_units"]),
            epochs=int(params["epochs"]),
            batch_size=int(params["batch_size"]),
            learning_rate=float(params["learning_rate"]),
            seed=spec.seed,
        )
    return TrainedModel(
        kind=spec.kind,
        inner=inner,
        feature_names=train.feature_names,
        standardizer=std,
        seed=spec.seed,
    )


_PAYLOAD_CLASSES = {"dt": DTModel, "rf": RFModel, "knn": KNNModel, "svr": SVRModel, "mlp": MLPModel}


def model_to_json(model: TrainedModel) -> str:
    """Self-describing JSON with a format-version header.

    Floats are serialized via repr (shortest round-trip form), so a
    save/load cycle reproduces every parameter bit-exactly.
    """
    std = None
    if model.standardizer is not None:
        std = {"mu": model.standardizer.mu.tolist(), "sigma": model.standardizer.sigma.tolist()}
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_FORMAT_VERSION,
        "kind": model.kind,
        "seed": model.seed,
        "feature_names": list(model.feature_names),
        "standardizer": std,
        "payload": model.inner.to_payload(),
    }
    return json.dumps(doc, sort_keys=True, indent=1)


def model_from_json(text: str) -> TrainedModel:
    doc = json.loads(text)
    if doc.get("format") != MODEL_FORMAT:
        raise ModelError(f"not a {MODEL_FORMAT} file")
    if doc.get("version") != MODEL_FORMAT_VERSION:
        raise ModelError(f"unsupported model format version {doc.get('version')}")
    kind = doc["kind"]
    if kind not in _PAYLOAD_CLASSES:
        raise ModelError(f"unknown model kind {kind!r}")
    std = None
    if doc["standardizer"] is not None:
        std = Standardizer(
            mu=np.array(doc["standardizer"]["mu"], dtype=np.float64),
            sigma=np.array(doc["standardizer"]["sigma"], dtype=np.float64),
        )
    return TrainedModel(
        kind=kind,
        inner=_PAYLOAD_CLASSES[kind].from_payload(doc["payload"]),
        feature_names=tuple(doc["feature_names"]),
        standardizer=std,
        seed=int(doc["seed"]),
    )


def save_model(model: TrainedModel, path: Union[str, Path]) -> None:
    Path(path).write_text(model_to_json(model))


def load_model(path: Union[str, Path]) -> TrainedModel:
    return model_from_json(Path(path).read_text())
