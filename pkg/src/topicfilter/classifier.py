"""Single tanh-unit filter: encoding, training, persistence.

A filter scores a document as ``tanh(w0 + sum_i w_i x_i)`` where ``x_i`` is
-1 when vocabulary term i is absent and ``tf_i / ln(L)`` when present (L is
the document length in tokens).  Training minimizes the mean squared error
against targets in {-1, +1} by full-batch gradient descent, stopped after a
small fixed number of epochs to keep the unit out of saturation; an optional
quadratic weight-decay penalty can replace that role.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .corpus import Document
from .errors import ConfigError, DivergenceError, EmptyCollectionError, ParseError
from .validation import add_bias_column, check_signed_targets

# Largest representable output strictly inside (-1, 1); tanh of a large
# finite sum would otherwise round to exactly +/-1.
_OUTPUT_LIMIT = float(np.nextafter(1.0, 0.0))

ABSENT_VALUE = -1.0


def _log_length(length: int) -> float:
    # Lengths below two tokens share ln(2) so the divisor stays positive.
    return math.log(max(length, 2))


def encode(doc: Document, vocabulary: Sequence[str]) -> np.ndarray:
    """Encode one document over a vocabulary, bias input included.

    Returns a vector of length ``len(vocabulary) + 1`` whose first entry is
    the constant 1; entry i is -1 when term i is absent and ``tf_i / ln(L)``
    when present (natural log, L clamped to >= 2).
    """
    if not vocabulary:
        raise ValueError("vocabulary must not be empty")
    x = np.empty(len(vocabulary) + 1)
    x[0] = 1.0
    denom = _log_length(doc.length)
    tf = doc.tf
    for i, term in enumerate(vocabulary, start=1):
        count = tf.get(term, 0)
        x[i] = count / denom if count > 0 else ABSENT_VALUE
    return x


def encode_documents(docs: Iterable[Document], vocabulary: Sequence[str]) -> np.ndarray:
    """Encode a collection into a (n_docs, n_terms) feature matrix.

    Rows match :func:`encode` minus the leading bias entry; the classifier
    supplies the constant input itself.
    """
    if not vocabulary:
        raise ValueError("vocabulary must not be empty")
    rows = []
    for doc in docs:
        denom = _log_length(doc.length)
        tf = doc.tf
        rows.append(
            [tf[t] / denom if t in tf else ABSENT_VALUE for t in vocabulary]
        )
    return np.array(rows, dtype=float).reshape(len(rows), len(vocabulary))


def _weighted_sum(weights, features) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    f = np.asarray(features, dtype=float)
    if f.shape[-1] != w.shape[0]:
        raise ValueError(
            f"feature dimension {f.shape[-1]} does not match {w.shape[0]} weights"
        )
    return f @ w


def tanh_unit(weights, features):
    """Filter output tanh(w . x) for one feature vector or a stack of them.

    The result is nudged to stay strictly inside (-1, 1): the true value never
    reaches the bounds, but float rounding of tanh would.
    """
    out = np.tanh(_weighted_sum(weights, features))
    return np.clip(out, -_OUTPUT_LIMIT, _OUTPUT_LIMIT)


def unit_loss(weights, features, targets, weight_decay: float = 0.0) -> float:
    """Mean squared error plus the decay penalty.

    ``mean((t - tanh(w.x))^2) + (weight_decay / 2) * sum_{i>=1} w_i^2``;
    the bias weight w0 is excluded from the penalty.
    """
    f = np.atleast_2d(np.asarray(features, dtype=float))
    t = np.asarray(targets, dtype=float).ravel()
    if f.shape[0] == 0:
        raise EmptyCollectionError("loss of an empty batch is undefined")
    if t.shape[0] != f.shape[0]:
        raise ValueError(f"{t.shape[0]} targets for {f.shape[0]} feature rows")
    out = np.tanh(_weighted_sum(weights, f))
    w = np.asarray(weights, dtype=float)
    err = float(np.mean((t - out) ** 2))
    return err + 0.5 * weight_decay * float(w[1:] @ w[1:])


def unit_gradient(weights, features, targets, weight_decay: float = 0.0) -> np.ndarray:
    """Analytic gradient of :func:`unit_loss` with respect to the weights.

    d/dw_i = -(2/n) sum (t - tanh(s)) (1 - tanh(s)^2) x_i, plus
    ``weight_decay * w_i`` for the non-bias weights.
    """
    f = np.atleast_2d(np.asarray(features, dtype=float))
    t = np.asarray(targets, dtype=float).ravel()
    if f.shape[0] == 0:
        raise EmptyCollectionError("gradient of an empty batch is undefined")
    if t.shape[0] != f.shape[0]:
        raise ValueError(f"{t.shape[0]} targets for {f.shape[0]} feature rows")
    w = np.asarray(weights, dtype=float)
    out = np.tanh(_weighted_sum(w, f))
    back = (t - out) * (1.0 - out * out)
    grad = (-2.0 / f.shape[0]) * (f.T @ back)
    if weight_decay:
        grad[1:] += weight_decay * w[1:]
    return grad


@dataclass(frozen=True)
class TrainConfig:
    """Gradient-descent settings for one filter."""

    learning_rate: float = 1e-3
    max_epochs: int = 20
    weight_decay: float = 0.0
    init_scale: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.max_epochs < 0:
            raise ConfigError(f"max_epochs must be >= 0, got {self.max_epochs}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.init_scale < 0:
            raise ConfigError(f"init_scale must be >= 0, got {self.init_scale}")


def train_unit(
    features, targets, config: TrainConfig = TrainConfig()
) -> tuple[np.ndarray, list[float]]:
    """Full-batch gradient descent for exactly ``config.max_epochs`` epochs.

    ``features`` rows are complete input vectors (by convention column 0 is
    the constant bias input).  Weights start at zero unless ``init_scale`` is
    positive, in which case they are drawn uniformly from
    ``[-init_scale, +init_scale]`` with the seeded generator.  Returns the
    final weights and the loss recorded after each epoch's update.
    """
    f = np.atleast_2d(np.asarray(features, dtype=float))
    t = check_signed_targets(np.asarray(targets, dtype=float).ravel(), f.shape[0])
    dim = f.shape[1]
    if config.init_scale > 0:
        rng = np.random.default_rng(config.seed)
        weights = rng.uniform(-config.init_scale, config.init_scale, size=dim)
    else:
        weights = np.zeros(dim)
    trajectory: list[float] = []
    for epoch in range(1, config.max_epochs + 1):
        grad = unit_gradient(weights, f, t, config.weight_decay)
        weights = weights - config.learning_rate * grad
        loss = unit_loss(weights, f, t, config.weight_decay)
        if not math.isfinite(loss):
            raise DivergenceError(f"non-finite training loss at epoch {epoch}")
        trajectory.append(loss)
    return weights, trajectory


class TanhUnitClassifier(BaseEstimator):
    """Single tanh unit trained by full-batch gradient descent.

    Accepts a plain feature matrix (no bias column; the estimator adds the
    constant input itself) and targets in {-1, +1}.  The epoch budget is the
    early-stopping device: small by default so the unit does not saturate.

    Attributes
    ----------
    weights_ : full weight vector, ``weights_[0]`` being the bias weight.
    loss_trajectory_ : per-epoch training loss.
    n_features_in_ : number of input features seen during fit.
    """

    def __init__(
        self,
        learning_rate: float = 1e-3,
        max_epochs: int = 20,
        weight_decay: float = 0.0,
        init_scale: float = 0.0,
        random_state: int = 0,
    ):
        self.learning_rate = learning_rate
        self.max_epochs = max_epochs
        self.weight_decay = weight_decay
        self.init_scale = init_scale
        self.random_state = random_state

    def _config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            max_epochs=self.max_epochs,
            weight_decay=self.weight_decay,
            init_scale=self.init_scale,
            seed=self.random_state,
        )

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise ValueError(f"X must be 2-D, got shape {X.shape}")
        y = check_signed_targets(y, X.shape[0])
        self.weights_, self.loss_trajectory_ = train_unit(
            add_bias_column(X), y, self._config()
        )
        self.n_features_in_ = X.shape[1]
        return self

    def _check_fitted(self):
        if not hasattr(self, "weights_"):
            raise NotFittedError(
                "this TanhUnitClassifier is not fitted yet; call fit(X, y) first"
            )

    @property
    def intercept_(self) -> float:
        self._check_fitted()
        return float(self.weights_[0])

    @property
    def coef_(self) -> np.ndarray:
        self._check_fitted()
        return self.weights_[1:].copy()

    def decision_function(self, X) -> np.ndarray:
        self._check_fitted()
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected 2-D input with {self.n_features_in_} columns")
        return tanh_unit(self.weights_, add_bias_column(X))

    def predict(self, X) -> np.ndarray:
        # Sign of the unit output; an exact zero maps to +1.
        return np.where(self.decision_function(X) >= 0.0, 1.0, -1.0)


@dataclass(frozen=True, eq=False)
class TopicFilter:
    """A trained filter bound to its vocabulary and training snapshot."""

    vocabulary: tuple[str, ...]
    weights: np.ndarray
    config: TrainConfig = TrainConfig()
    loss_trajectory: tuple[float, ...] = ()
    topic_id: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "vocabulary", tuple(self.vocabulary))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        object.__setattr__(self, "loss_trajectory", tuple(self.loss_trajectory))
        if self.weights.shape != (len(self.vocabulary) + 1,):
            raise ValueError(
                f"{self.weights.shape[0]} weights for {len(self.vocabulary)} terms"
            )

    def score(self, doc: Document) -> float:
        return float(tanh_unit(self.weights, encode(doc, self.vocabulary)))

    def score_documents(self, docs: Iterable[Document]) -> np.ndarray:
        features = encode_documents(docs, self.vocabulary)
        if features.shape[0] == 0:
            return np.empty(0)
        return tanh_unit(self.weights, add_bias_column(features))


def train_filter(
    labeled_docs: Sequence[tuple[Document, int]],
    vocabulary: Sequence[str],
    config: TrainConfig = TrainConfig(),
    topic_id: int | None = None,
) -> TopicFilter:
    """Encode a labeled training set over ``vocabulary`` and train a filter."""
    docs = [doc for doc, _ in labeled_docs]
    targets = np.array([label for _, label in labeled_docs], dtype=float)
    features = add_bias_column(encode_documents(docs, vocabulary))
    weights, trajectory = train_unit(features, targets, config)
    return TopicFilter(
        vocabulary=tuple(vocabulary),
        weights=weights,
        config=config,
        loss_trajectory=tuple(trajectory),
        topic_id=topic_id,
    )


def _fmt(x: float) -> str:
    # 17 significant digits round-trip any float64 exactly.
    return format(float(x), ".17g")


def format_filter(model: TopicFilter) -> str:
    """Serialize a filter: text header, then one weight per line."""
    lines = [
        f"topic {'-' if model.topic_id is None else model.topic_id}",
        f"terms {' '.join(model.vocabulary)}",
        f"learning_rate {_fmt(model.config.learning_rate)}",
        f"max_epochs {model.config.max_epochs}",
        f"weight_decay {_fmt(model.config.weight_decay)}",
        f"init_scale {_fmt(model.config.init_scale)}",
        f"seed {model.config.seed}",
        "trajectory " + " ".join(_fmt(v) for v in model.loss_trajectory),
        "weights",
    ]
    lines.extend(_fmt(w) for w in model.weights)
    return "\n".join(lines) + "\n"


def save_filter(model: TopicFilter, path) -> None:
    Path(path).write_text(format_filter(model), encoding="utf-8")


def load_filter(path) -> TopicFilter:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header: dict[str, str] = {}
    weights: list[float] = []
    in_weights = False
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        if in_weights:
            try:
                weights.append(float(line.strip()))
            except ValueError as exc:
                raise ParseError(f"bad weight: {exc}", source=path, line=lineno) from exc
        elif line.strip() == "weights":
            in_weights = True
        else:
            key, _, value = line.partition(" ")
            header[key] = value
    try:
        topic_id = None if header["topic"] == "-" else int(header["topic"])
        vocabulary = tuple(header["terms"].split())
        config = TrainConfig(
            learning_rate=float(header["learning_rate"]),
            max_epochs=int(header["max_epochs"]),
            weight_decay=float(header["weight_decay"]),
            init_scale=float(header["init_scale"]),
            seed=int(header["seed"]),
        )
        trajectory = tuple(float(v) for v in header.get("trajectory", "").split())
    except (KeyError, ValueError) as exc:
        raise ParseError(f"malformed filter header: {exc}", source=path) from exc
    if not in_weights:
        raise ParseError("missing weights section", source=path)
    return TopicFilter(
        vocabulary=vocabulary,
        weights=np.array(weights),
        config=config,
        loss_trajectory=trajectory,
        topic_id=topic_id,
    )
