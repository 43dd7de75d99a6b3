"""Cascade object detector built from two hand-trained linear stages.

Stage one decides whether any object is present (NONE versus the rest);
stage two, consulted only when stage one fires, decides between one and
two objects.  Both stages are soft-margin linear classifiers trained by
projected subgradient descent on the class-balanced hinge objective

    J(w, b) = margin_param / (2n) * (||w||^2 + b^2)
              + (1/n) * sum_i c_i * max(0, 1 - y_i * (w.x_i + b))

where n is the training-set size and c_i = n / (2 * n_class(i)) weights
each example so both classes carry equal total mass.  Dividing the
regularizer by n makes margin_param act like the penalty constant of the
classic summed-slack formulation, which lets the weight norm grow with
the training set instead of being capped at a size-independent ball; the
recording campaign is heavily imbalanced and has class-conditional scale
differences near the noise floor, and an unbalanced or size-capped
objective collapses to a constant classifier there.

The bias is folded into the regularized parameter vector, which keeps
the projection step exact; the iterate provably lives in the ball of
radius sqrt(2n / margin_param) because J at the origin is 1.  Training
shuffles with a generator seeded by ``seed`` after canonically sorting
the examples, so any permutation of the same training multiset yields
the same model.  The returned parameters are the best iterate seen at
any epoch end, which makes the recorded objective checkpoints
non-increasing by construction.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .campaign import Dataset, LABEL_NONE, LABEL_ONE, LABEL_TWO

DEFAULT_MARGIN_PARAM = 1e-2
DEFAULT_EPOCHS = 200


@dataclass
class LinearModel:
    """Weights and bias of one trained stage, plus its training recipe."""

    weights: np.ndarray
    bias: float
    margin_param: float
    epochs: int
    seed: int
    objective_checkpoints: tuple[float, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.ndim != 1 or self.weights.size == 0:
            raise ValueError("weights must be a non-empty 1-D array")
        if not np.all(np.isfinite(self.weights)) or not math.isfinite(self.bias):
            raise ValueError("model parameters must be finite")
        if self.margin_param <= 0:
            raise ValueError("margin_param must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")

    def scores(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=float)
        return features @ self.weights + self.bias


@dataclass
class CascadeModel:
    """Presence stage (object vs none) plus count stage (two vs one)."""

    presence: LinearModel
    count: LinearModel

    def __post_init__(self) -> None:
        if self.presence.weights.size != self.count.weights.size:
            raise ValueError("cascade stages must share the feature length")


@dataclass(frozen=True)
class Prediction:
    """Predicted class together with both raw decision scores."""

    label: str
    presence_score: float
    count_score: float


@dataclass(frozen=True)
class TrainingConfig:
    margin_param: float = DEFAULT_MARGIN_PARAM
    epochs: int = DEFAULT_EPOCHS
    seed: int = 0

    def __post_init__(self) -> None:
        if self.margin_param <= 0:
            raise ValueError("margin_param must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")


def class_weights(labels: np.ndarray) -> np.ndarray:
    """Per-example weights that give both classes equal total mass.

    An example of class k receives n / (2 * n_k), so the weights of each
    class sum to n / 2 and the overall mean weight is 1.
    """
    labels = np.asarray(labels, dtype=float)
    n_pos = float(np.sum(labels > 0))
    n_neg = float(labels.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise ValueError("training data must contain both classes")
    return np.where(labels > 0, labels.size / (2.0 * n_pos), labels.size / (2.0 * n_neg))


def hinge_objective(
    weights: np.ndarray, bias: float, features: np.ndarray, labels: np.ndarray, margin_param: float
) -> float:
    """Class-balanced regularized hinge loss over a whole training set."""
    margins = labels * (features @ weights + bias)
    hinge = np.maximum(0.0, 1.0 - margins)
    n = labels.size
    reg = 0.5 * (margin_param / n) * (float(weights @ weights) + bias * bias)
    return reg + float(np.mean(class_weights(labels) * hinge))


def _canonical_order(features: np.ndarray, labels: np.ndarray) -> np.ndarray:
    # Sort rows lexicographically by feature values, labels breaking ties,
    # so the seeded shuffle sees the same sequence for any input permutation.
    keys = tuple(features[:, col] for col in range(features.shape[1] - 1, -1, -1))
    return np.lexsort((labels,) + keys)


def train_linear(
    features: np.ndarray,
    labels: np.ndarray,
    margin_param: float = DEFAULT_MARGIN_PARAM,
    epochs: int = DEFAULT_EPOCHS,
    seed: int = 0,
) -> LinearModel:
    """Train one soft-margin stage by projected subgradient descent.

    ``labels`` must be +1/-1 with both classes present.  With lam =
    margin_param / n, the step size at update ``t`` is ``1 / (lam * t)``
    and each update is followed by projection onto the ball of radius
    ``sqrt(2 / lam)`` in the augmented (weights, bias) space, which
    contains the optimum of the objective in the module docstring.
    """
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if features.ndim != 2 or features.shape[0] == 0:
        raise ValueError("features must be a non-empty 2-D array")
    if labels.shape != (features.shape[0],):
        raise ValueError("labels must be 1-D and match the number of feature rows")
    if not np.all(np.isin(labels, (-1.0, 1.0))):
        raise ValueError("labels must be +1 or -1")
    if np.all(labels == labels[0]):
        raise ValueError("training data must contain both classes")
    if margin_param <= 0:
        raise ValueError("margin_param must be positive")
    if epochs < 1:
        raise ValueError("epochs must be at least 1")

    order = _canonical_order(features, labels)
    x = features[order]
    y = labels[order]
    n, dim = x.shape
    weights_per_example = class_weights(y)

    rng = np.random.default_rng(seed)
    w = np.zeros(dim)
    b = 0.0
    lam = margin_param / n
    radius = math.sqrt(2.0 / lam)
    t = 0
    best_w = w.copy()
    best_b = b
    best_objective = hinge_objective(w, b, x, y, margin_param)
    checkpoints = []
    for _ in range(epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            decay = 1.0 - eta * lam
            w *= decay
            b *= decay
            if y[i] * (x[i] @ w + b) < 1.0:
                step = eta * weights_per_example[i] * y[i]
                w += step * x[i]
                b += step
            norm = math.sqrt(w @ w + b * b)
            if norm > radius:
                scale = radius / norm
                w *= scale
                b *= scale
        objective = hinge_objective(w, b, x, y, margin_param)
        if objective < best_objective:
            best_objective = objective
            best_w = w.copy()
            best_b = b
        checkpoints.append(best_objective)

    return LinearModel(
        weights=best_w,
        bias=float(best_b),
        margin_param=margin_param,
        epochs=epochs,
        seed=seed,
        objective_checkpoints=tuple(checkpoints),
    )


def train_cascade(train: Dataset, config: TrainingConfig = TrainingConfig()) -> CascadeModel:
    """Train both cascade stages from a labelled dataset.

    The presence stage sees every record (+1 for any object); the count
    stage sees only ONE and TWO records (+1 for TWO).  All three classes
    must be present.  The count stage uses ``seed + 1`` so the stages get
    distinct shuffle streams from one configuration.
    """
    labels = train.labels()
    for required in (LABEL_NONE, LABEL_ONE, LABEL_TWO):
        if required not in labels:
            raise ValueError(f"training data is missing class {required}")
    features = train.feature_matrix()

    presence_labels = np.where(np.asarray(labels) == LABEL_NONE, -1.0, 1.0)
    presence = train_linear(
        features, presence_labels, config.margin_param, config.epochs, config.seed
    )

    count_rows = [i for i, label in enumerate(labels) if label != LABEL_NONE]
    count_labels = np.array(
        [1.0 if labels[i] == LABEL_TWO else -1.0 for i in count_rows]
    )
    count = train_linear(
        features[count_rows], count_labels, config.margin_param, config.epochs, config.seed + 1
    )
    return CascadeModel(presence=presence, count=count)


def predict(model: CascadeModel, feature: np.ndarray) -> Prediction:
    """Run the cascade on one feature vector.

    Scores exactly on a boundary resolve toward detection: presence score
    0 means an object is declared, count score 0 means two objects are
    declared.  Both raw scores are always returned.
    """
    taps = np.asarray(getattr(feature, "taps", feature), dtype=float)
    if taps.shape != model.presence.weights.shape:
        raise ValueError("feature length does not match the model")
    presence_score = float(model.presence.scores(taps[np.newaxis, :])[0])
    count_score = float(model.count.scores(taps[np.newaxis, :])[0])
    if presence_score < 0.0:
        label = LABEL_NONE
    elif count_score < 0.0:
        label = LABEL_ONE
    else:
        label = LABEL_TWO
    return Prediction(label=label, presence_score=presence_score, count_score=count_score)


def cascade_scores(model: CascadeModel, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (presence, count) scores for a feature matrix."""
    features = np.asarray(features, dtype=float)
    return model.presence.scores(features), model.count.scores(features)


def labels_from_scores(presence_scores: np.ndarray, count_scores: np.ndarray) -> list[str]:
    """Apply the cascade decision rule to precomputed score arrays."""
    labels = []
    for p, c in zip(presence_scores, count_scores):
        if p < 0.0:
            labels.append(LABEL_NONE)
        elif c < 0.0:
            labels.append(LABEL_ONE)
        else:
            labels.append(LABEL_TWO)
    return labels


def save_model(model: CascadeModel, path: str) -> None:
    """Persist a cascade as three CSV lines.

    Line 1 holds (feature length, margin_param, epochs, seed); lines 2
    and 3 hold weights plus bias for the presence and count stages.
    """
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(
            [
                model.presence.weights.size,
                repr(model.presence.margin_param),
                model.presence.epochs,
                model.presence.seed,
            ]
        )
        for stage in (model.presence, model.count):
            writer.writerow([repr(float(v)) for v in stage.weights] + [repr(stage.bias)])


def load_model(path: str) -> CascadeModel:
    """Read a cascade saved by :func:`save_model`."""
    with open(path, "r", encoding="utf-8", newline="") as handle:
        rows = list(csv.reader(handle))
    if len(rows) != 3:
        raise ValueError(f"{path}: expected 3 lines (header plus 2 stages), got {len(rows)}")
    if len(rows[0]) != 4:
        raise ValueError(f"{path}: header must carry exactly 4 fields")
    length = int(rows[0][0])
    margin_param = float(rows[0][1])
    epochs = int(rows[0][2])
    seed = int(rows[0][3])
    stages = []
    for row in rows[1:]:
        if len(row) != length + 1:
            raise ValueError(f"{path}: stage line must carry {length + 1} values")
        values = [float(v) for v in row]
        stages.append(
            LinearModel(
                weights=np.array(values[:-1]),
                bias=values[-1],
                margin_param=margin_param,
                epochs=epochs,
                seed=seed,
            )
        )
    return CascadeModel(presence=stages[0], count=stages[1])
