"""Classification of normalized feature vectors.

Two interchangeable back ends:

- an instance-based k-nearest-neighbor vote (similarity = sum of
  ``1 - |difference|`` per slot, the same measure used on contexts), with
  ties broken by the best similarity among the tied classes, and
- a one-vs-rest linear discriminant: one forward-selected linear equation per
  class fitted to a 0/1 indicator, predicting the class whose equation lands
  closest to 1.

Both are composable with any normalizer, so mixed pipelines (instance-based
normalization feeding the linear discriminant, and vice versa) fall out for
free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import regress
from .data import NormalizedFeatureVector
from .normalize import similarity

__all__ = [
    "IblClassifier",
    "MlrClassifier",
    "IblDecision",
    "MlrDecision",
    "train_ibl",
    "classify_ibl",
    "train_mlr",
    "classify_mlr",
]


def _as_matrix(vectors) -> np.ndarray:
    rows = [
        v.slots if isinstance(v, NormalizedFeatureVector) else tuple(v) for v in vectors
    ]
    mat = np.asarray(rows, dtype=float)
    if mat.ndim != 2:
        raise ValueError("training vectors must share one arity")
    return mat


def _as_row(vector) -> np.ndarray:
    row = vector.slots if isinstance(vector, NormalizedFeatureVector) else tuple(vector)
    return np.asarray(row, dtype=float)


@dataclass(frozen=True, eq=False)
class IblClassifier:
    """Stored instances plus the vote size k3; training is just storage."""

    instances: np.ndarray
    labels: tuple[str, ...]
    classes: tuple[str, ...]
    k3: int

    def __post_init__(self):
        if len(self.labels) == 0:
            raise ValueError("need at least one training instance")
        if self.k3 < 1:
            raise ValueError("k3 must be >= 1")


@dataclass(frozen=True)
class IblDecision:
    label: str
    neighbors: tuple[tuple[int, str, float], ...]  # (instance index, label, similarity)


@dataclass(frozen=True)
class MlrDecision:
    label: str
    scores: dict[str, float]


def train_ibl(train_pairs, k3: int, classes: tuple[str, ...] | None = None) -> IblClassifier:
    """Store (vector, label) pairs verbatim; duplicates vote separately."""
    pairs = list(train_pairs)
    if not pairs:
        raise ValueError("empty training set")
    vectors, labels = zip(*pairs)
    if classes is None:
        classes = tuple(sorted(set(labels)))
    return IblClassifier(
        instances=_as_matrix(vectors), labels=tuple(labels), classes=classes, k3=k3
    )


def classify_ibl(clf: IblClassifier, query) -> IblDecision:
    """Majority vote over the k3 most similar instances.

    Instances are ranked by similarity, ties by storage order. With no strict
    plurality the tied classes are separated by their best member's
    similarity, then by class order. With k3 = 2 this degenerates to the
    single nearest neighbor: either both neighbors agree, or the similarity
    tie-break picks the nearer one.
    """
    q = _as_row(query)
    if q.shape[0] != clf.instances.shape[1]:
        raise ValueError(f"query arity {q.shape[0]} != instance arity {clf.instances.shape[1]}")
    sims = np.sum(1.0 - np.abs(clf.instances - q), axis=1)
    order = sorted(range(len(sims)), key=lambda i: (-sims[i], i))
    top = order[: clf.k3]
    neighbors = tuple((i, clf.labels[i], float(sims[i])) for i in top)

    votes: dict[str, int] = {}
    best_sim: dict[str, float] = {}
    for i in top:
        label = clf.labels[i]
        votes[label] = votes.get(label, 0) + 1
        if label not in best_sim:
            best_sim[label] = float(sims[i])  # first occurrence is the best (ranked order)
    top_count = max(votes.values())
    tied = [label for label, n in votes.items() if n == top_count]
    if len(tied) == 1:
        return IblDecision(tied[0], neighbors)
    winner = min(
        tied,
        key=lambda label: (
            -best_sim[label],
            clf.classes.index(label) if label in clf.classes else len(clf.classes),
        ),
    )
    return IblDecision(winner, neighbors)


@dataclass(frozen=True)
class MlrClassifier:
    """One forward-selected linear equation per class over the feature slots."""

    models: dict[str, regress.LinearModel]
    classes: tuple[str, ...]
    m: int


def train_mlr(train_pairs, m: int, classes: tuple[str, ...] | None = None) -> MlrClassifier:
    """Fit a 0/1 indicator equation per class with m forward-selected terms.

    A class absent from the training set gets an all-zero indicator and ends
    up with a near-zero equation, which simply never wins.
    """
    pairs = list(train_pairs)
    if len(pairs) < 2:
        raise ValueError("need at least two training rows")
    vectors, labels = zip(*pairs)
    X = _as_matrix(vectors)
    if classes is None:
        classes = tuple(sorted(set(labels)))
    models: dict[str, regress.LinearModel] = {}
    for cls in classes:
        y = np.array([1.0 if label == cls else 0.0 for label in labels])
        models[cls] = regress.forward_select_to_m(X, y, m)
    return MlrClassifier(models=models, classes=classes, m=m)


def classify_mlr(clf: MlrClassifier, query) -> MlrDecision:
    """Predict the class whose equation's output is closest to 1."""
    q = _as_row(query)
    scores = {cls: model.predict(q) for cls, model in clf.models.items()}
    winner = min(clf.classes, key=lambda cls: (abs(scores[cls] - 1.0), clf.classes.index(cls)))
    return MlrDecision(winner, scores)
