"""K-nearest-neighbour classification over a precomputed distance matrix."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.metrics import f1_score

from .matrix import DistanceMatrix


@dataclass
class KNNResult:
    predictions: list
    f1: dict
    macro_f1: float
    # items whose true class has no candidate in their training fold
    unscored: list = field(default_factory=list)


def _vote(labels, dists):
    tally: dict = {}
    for lab, d in zip(labels, dists):
        count, total = tally.get(lab, (0, 0.0))
        tally[lab] = (count + 1, total + d)
    # most votes, then smaller summed distance, then lowest label
    return min(tally, key=lambda lab: (-tally[lab][0], tally[lab][1], lab))


def knn_classify(dm: DistanceMatrix, labels, K: int = 3, groups=None) -> KNNResult:
    """Leave-one-out (``groups=None``) or leave-group-out kNN.

    With ``groups``, every item sharing the held-out item's group is removed
    from its candidate set. An item whose class does not occur among its
    candidates cannot be classified correctly by construction; it still gets
    a prediction but is excluded from the F1 scores and listed in
    ``unscored``.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    labels = list(labels)
    n = dm.n
    if len(labels) != n:
        raise ValueError("one label per item required")
    groups = list(range(n)) if groups is None else list(groups)
    if len(groups) != n:
        raise ValueError("one group per item required")
    groups = np.asarray(groups, dtype=object)
    predictions = []
    unscored = []
    for i in range(n):
        candidates = np.flatnonzero(groups != groups[i])
        if len(candidates) < K:
            raise ValueError(f"fold for item {i} has {len(candidates)} candidates, K={K}")
        order = candidates[np.argsort(dm.values[i, candidates], kind="stable")][:K]
        predictions.append(_vote([labels[j] for j in order], dm.values[i, order]))
        if labels[i] not in {labels[j] for j in candidates}:
            unscored.append(i)
    keep = [i for i in range(n) if i not in set(unscored)]
    y_true = [labels[i] for i in keep]
    y_pred = [predictions[i] for i in keep]
    classes = sorted(set(y_true))
    scores = f1_score(y_true, y_pred, labels=classes, average=None, zero_division=0)
    f1 = {c: float(s) for c, s in zip(classes, scores)}
    macro = float(np.mean(scores)) if len(classes) else float("nan")
    return KNNResult(predictions, f1, macro, unscored)
