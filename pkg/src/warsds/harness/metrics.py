from __future__ import annotations

from typing import Sequence

import numpy as np

from ..dataset import NON_TARGET, TARGET, as_labels
from ..exceptions import DimensionMismatch, EmptyCurve, MissingClass


def bca(predicted, truth) -> float:
    """Balanced classification accuracy: mean of the two per-class accuracies."""
    predicted = as_labels(predicted)
    truth = as_labels(truth)
    if predicted.shape != truth.shape:
        raise DimensionMismatch(f"{len(predicted)} predictions for {len(truth)} labels")
    pos = truth == TARGET
    neg = truth == NON_TARGET
    if not pos.any() or not neg.any():
        raise MissingClass("BCA needs both classes in the ground truth")
    a_pos = np.count_nonzero(predicted[pos] == TARGET) / np.count_nonzero(pos)
    a_neg = np.count_nonzero(predicted[neg] == NON_TARGET) / np.count_nonzero(neg)
    return (a_pos + a_neg) / 2


def aupc(curve: Sequence) -> float:
    """Normalized area under a BCA learning curve.

    ``curve`` holds ``(m_l, bca)`` pairs (or bare BCA values) on a uniform
    labeling grid; the trapezoidal area over iteration index is divided by
    the number of intervals.
    """
    if len(curve) == 0:
        raise EmptyCurve("AUPC of an empty curve")
    vals = np.array([c[1] if isinstance(c, (tuple, list)) else c for c in curve], dtype=float)
    if len(vals) == 1:
        return float(vals[0])
    return float(np.sum((vals[1:] + vals[:-1]) / 2) / (len(vals) - 1))
