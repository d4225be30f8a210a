"""Source domain selection.

Each source domain is scored by the summed distance between its class means
and the target's class means; the scores are clustered with exact 1-D
k-means and the cluster with the smallest centroid is kept.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Optional, Sequence

import numpy as np

from .dataset import NON_TARGET, TARGET, SourceDomain, TargetState
from .exceptions import DimensionMismatch, SingleClassDomain, TooFewDomains, TooFewValues

ClassMeans = tuple[Optional[np.ndarray], Optional[np.ndarray]]


@dataclass(frozen=True)
class DomainDistance:
    source_id: Hashable
    d: float


def class_means(X, labels) -> tuple[np.ndarray, np.ndarray]:
    """(Target mean, NonTarget mean) of the rows of ``X``."""
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels, dtype=float)
    means = _partial_means(X, labels)
    if means[0] is None or means[1] is None:
        raise SingleClassDomain("class means need both classes")
    return means


def _partial_means(X, labels) -> ClassMeans:
    return tuple(X[labels == c].mean(axis=0) if np.any(labels == c) else None
                 for c in (TARGET, NON_TARGET))


def target_class_means(target: TargetState, use_pseudo: bool = True) -> Optional[ClassMeans]:
    """Class means of the target from known labels (plus pseudo-labels if asked).

    A class with no samples yields ``None``; with no labels at all the result
    is ``None`` and selection must be bypassed.
    """
    X, y = target.X_l, target.y_l
    if use_pseudo and target.m_u and target.pseudo_y is not None:
        X = np.vstack([X, target.X_u])
        y = np.concatenate([y, target.pseudo_y])
    if len(y) == 0:
        return None
    return _partial_means(X, y)


def domain_distance(source: SourceDomain, target_means: ClassMeans) -> float:
    """Sum of Euclidean distances between matching class means.

    Classes whose target mean is ``None`` are skipped.
    """
    src = class_means(source.X, source.y)
    total = 0.0
    for ms, mt in zip(src, target_means):
        if mt is None:
            continue
        mt = np.asarray(mt, dtype=float)
        if mt.shape != ms.shape:
            raise DimensionMismatch(f"target mean has shape {mt.shape}, source {ms.shape}")
        total += float(np.linalg.norm(ms - mt))
    return total


@dataclass(frozen=True)
class KMeans1D:
    labels: np.ndarray  # cluster index per input value, 0 = smallest centroid
    centroids: np.ndarray  # ascending
    inertia: float


def _sse(v: np.ndarray) -> float:
    return float(np.sum((v - v.mean()) ** 2))


def kmeans_1d(values, k: int) -> KMeans1D:
    """Globally optimal 1-D k-means by dynamic programming over sorted values.

    Clusters are contiguous in sorted order.  Among equal-cost partitions the
    one with the earliest boundaries wins.
    """
    values = np.asarray(values, dtype=float).ravel()
    n = len(values)
    if k < 1 or n < k:
        raise TooFewValues(f"cannot form {k} clusters from {n} values")
    order = np.argsort(values, kind="stable")
    v = values[order]
    cost = np.full((n + 1, n + 1), np.inf)
    for i in range(n):
        for j in range(i + 1, n + 1):
            cost[i, j] = _sse(v[i:j])
    best = np.full((k + 1, n + 1), np.inf)
    arg = np.zeros((k + 1, n + 1), dtype=int)
    best[0, 0] = 0.0
    for c in range(1, k + 1):
        for j in range(c, n + 1):
            for i in range(c - 1, j):
                val = best[c - 1, i] + cost[i, j]
                if val < best[c, j]:
                    best[c, j] = val
                    arg[c, j] = i
    bounds = [n]
    for c in range(k, 0, -1):
        bounds.append(arg[c, bounds[-1]])
    bounds = bounds[::-1]
    sorted_labels = np.empty(n, dtype=int)
    centroids = np.empty(k)
    for c in range(k):
        sorted_labels[bounds[c]:bounds[c + 1]] = c
        centroids[c] = v[bounds[c]:bounds[c + 1]].mean()
    labels = np.empty(n, dtype=int)
    labels[order] = sorted_labels
    return KMeans1D(labels=labels, centroids=centroids, inertia=float(best[k, n]))


def select_sources(distances: Sequence[DomainDistance], k: int = 2) -> tuple:
    """Ids in the smallest-centroid cluster, in input order."""
    if len(distances) < k:
        raise TooFewDomains(f"{len(distances)} domains for k={k}")
    if k == 1:
        return tuple(dd.source_id for dd in distances)
    km = kmeans_1d([dd.d for dd in distances], k)
    keep = int(np.argmin(km.centroids))
    return tuple(dd.source_id for dd, lab in zip(distances, km.labels) if lab == keep)


def rank_sources(sources: Sequence[SourceDomain], target: TargetState, k: int = 2, *,
                 use_pseudo: bool = True) -> tuple[list[SourceDomain], list[DomainDistance]]:
    """Apply selection to concrete domains; all are kept when the target has no labels."""
    means = target_class_means(target, use_pseudo)
    if means is None or len(sources) <= 1 or k == 1:
        return list(sources), []
    dists = [DomainDistance(s.id, domain_distance(s, means)) for s in sources]
    if len(dists) < k:
        return list(sources), dists
    keep = set(select_sources(dists, k))
    return [s for s in sources if s.id in keep], dists
