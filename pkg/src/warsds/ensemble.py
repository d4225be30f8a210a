"""Multi-source orchestration, accuracy-weighted fusion and baselines."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .dataset import SourceDomain, TargetState, balance_weights, loss_weight_diagonal
from .exceptions import DimensionMismatch, EmptyEnsemble
from .kernel import KernelSpec, resolved_gram
from .offline import (
    Labeler,
    WarHyperParams,
    WarModel,
    _solve_factored,
    fit_war,
    labeled_score,
    to_labels,
    weights_for,
)
from .online import fit_owar
from .sds import rank_sources


class Mode(str, enum.Enum):
    OFFLINE = "offline"
    ONLINE = "online"


class ConstantModel:
    """Always answers 0 (NonTarget): the no-information classifier."""

    train_accuracy = 0.0

    def __init__(self, d: int):
        self.d = d

    def decision_function(self, X_query) -> np.ndarray:
        X_query = np.atleast_2d(np.asarray(X_query, dtype=float))
        if X_query.shape[1] != self.d:
            raise DimensionMismatch(f"query has {X_query.shape[1]} features, expected {self.d}")
        return np.zeros(X_query.shape[0])

    def predict(self, X_query) -> np.ndarray:
        return to_labels(self.decision_function(X_query))


@dataclass(eq=False)
class FusedClassifier:
    """Weighted sum of member decision functions, weights normalized to sum 1."""

    members: list[tuple[object, float]]
    mode: Mode = Mode.OFFLINE
    n_candidates: int = 0
    distances: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if not self.members:
            raise EmptyEnsemble("a fused classifier needs at least one member")
        w = np.array([wz for _, wz in self.members], dtype=float)
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("member weights must be finite and non-negative")
        if not self.n_candidates:
            self.n_candidates = len(self.members)

    @property
    def models(self) -> list:
        return [m for m, _ in self.members]

    @property
    def normalized_weights(self) -> np.ndarray:
        w = np.array([wz for _, wz in self.members], dtype=float)
        total = w.sum()
        if total <= 0:
            return np.full(len(w), 1.0 / len(w))
        return w / total

    @property
    def retained_fraction(self) -> float:
        return len(self.members) / self.n_candidates

    def decision_function(self, X_query) -> np.ndarray:
        out = 0.0
        for (model, _), w in zip(self.members, self.normalized_weights):
            out = out + w * model.decision_function(X_query)
        return np.asarray(out, dtype=float)

    def predict(self, X_query) -> np.ndarray:
        return to_labels(self.decision_function(X_query))


def fuse_predict(classifier: FusedClassifier, X_query) -> tuple[np.ndarray, np.ndarray]:
    values = classifier.decision_function(X_query)
    return values, to_labels(values)


def weighted_krls(X, y, weights, sigma: float, spec: KernelSpec,
                  weight_metric: str = "accuracy", source_id=None) -> WarModel:
    """Weighted kernel regularized least squares: ``alpha = (W K + sigma I)^-1 W y``."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    spec, K = resolved_gram(X, spec)
    alpha = _solve_factored(K, np.asarray(weights, dtype=float), [], [], y,
                            WarHyperParams(sigma=sigma, lambda_P=0.0, lambda_Q=0.0))
    acc = labeled_score(to_labels(K @ alpha), y, weight_metric)
    return WarModel(alpha=alpha, X=X, spec=spec, train_accuracy=acc, source_id=source_id)


def _fuse(models, mode: Mode, n_candidates: int, distances=()) -> FusedClassifier:
    return FusedClassifier([(m, m.train_accuracy) for m in models], mode, n_candidates,
                           list(distances))


def fit_warsds(sources: Sequence[SourceDomain], target: TargetState,
               params: WarHyperParams = WarHyperParams(), spec: KernelSpec = KernelSpec(),
               k: int = 2, *, use_sds: bool = True, balance: bool = True,
               weight_metric: str = "accuracy",
               initial_pseudo: Optional[Labeler] = None) -> FusedClassifier:
    """Offline selection + per-domain wAR + fusion.

    ``target.pseudo_y`` should carry the previous iteration's predictions on
    the pool.  Without them, pseudo-labels come from ``initial_pseudo`` or,
    when labels exist, from the pooled-source TL ensemble; with no labels
    each member initializes its own pseudo-labels.
    """
    if not sources:
        raise EmptyEnsemble("no source domains")
    if target.m_u and target.pseudo_y is None and (target.m_l or initial_pseudo is not None):
        labeler = initial_pseudo or baseline_tl(sources, target, params, spec,
                                                balance=balance).predict
        target = target.with_pseudo(to_labels(np.asarray(labeler(target.X_u), dtype=float)))
    retained, dists = sources, []
    if use_sds and target.m_l:
        retained, dists = rank_sources(sources, target, k, use_pseudo=True)
    models = [fit_war(s, target, params, spec, initial_pseudo, balance=balance,
                      weight_metric=weight_metric) for s in retained]
    return _fuse(models, Mode.OFFLINE, len(sources), dists)


def fit_owarsds(sources: Sequence[SourceDomain], target: TargetState,
                params: WarHyperParams = WarHyperParams(), spec: KernelSpec = KernelSpec(),
                k: int = 2, *, use_sds: bool = True, balance: bool = True,
                weight_metric: str = "accuracy") -> FusedClassifier:
    if not sources:
        raise EmptyEnsemble("no source domains")
    retained, dists = sources, []
    if use_sds and target.m_l:
        retained, dists = rank_sources(sources, target, k, use_pseudo=False)
    models = [fit_owar(s, target, params, spec, balance=balance, weight_metric=weight_metric)
              for s in retained]
    return _fuse(models, Mode.ONLINE, len(sources), dists)


def baseline_arrls(sources: Sequence[SourceDomain], target: TargetState,
                   params: WarHyperParams = WarHyperParams(), spec: KernelSpec = KernelSpec(),
                   weight_metric: str = "accuracy") -> FusedClassifier:
    """wAR with every loss weight forced to 1, all sources kept."""
    return fit_warsds(sources, target, replace(params, w_t=1.0), spec, use_sds=False,
                      balance=False, weight_metric=weight_metric)


def baseline_target_only(target: TargetState, params: WarHyperParams = WarHyperParams(),
                         spec: KernelSpec = KernelSpec(), weight_metric: str = "accuracy"):
    """Class-balanced kernel RLS on the labeled target rows alone.

    Returns :class:`ConstantModel` until both classes have been labeled.
    """
    y = target.y_l
    if target.m_l < 2 or len(np.unique(y)) < 2:
        return ConstantModel(target.d)
    return weighted_krls(target.X_l, y, balance_weights(y), params.sigma, spec, weight_metric)


def baseline_tl(sources: Sequence[SourceDomain], target: TargetState,
                params: WarHyperParams = WarHyperParams(), spec: KernelSpec = KernelSpec(),
                with_sds: bool = False, k: int = 2, *, balance: bool = True,
                weight_metric: str = "accuracy") -> FusedClassifier:
    """Per source: pool with the labeled target rows, weighted kernel RLS, no MMD."""
    if not sources:
        raise EmptyEnsemble("no source domains")
    labeled = target.labeled_only() if target.m_u else target
    retained, dists = sources, []
    if with_sds and labeled.m_l:
        retained, dists = rank_sources(sources, labeled, k, use_pseudo=False)
    models = []
    for s in retained:
        e = loss_weight_diagonal(weights_for(s, labeled, params, balance), s.n, labeled.m_l, 0)
        models.append(weighted_krls(np.vstack([s.X, labeled.X_l]),
                                    np.concatenate([s.y, labeled.y_l]), e, params.sigma, spec,
                                    weight_metric, source_id=s.id))
    return _fuse(models, Mode.ONLINE, len(sources), dists)
