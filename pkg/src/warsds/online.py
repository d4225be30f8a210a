"""Online weighted adaptation regularization.

Only the ``n + m_l`` labeled rows enter the system; there is no unlabeled
pool and no pseudo-labeling.  With no labeled target rows the MMD terms are
dropped and the fit reduces to weighted kernel RLS on the source domain.
"""

from __future__ import annotations

import numpy as np

from .dataset import SourceDomain, TargetState, loss_weight_diagonal
from .exceptions import DimensionMismatch
from .kernel import KernelSpec, resolved_gram
from .offline import (
    WarHyperParams,
    WarModel,
    _solve_factored,
    build_marginal_mmd,
    conditional_mmd_vectors,
    labeled_score,
    marginal_mmd_vector,
    to_labels,
    weights_for,
)


class OwarModel(WarModel):
    """Same expansion as :class:`WarModel`, over labeled rows only."""


def build_marginal_mmd_online(n: int, m_l: int) -> np.ndarray:
    return build_marginal_mmd(n, m_l)


def fit_owar(source: SourceDomain, target: TargetState, params: WarHyperParams = WarHyperParams(),
             spec: KernelSpec = KernelSpec(), *, balance: bool = True,
             weight_metric: str = "accuracy") -> OwarModel:
    if target.m_u:
        raise ValueError("online fitting accepts labeled target samples only (m_u must be 0)")
    if source.d != target.d:
        raise DimensionMismatch(f"source has {source.d} features, target {target.d}")
    n, m_l = source.n, target.m_l
    X = np.vstack([source.X, target.X_l])
    spec, K = resolved_gram(X, spec)
    e = loss_weight_diagonal(weights_for(source, target, params, balance), n, m_l, 0)
    y = np.concatenate([source.y, target.y_l])
    if m_l:
        vecs_P = [marginal_mmd_vector(n, m_l)]
        vecs_Q = conditional_mmd_vectors(source.y, target.y_l)
    else:
        vecs_P, vecs_Q = [], []
    alpha = _solve_factored(K, e, vecs_P, vecs_Q, y, params)
    return OwarModel(alpha=alpha, X=X, spec=spec,
                     train_accuracy=labeled_score(to_labels(K @ alpha), y, weight_metric),
                     source_id=source.id)
