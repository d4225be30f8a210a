"""scikit-learn compatible wrappers around the functional API."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .dataset import NON_TARGET, TARGET, SourceDomain, TargetState
from .ensemble import fit_owarsds, fit_warsds
from .exceptions import DimensionMismatch, SingleClassDomain
from .features import FeatureMap
from .kernel import KernelSpec
from .offline import WarHyperParams


def _is_missing(v) -> bool:
    return v is None or (isinstance(v, (float, np.floating)) and np.isnan(v))


class WARSDSClassifier(ClassifierMixin, BaseEstimator):
    """Weighted adaptation regularization with source domain selection.

    ``fit`` takes the stacked rows of every domain plus ``sample_domain``:
    a non-negative domain id for source rows and a negative value for rows
    of the new (target) domain.  Target rows whose label is ``None`` or NaN
    form the unlabeled pool (offline only).

    Parameters
    ----------
    w_t : float
        Overall weight of labeled target rows relative to source rows.
    sigma, lambda_P, lambda_Q : float
        Ridge, marginal-MMD and conditional-MMD weights.
    pseudo_iters : int
        Maximum pseudo-label refinement rounds per source domain.
    kernel : {"rbf", "linear"}
    gamma : float or None
        RBF width; None uses the median heuristic on each fit.
    k : int
        Cluster count for source selection.
    online : bool
        Fit on labeled target rows only (no unlabeled pool).
    use_sds : bool
        Whether to prune distant source domains.
    balance : bool
        Class-balance the loss weights inside each domain.
    pos_label : label or None
        Which class is the minority (Target) class; default is ``classes_[1]``.
    """

    def __init__(self, w_t=2.0, sigma=0.1, lambda_P=10.0, lambda_Q=10.0, pseudo_iters=5,
                 kernel="rbf", gamma=None, k=2, online=False, use_sds=True, balance=True,
                 pos_label=None):
        self.w_t = w_t
        self.sigma = sigma
        self.lambda_P = lambda_P
        self.lambda_Q = lambda_Q
        self.pseudo_iters = pseudo_iters
        self.kernel = kernel
        self.gamma = gamma
        self.k = k
        self.online = online
        self.use_sds = use_sds
        self.balance = balance
        self.pos_label = pos_label

    def _spec(self) -> KernelSpec:
        if self.kernel == "linear":
            return KernelSpec.linear()
        if self.kernel == "rbf":
            return KernelSpec.rbf(self.gamma)
        raise ValueError(f"unknown kernel {self.kernel!r}")

    def _encode(self, y) -> np.ndarray:
        return np.array([TARGET if v == self.classes_[1] else NON_TARGET for v in y])

    def fit(self, X, y, sample_domain):
        X = check_array(X)
        y = np.asarray(y, dtype=object).ravel()
        dom = np.asarray(sample_domain).ravel()
        if not len(y) == len(dom) == X.shape[0]:
            raise DimensionMismatch("X, y and sample_domain must have the same number of rows")
        missing = np.array([_is_missing(v) for v in y], dtype=bool)
        is_target = dom < 0
        if np.any(missing & ~is_target):
            raise ValueError("source rows must be labeled")
        if not np.any(~is_target):
            raise ValueError("no source rows (sample_domain >= 0)")

        labels = sorted(set(y[~missing].tolist()))
        if len(labels) != 2:
            raise SingleClassDomain(f"expected two classes, got {labels}")
        if self.pos_label is not None:
            if self.pos_label not in labels:
                raise ValueError(f"pos_label {self.pos_label!r} not among {labels}")
            labels = [v for v in labels if v != self.pos_label] + [self.pos_label]
        self.classes_ = np.asarray(labels)

        params = WarHyperParams(w_t=self.w_t, sigma=self.sigma, lambda_P=self.lambda_P,
                                lambda_Q=self.lambda_Q, pseudo_iters=self.pseudo_iters)
        sources = [SourceDomain(int(s), X[dom == s], self._encode(y[dom == s]))
                   for s in np.unique(dom[~is_target])]
        lab = is_target & ~missing
        unl = is_target & missing
        if self.online:
            if np.any(unl):
                raise ValueError("online mode takes labeled target rows only")
            state = TargetState(X[lab], self._encode(y[lab]), np.empty((0, X.shape[1])))
            self.model_ = fit_owarsds(sources, state, params, self._spec(), self.k,
                                      use_sds=self.use_sds, balance=self.balance)
        else:
            state = TargetState(X[lab], self._encode(y[lab]), X[unl])
            self.model_ = fit_warsds(sources, state, params, self._spec(), self.k,
                                     use_sds=self.use_sds, balance=self.balance)
        self.n_features_in_ = X.shape[1]
        self.retained_sources_ = [m.source_id for m in self.model_.models]
        return self

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatch(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return self.model_.decision_function(X)

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        return self.classes_[(self.decision_function(X) > 0).astype(int)]

    @property
    def retained_fraction_(self) -> float:
        check_is_fitted(self, "model_")
        return self.model_.retained_fraction


class FeatureMapTransformer(TransformerMixin, BaseEstimator):
    """PCA to ``n_components`` followed by min-max scaling to [0, 1].

    Statistics are learned on the data passed to ``fit`` and reused as-is
    by ``transform``, so held-out rows may fall outside [0, 1].
    """

    def __init__(self, n_components=20):
        self.n_components = n_components

    def fit(self, X, y=None):
        X = check_array(X)
        self.map_ = FeatureMap.fit(X, self.n_components)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "map_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatch(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return self.map_(X)
