"""Kernel specifications and Gram matrices."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .exceptions import DegenerateData, DimensionMismatch, NonFiniteInput


class KernelKind(str, enum.Enum):
    LINEAR = "linear"
    RBF = "rbf"


class BandwidthMode(str, enum.Enum):
    FIXED = "fixed"
    MEDIAN = "median"


@dataclass(frozen=True)
class KernelSpec:
    """``kind='rbf'`` evaluates ``exp(-gamma * ||x - x'||^2)``.

    With ``bandwidth_mode="median"`` the stored gamma is a placeholder until
    :meth:`resolve` replaces it with the median-heuristic value for a data set.
    """

    kind: KernelKind = KernelKind.RBF
    gamma: float = 1.0
    bandwidth_mode: BandwidthMode = BandwidthMode.MEDIAN

    def __post_init__(self):
        object.__setattr__(self, "kind", KernelKind(self.kind))
        object.__setattr__(self, "bandwidth_mode", BandwidthMode(self.bandwidth_mode))
        if self.kind is KernelKind.RBF and not self.gamma > 0:
            raise ValueError(f"RBF gamma must be positive, got {self.gamma}")

    @classmethod
    def linear(cls) -> "KernelSpec":
        return cls(KernelKind.LINEAR, 1.0, BandwidthMode.FIXED)

    @classmethod
    def rbf(cls, gamma: float | None = None) -> "KernelSpec":
        if gamma is None:
            return cls(KernelKind.RBF, 1.0, BandwidthMode.MEDIAN)
        return cls(KernelKind.RBF, float(gamma), BandwidthMode.FIXED)

    def resolve(self, X) -> "KernelSpec":
        """Return a fixed spec, computing the median-heuristic gamma on ``X`` if needed."""
        if self.kind is KernelKind.RBF and self.bandwidth_mode is BandwidthMode.MEDIAN:
            return replace(self, gamma=median_heuristic(X), bandwidth_mode=BandwidthMode.FIXED)
        return self


def _check_finite(X, name="X") -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if not np.all(np.isfinite(X)):
        raise NonFiniteInput(f"{name} contains non-finite values")
    return X


def cross_kernel(A, B, spec: KernelSpec) -> np.ndarray:
    """Kernel matrix between the rows of ``A`` and the rows of ``B``."""
    A = _check_finite(A, "A")
    B = _check_finite(B, "B")
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatch(f"{A.shape[1]} vs {B.shape[1]} features")
    if spec.kind is KernelKind.LINEAR:
        return A @ B.T
    return np.exp(-spec.gamma * cdist(A, B, "sqeuclidean"))


def gram_matrix(X, spec: KernelSpec) -> np.ndarray:
    X = _check_finite(X)
    if spec.kind is KernelKind.LINEAR:
        K = X @ X.T
        # BLAS may differ in the last bit between the two triangles
        return np.triu(K) + np.triu(K, 1).T
    return _rbf_from_sqdist(cdist(X, X, "sqeuclidean"), spec.gamma)


def _rbf_from_sqdist(D: np.ndarray, gamma: float) -> np.ndarray:
    # (a - b)^2 == (b - a)^2 exactly, so D and K are exactly symmetric
    K = np.exp(-gamma * D)
    np.fill_diagonal(K, 1.0)
    return K


def resolved_gram(X, spec: KernelSpec) -> tuple[KernelSpec, np.ndarray]:
    """``(spec.resolve(X), gram_matrix(X, resolved))`` sharing one distance pass."""
    X = _check_finite(X)
    if spec.kind is KernelKind.LINEAR:
        return spec, gram_matrix(X, spec)
    D = cdist(X, X, "sqeuclidean")
    if spec.bandwidth_mode is BandwidthMode.MEDIAN:
        spec = replace(spec, gamma=_median_gamma(np.sqrt(D[np.triu_indices(len(X), 1)])),
                       bandwidth_mode=BandwidthMode.FIXED)
    return spec, _rbf_from_sqdist(D, spec.gamma)


def kernel_row(X, x, spec: KernelSpec) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    X = _check_finite(X)
    if X.shape[1] != x.shape[0]:
        raise DimensionMismatch(f"query has {x.shape[0]} features, X has {X.shape[1]}")
    return cross_kernel(X, x[None, :], spec)[:, 0]


def median_heuristic(X) -> float:
    """``1 / (2 * median^2)`` over all pairwise Euclidean distances."""
    X = _check_finite(X)
    if X.shape[0] < 2:
        raise DegenerateData("median heuristic needs at least two rows")
    return _median_gamma(pdist(X))


def _median_gamma(dists: np.ndarray) -> float:
    if dists.size == 0:
        raise DegenerateData("median heuristic needs at least two rows")
    med = float(np.median(dists))
    if med <= 0:
        # more than half the pairs coincide; fall back to the nonzero distances
        dists = dists[dists > 0]
        if dists.size == 0:
            raise DegenerateData("all rows are identical")
        med = float(np.median(dists))
    return 1.0 / (2.0 * med * med)
