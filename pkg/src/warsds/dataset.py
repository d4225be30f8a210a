"""Domain containers, class-balance weights and the loss-weight diagonal."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Hashable, Optional

import numpy as np

from .exceptions import DimensionMismatch, NonFiniteInput, SingleClassDomain

TARGET = 1.0
NON_TARGET = -1.0


class ClassLabel(enum.Enum):
    """The two classes. ``value`` is the numeric encoding used in the loss."""

    TARGET = TARGET
    NON_TARGET = NON_TARGET

    @classmethod
    def from_tag(cls, tag: str) -> "ClassLabel":
        return {"T": cls.TARGET, "N": cls.NON_TARGET}[tag]

    @property
    def tag(self) -> str:
        return "T" if self is ClassLabel.TARGET else "N"


def as_labels(y) -> np.ndarray:
    """Coerce labels to a float array of +1/-1.

    Accepts :class:`ClassLabel` members, ``"T"``/``"N"`` tags or numbers
    (anything > 0 is Target).
    """
    y = list(y) if not isinstance(y, np.ndarray) else y
    if isinstance(y, np.ndarray) and y.dtype.kind in "fiub":
        y = np.asarray(y, dtype=float).ravel()
        return np.where(y > 0, TARGET, NON_TARGET)
    out = np.empty(len(y), dtype=float)
    for i, v in enumerate(y):
        if isinstance(v, ClassLabel):
            out[i] = v.value
        elif isinstance(v, str):
            out[i] = ClassLabel.from_tag(v).value
        else:
            out[i] = TARGET if float(v) > 0 else NON_TARGET
    return out


def _as_matrix(X, name: str, d: Optional[int] = None) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1 and X.size == 0:
        X = X.reshape(0, d or 0)
    if X.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {X.shape}")
    if d is not None and X.shape[0] and X.shape[1] != d:
        raise DimensionMismatch(f"{name} has {X.shape[1]} features, expected {d}")
    if d is not None and X.shape[0] == 0:
        X = X.reshape(0, d)
    if not np.all(np.isfinite(X)):
        raise NonFiniteInput(f"{name} contains non-finite values")
    return X


@dataclass(frozen=True, eq=False)
class SourceDomain:
    """One fully labeled auxiliary domain."""

    id: Hashable
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = _as_matrix(self.X, "X")
        y = as_labels(self.y)
        if len(y) != X.shape[0]:
            raise DimensionMismatch(f"{X.shape[0]} rows but {len(y)} labels")
        if X.shape[0] < 2:
            raise SingleClassDomain(f"source domain {self.id!r} needs at least 2 samples")
        n1 = int(np.sum(y == TARGET))
        if n1 == 0 or n1 == len(y):
            raise SingleClassDomain(f"source domain {self.id!r} has a single class")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True, eq=False)
class TargetState:
    """The new domain: labeled samples, an unlabeled pool and optional pseudo-labels.

    In online use ``X_u`` is empty.
    """

    X_l: np.ndarray
    y_l: np.ndarray
    X_u: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    pseudo_y: Optional[np.ndarray] = None

    def __post_init__(self):
        X_l = np.asarray(self.X_l, dtype=float)
        X_u = np.asarray(self.X_u, dtype=float)
        d = None
        for arr in (X_l, X_u):
            if arr.ndim == 2 and arr.shape[0] > 0:
                d = arr.shape[1]
                break
        if d is None:
            d = max(X_l.shape[1] if X_l.ndim == 2 else 0, X_u.shape[1] if X_u.ndim == 2 else 0)
        X_l = _as_matrix(X_l, "X_l", d)
        X_u = _as_matrix(X_u, "X_u", d)
        y_l = as_labels(self.y_l) if len(self.y_l) else np.empty(0)
        if len(y_l) != X_l.shape[0]:
            raise DimensionMismatch(f"{X_l.shape[0]} labeled rows but {len(y_l)} labels")
        pseudo = self.pseudo_y
        if pseudo is not None:
            pseudo = as_labels(pseudo) if len(pseudo) else np.empty(0)
            if len(pseudo) != X_u.shape[0]:
                raise DimensionMismatch(
                    f"{len(pseudo)} pseudo-labels for {X_u.shape[0]} unlabeled rows")
            pseudo.setflags(write=False)
        for arr in (X_l, X_u, y_l):
            arr.setflags(write=False)
        object.__setattr__(self, "X_l", X_l)
        object.__setattr__(self, "X_u", X_u)
        object.__setattr__(self, "y_l", y_l)
        object.__setattr__(self, "pseudo_y", pseudo)

    @property
    def m_l(self) -> int:
        return self.X_l.shape[0]

    @property
    def m_u(self) -> int:
        return self.X_u.shape[0]

    @property
    def d(self) -> int:
        return self.X_l.shape[1]

    def with_pseudo(self, pseudo_y) -> "TargetState":
        return TargetState(self.X_l, self.y_l, self.X_u, pseudo_y)

    def labeled_only(self) -> "TargetState":
        return TargetState(self.X_l, self.y_l, np.empty((0, self.d)))


@dataclass(frozen=True)
class WeightAssignment:
    w_s: np.ndarray
    w_t_scalar: float
    w_t: np.ndarray


def balance_weights(y) -> np.ndarray:
    """Weight 1 for Target, ``n_target / n_nontarget`` for NonTarget.

    With no Target samples the NonTarget weight is 0; with no NonTarget
    samples the ratio never applies and every weight is 1.
    """
    y = np.asarray(y, dtype=float)
    n1 = int(np.sum(y == TARGET))
    n2 = len(y) - n1
    if n2 == 0:
        return np.ones(len(y))
    return np.where(y == TARGET, 1.0, n1 / n2)


def source_sample_weights(domain: SourceDomain) -> np.ndarray:
    y = domain.y
    n1 = int(np.sum(y == TARGET))
    if n1 == 0 or n1 == len(y):
        raise SingleClassDomain("both classes are required to balance source weights")
    return balance_weights(y)


def target_sample_weights(target: TargetState) -> np.ndarray:
    return balance_weights(target.y_l)


def build_E(weights: WeightAssignment, n: int, m_l: int, m_u: int) -> np.ndarray:
    """Diagonal loss-weight matrix over the stacked [source; labeled; unlabeled] rows."""
    return np.diag(loss_weight_diagonal(weights, n, m_l, m_u))


def loss_weight_diagonal(weights: WeightAssignment, n: int, m_l: int, m_u: int) -> np.ndarray:
    w_s = np.asarray(weights.w_s, dtype=float)
    w_t = np.asarray(weights.w_t, dtype=float)
    if len(w_s) != n or len(w_t) != m_l:
        raise DimensionMismatch(
            f"weights of length ({len(w_s)}, {len(w_t)}) for n={n}, m_l={m_l}")
    return np.concatenate([w_s, weights.w_t_scalar * w_t, np.zeros(m_u)])
