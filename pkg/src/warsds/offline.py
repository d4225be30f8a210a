"""Offline weighted adaptation regularization.

Training rows are always stacked as ``[source; labeled target; unlabeled
target]``.  The coefficient vector solves

    [(E + lambda_P * M0 + lambda_Q * M) K + sigma I] alpha = E y

where ``E`` holds the class-balance loss weights, ``M0`` is the marginal MMD
matrix and ``M`` the sum of the per-class conditional MMD matrices.  Every MMD
matrix used here is rank one (``a a^T``), which :func:`_solve_factored`
exploits to build the system in O(N^2), and :class:`_RoundSolver` to reuse
one factorization across pseudo-label rounds.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from .dataset import (
    NON_TARGET,
    TARGET,
    SourceDomain,
    TargetState,
    WeightAssignment,
    loss_weight_diagonal,
    source_sample_weights,
    target_sample_weights,
)
from .exceptions import DimensionMismatch, EmptyBlock, MissingPseudoLabels, SingularSystem
from .kernel import KernelSpec, cross_kernel, resolved_gram

Labeler = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class WarHyperParams:
    w_t: float = 2.0
    sigma: float = 0.1
    lambda_P: float = 10.0
    lambda_Q: float = 10.0
    pseudo_iters: int = 5

    def __post_init__(self):
        if self.w_t < 1:
            raise ValueError(f"w_t must be >= 1, got {self.w_t}")
        if self.sigma < 0 or self.lambda_P < 0 or self.lambda_Q < 0:
            raise ValueError("sigma, lambda_P and lambda_Q must be non-negative")
        if int(self.pseudo_iters) < 1:
            raise ValueError(f"pseudo_iters must be >= 1, got {self.pseudo_iters}")


@dataclass(eq=False)
class WarModel:
    """Kernel expansion ``f(x) = sum_i alpha_i K(x_i, x)`` over the training stack."""

    alpha: np.ndarray
    X: np.ndarray
    spec: KernelSpec
    train_accuracy: float
    source_id: object = None
    n_rounds: int = 1
    converged: bool = True
    pseudo_y: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.alpha.shape[0] != self.X.shape[0]:
            raise DimensionMismatch("alpha length does not match training rows")

    def decision_function(self, X_query) -> np.ndarray:
        X_query = np.atleast_2d(np.asarray(X_query, dtype=float))
        if X_query.shape[1] != self.X.shape[1]:
            raise DimensionMismatch(
                f"query has {X_query.shape[1]} features, model expects {self.X.shape[1]}")
        return cross_kernel(X_query, self.X, self.spec) @ self.alpha

    def predict(self, X_query) -> np.ndarray:
        return to_labels(self.decision_function(X_query))


def to_labels(values) -> np.ndarray:
    """Threshold decision values at 0; ties go to NonTarget."""
    return np.where(np.asarray(values) > 0, TARGET, NON_TARGET)


def predict(model: WarModel, X_query) -> tuple[np.ndarray, np.ndarray]:
    values = model.decision_function(X_query)
    return values, to_labels(values)


def marginal_mmd_vector(n: int, m: int) -> np.ndarray:
    if n < 1 or m < 1:
        raise EmptyBlock(f"marginal MMD needs non-empty blocks, got n={n}, m={m}")
    return np.concatenate([np.full(n, 1.0 / n), np.full(m, -1.0 / m)])


def build_marginal_mmd(n: int, m: int) -> np.ndarray:
    a = marginal_mmd_vector(n, m)
    return np.outer(a, a)


def conditional_mmd_vectors(y_source, y_target) -> list[np.ndarray]:
    """One vector per class with at least one target sample; ``M_c = a_c a_c^T``."""
    y_source = np.asarray(y_source, dtype=float)
    y_target = np.asarray(y_target, dtype=float)
    vecs = []
    for c in (TARGET, NON_TARGET):
        src = y_source == c
        tgt = y_target == c
        n_c, m_c = int(src.sum()), int(tgt.sum())
        if n_c == 0 or m_c == 0:
            # no evidence for this class yet: M_c is zero
            continue
        vecs.append(np.concatenate([src / n_c, tgt / -m_c]))
    return vecs


def _target_labels(target: TargetState) -> np.ndarray:
    if target.m_u and target.pseudo_y is None:
        raise MissingPseudoLabels(f"{target.m_u} unlabeled samples have no pseudo-labels")
    pseudo = target.pseudo_y if target.m_u else np.empty(0)
    return np.concatenate([target.y_l, pseudo])


def build_conditional_mmd(source: SourceDomain, target: TargetState) -> np.ndarray:
    N = source.n + target.m_l + target.m_u
    M = np.zeros((N, N))
    for a in conditional_mmd_vectors(source.y, _target_labels(target)):
        M += np.outer(a, a)
    return M


def _diag(E) -> np.ndarray:
    E = np.asarray(E, dtype=float)
    return np.diag(E).copy() if E.ndim == 2 else E


def solve_alpha(K, E, M0, M, y, params: WarHyperParams) -> np.ndarray:
    """Closed-form coefficients from dense matrices.  ``E`` may be a diagonal vector."""
    K = np.asarray(K, dtype=float)
    N = K.shape[0]
    e = _diag(E)
    y = np.asarray(y, dtype=float)
    M0 = np.asarray(M0, dtype=float)
    M = np.asarray(M, dtype=float)
    if not (K.shape == (N, N) == M0.shape == M.shape and e.shape == y.shape == (N,)):
        raise DimensionMismatch("K, E, M0, M and y must share the dimension N")
    A = (np.diag(e) + params.lambda_P * M0 + params.lambda_Q * M) @ K
    A[np.diag_indices(N)] += params.sigma
    return _solve(A, e * y)


def _solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    if not np.any(b):
        return np.zeros_like(b)
    try:
        alpha = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(alpha)):
        raise SingularSystem("solution is not finite")
    return alpha


def _assemble(K, e, vecs, lams, sigma) -> np.ndarray:
    """``diag(e) K + sum_j lams[j] a_j (a_j^T K) + sigma I`` in O(N^2 r)."""
    A = e[:, None] * K
    if len(vecs):
        V = np.column_stack(vecs)
        A += (V * np.asarray(lams, dtype=float)) @ (V.T @ K)
    A[np.diag_indices_from(A)] += sigma
    return A


def _solve_factored(K, e, vecs_P: Sequence[np.ndarray], vecs_Q: Sequence[np.ndarray],
                    y, params: WarHyperParams) -> np.ndarray:
    lams = [params.lambda_P] * len(vecs_P) + [params.lambda_Q] * len(vecs_Q)
    return _solve(_assemble(K, e, list(vecs_P) + list(vecs_Q), lams, params.sigma), e * y)


class _RoundSolver:
    """Solves the pseudo-label rounds of one fit from a single LU factorization.

    Between rounds only the conditional MMD term changes (the right-hand
    side ``E y`` does not, since pseudo-labeled rows carry zero loss
    weight).  That term has rank <= 2, so each round is a Woodbury update
    of the factorized fixed part.
    """

    def __init__(self, K, e, vecs_P, params: WarHyperParams):
        self.K = K
        self.lam_Q = params.lambda_Q
        A = _assemble(K, e, vecs_P, [params.lambda_P] * len(vecs_P), params.sigma)
        with warnings.catch_warnings():
            warnings.simplefilter("error", LinAlgWarning)
            try:
                self.lu = lu_factor(A, check_finite=False)
            except (LinAlgWarning, ValueError) as exc:
                raise SingularSystem(str(exc)) from exc

    def solve(self, vecs_Q, b) -> np.ndarray:
        if not np.any(b):
            return np.zeros_like(b)
        x = lu_solve(self.lu, b, check_finite=False)
        if len(vecs_Q) and self.lam_Q:
            V = np.column_stack(vecs_Q)
            BU = lu_solve(self.lu, self.lam_Q * V, check_finite=False)
            VtK = V.T @ self.K
            cap = np.eye(V.shape[1]) + VtK @ BU
            try:
                x = x - BU @ np.linalg.solve(cap, VtK @ x)
            except np.linalg.LinAlgError as exc:
                raise SingularSystem(str(exc)) from exc
        if not np.all(np.isfinite(x)):
            raise SingularSystem("solution is not finite")
        return x


def objective_value(alpha, K, E, M0, M, y, params: WarHyperParams) -> float:
    alpha = np.asarray(alpha, dtype=float)
    K = np.asarray(K, dtype=float)
    e = _diag(E)
    y = np.asarray(y, dtype=float)
    if not (alpha.shape == y.shape == e.shape == (K.shape[0],)):
        raise DimensionMismatch("alpha, E and y must match K")
    f = K @ alpha
    r = y - f
    return float(r @ (e * r) + params.sigma * alpha @ f
                 + params.lambda_P * f @ (np.asarray(M0) @ f)
                 + params.lambda_Q * f @ (np.asarray(M) @ f))


def labeled_score(pred, truth, metric: str = "accuracy") -> float:
    """Member weight for fusion: raw accuracy or balanced accuracy."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if metric == "accuracy":
        return float(np.mean(pred == truth))
    if metric == "bca":
        accs = [np.mean(pred[truth == c] == c) for c in (TARGET, NON_TARGET) if np.any(truth == c)]
        return float(np.mean(accs))
    raise ValueError(f"unknown weight metric {metric!r}")


def weights_for(source: SourceDomain, target: TargetState, params: WarHyperParams,
                balance: bool = True) -> WeightAssignment:
    if balance:
        return WeightAssignment(source_sample_weights(source), params.w_t,
                                target_sample_weights(target))
    return WeightAssignment(np.ones(source.n), params.w_t, np.ones(target.m_l))


def fit_war(source: SourceDomain, target: TargetState, params: WarHyperParams = WarHyperParams(),
            spec: KernelSpec = KernelSpec(), initial_pseudo: Optional[Labeler] = None, *,
            balance: bool = True, weight_metric: str = "accuracy") -> WarModel:
    """Fit one source/target pair, refining pseudo-labels on the unlabeled pool.

    Pseudo-labels come from ``target.pseudo_y`` when present, else from
    ``initial_pseudo``, else from a weighted kernel RLS fit on the labeled
    rows only (the source domain alone when ``m_l == 0``).  Iteration stops
    after ``params.pseudo_iters`` solves or as soon as the pseudo-labels stop
    changing.
    """
    if source.d != target.d:
        raise DimensionMismatch(f"source has {source.d} features, target {target.d}")
    n, m_l, m_u = source.n, target.m_l, target.m_u
    n_lab = n + m_l
    X = np.vstack([source.X, target.X_l, target.X_u])
    spec, K = resolved_gram(X, spec)
    e = loss_weight_diagonal(weights_for(source, target, params, balance), n, m_l, m_u)
    y_lab = np.concatenate([source.y, target.y_l])
    vecs_P = [marginal_mmd_vector(n, m_l + m_u)] if m_l + m_u else []

    if m_u == 0:
        pseudo = np.empty(0)
    elif target.pseudo_y is not None:
        pseudo = np.asarray(target.pseudo_y, dtype=float)
    elif initial_pseudo is not None:
        pseudo = np.asarray(initial_pseudo(target.X_u), dtype=float)
        pseudo = to_labels(pseudo)
    else:
        init = _solve_factored(K[:n_lab, :n_lab], e[:n_lab], [], [], y_lab,
                               WarHyperParams(params.w_t, params.sigma, 0.0, 0.0))
        pseudo = to_labels(K[n_lab:, :n_lab] @ init)

    solver = _RoundSolver(K, e, vecs_P, params)
    rhs = e * np.concatenate([y_lab, np.zeros(m_u)])
    rounds = 0
    converged = True
    while True:
        rounds += 1
        vecs_Q = conditional_mmd_vectors(source.y, np.concatenate([target.y_l, pseudo]))
        alpha = solver.solve(vecs_Q, rhs)
        if m_u == 0:
            break
        new_pseudo = to_labels(K[n_lab:] @ alpha)
        converged = bool(np.array_equal(new_pseudo, pseudo))
        if converged or rounds >= params.pseudo_iters:
            break
        pseudo = new_pseudo

    train_pred = to_labels(K[:n_lab] @ alpha)
    return WarModel(alpha=alpha, X=X, spec=spec,
                    train_accuracy=labeled_score(train_pred, y_lab, weight_metric),
                    source_id=source.id, n_rounds=rounds, converged=converged,
                    pseudo_y=pseudo)
