import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import random_domain, random_instance, random_target
from warsds.dataset import NON_TARGET, TARGET, SourceDomain, TargetState
from warsds.exceptions import DimensionMismatch, EmptyBlock, MissingPseudoLabels, SingularSystem
from warsds.kernel import KernelSpec, gram_matrix
from warsds.offline import (
    WarHyperParams,
    WarModel,
    build_conditional_mmd,
    build_marginal_mmd,
    fit_war,
    objective_value,
    predict,
    solve_alpha,
)


def test_marginal_mmd_one_one():
    np.testing.assert_array_equal(build_marginal_mmd(1, 1), [[1, -1], [-1, 1]])


def test_marginal_mmd_blocks():
    M0 = build_marginal_mmd(2, 3)
    np.testing.assert_allclose(M0[:2, :2], 1 / 4, atol=1e-16)
    np.testing.assert_allclose(M0[2:, 2:], 1 / 9, atol=1e-16)
    np.testing.assert_allclose(M0[:2, 2:], -1 / 6, atol=1e-16)
    assert np.linalg.matrix_rank(M0) == 1
    assert np.linalg.eigvalsh(M0).min() > -1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 40), st.integers(1, 40))
def test_marginal_mmd_sums_to_zero(n, m):
    M0 = build_marginal_mmd(n, m)
    assert abs(M0.sum()) <= 1e-12
    np.testing.assert_array_equal(M0, M0.T)


def test_marginal_mmd_empty_block():
    with pytest.raises(EmptyBlock):
        build_marginal_mmd(0, 3)
    with pytest.raises(EmptyBlock):
        build_marginal_mmd(3, 0)


def test_conditional_mmd_single_pair():
    src = SourceDomain(0, np.zeros((3, 1)), [TARGET, NON_TARGET, NON_TARGET])
    tgt = TargetState(np.zeros((1, 1)), [TARGET])
    M = build_conditional_mmd(src, tgt)
    idx = [0, 3]
    np.testing.assert_array_equal(M[np.ix_(idx, idx)], [[1, -1], [-1, 1]])
    # the NonTarget class has no target sample, so it contributes nothing
    assert np.count_nonzero(M) == 4


def test_conditional_mmd_requires_pseudo_labels():
    src = SourceDomain(0, np.zeros((2, 1)), [TARGET, NON_TARGET])
    with pytest.raises(MissingPseudoLabels):
        build_conditional_mmd(src, TargetState(np.zeros((0, 1)), [], np.zeros((2, 1))))


def test_conditional_mmd_brute_force(rng):
    src = SourceDomain(0, rng.normal(size=(4, 2)), [TARGET, TARGET, NON_TARGET, NON_TARGET])
    tgt = TargetState(rng.normal(size=(1, 2)), [NON_TARGET], rng.normal(size=(3, 2)),
                      [TARGET, TARGET, NON_TARGET])
    M = build_conditional_mmd(src, tgt)
    X = np.vstack([src.X, tgt.X_l, tgt.X_u])
    K = gram_matrix(X, KernelSpec.rbf(0.5))
    y_tgt = np.concatenate([tgt.y_l, tgt.pseudo_y])
    assert abs(M.sum()) <= 1e-12
    for _ in range(20):
        alpha = rng.normal(size=8)
        f = K @ alpha
        assert alpha @ K @ M @ K @ alpha == pytest.approx(
            oracles.conditional_term(f, src.y, y_tgt), abs=1e-9)


def test_solve_alpha_zero_rhs(rng):
    K, e, M0, M, y, params = random_instance(rng, 10)
    np.testing.assert_array_equal(solve_alpha(K, np.zeros(10), M0, M, y, params), 0.0)


def test_solve_alpha_singular():
    K = np.ones((3, 3))  # rank one
    with pytest.raises(SingularSystem):
        solve_alpha(K, np.eye(3), np.zeros((3, 3)), np.zeros((3, 3)), np.array([1.0, -1, 1]),
                    WarHyperParams(sigma=0.0, lambda_P=0.0, lambda_Q=0.0))


def test_solve_alpha_dimension_check(rng):
    K, e, M0, M, y, params = random_instance(rng, 8)
    with pytest.raises(DimensionMismatch):
        solve_alpha(K, e, M0[:7, :7], M, y, params)


@pytest.mark.parametrize("seed", range(20))
def test_solve_alpha_is_local_minimum(seed):
    rng = np.random.default_rng(seed)
    K, e, M0, M, y, params = random_instance(rng, int(rng.integers(5, 21)))
    alpha = solve_alpha(K, e, M0, M, y, params)
    base = objective_value(alpha, K, e, M0, M, y, params)
    for _ in range(100):
        d = rng.normal(size=len(alpha))
        d *= 1e-3 / np.linalg.norm(d)
        assert objective_value(alpha + d, K, e, M0, M, y, params) >= base - 1e-12 * (1 + base)


@pytest.mark.parametrize("seed", range(10))
def test_solve_alpha_gradient_vanishes(seed):
    rng = np.random.default_rng(100 + seed)
    K, e, M0, M, y, params = random_instance(rng, int(rng.integers(5, 16)))
    alpha = solve_alpha(K, e, M0, M, y, params)
    h = 1e-6
    grad = np.array([
        (objective_value(alpha + h * u, K, e, M0, M, y, params)
         - objective_value(alpha - h * u, K, e, M0, M, y, params)) / (2 * h)
        for u in np.eye(len(alpha))])
    assert np.linalg.norm(grad) <= 1e-6 * (1 + np.linalg.norm(alpha))
    E = np.diag(e)
    analytic = 2 * K @ ((E + params.lambda_P * M0 + params.lambda_Q * M) @ K @ alpha
                        + params.sigma * alpha - E @ y)
    assert np.linalg.norm(analytic) <= 1e-6 * (1 + np.linalg.norm(alpha))


def test_objective_at_zero(rng):
    K, e, M0, M, y, params = random_instance(rng, 9)
    assert objective_value(np.zeros(9), K, e, M0, M, y, params) == pytest.approx(y @ (e * y))


def test_objective_interpolation(rng):
    X = rng.normal(size=(6, 2))
    K = gram_matrix(X, KernelSpec.rbf(1.0))
    y = np.where(rng.random(6) > 0.5, 1.0, -1.0)
    params = WarHyperParams(sigma=0.0, lambda_P=0.0, lambda_Q=0.0)
    alpha = np.linalg.solve(K, y)
    Z = np.zeros((6, 6))
    assert objective_value(alpha, K, np.ones(6), Z, Z, y, params) == pytest.approx(0, abs=1e-18)


def test_objective_term_by_term(rng):
    for _ in range(10):
        N = int(rng.integers(4, 12))
        K, e, M0, M, y, params = random_instance(rng, N)
        n = int(np.argmax(M0[0] < 0))
        alpha = rng.normal(size=N)
        want = oracles.objective(alpha, K, e, y, n, y[:n], y[n:], params.sigma,
                                 params.lambda_P, params.lambda_Q)
        assert objective_value(alpha, K, e, M0, M, y, params) == pytest.approx(want, abs=1e-9)


def test_predict_zero_alpha(rng):
    X = rng.normal(size=(5, 3))
    model = WarModel(np.zeros(5), X, KernelSpec.rbf(1.0), 1.0)
    values, labels = predict(model, rng.normal(size=(4, 3)))
    np.testing.assert_array_equal(values, 0.0)
    np.testing.assert_array_equal(labels, NON_TARGET)


def test_predict_on_training_rows(rng):
    X = rng.normal(size=(6, 3))
    spec = KernelSpec.rbf(0.3)
    alpha = rng.normal(size=6)
    values, _ = predict(WarModel(alpha, X, spec, 1.0), X)
    np.testing.assert_allclose(values, alpha @ gram_matrix(X, spec), atol=1e-14)


def test_predict_linear_single_sample(rng):
    x1 = rng.normal(size=3)
    Xq = rng.normal(size=(4, 3))
    values, _ = predict(WarModel(np.array([1.0]), x1[None], KernelSpec.linear(), 1.0), Xq)
    np.testing.assert_allclose(values, Xq @ x1, atol=1e-15)


def test_predict_dimension_mismatch(rng):
    with pytest.raises(DimensionMismatch):
        predict(WarModel(np.zeros(2), np.zeros((2, 3)), KernelSpec.linear(), 1.0), np.zeros((1, 2)))


def test_fit_war_single_round_without_pool(rng):
    src = random_domain(rng, 20, 3)
    tgt = random_target(rng, 6, 0, 3)
    model = fit_war(src, tgt, WarHyperParams(pseudo_iters=5))
    assert model.n_rounds == 1 and model.alpha.shape == (26,)


def test_fit_war_separable_train_accuracy():
    rng = np.random.default_rng(3)
    src = random_domain(rng, 60, 2, sep=6.0)
    tgt = random_target(rng, 20, 40, 2, sep=6.0, pseudo=False)
    model = fit_war(src, tgt)
    assert model.train_accuracy >= 0.95


def test_fit_war_dimension_mismatch(rng):
    with pytest.raises(DimensionMismatch):
        fit_war(random_domain(rng, 10, 3), random_target(rng, 4, 2, 2))


def test_fit_war_without_labels_uses_source_init(rng):
    src = random_domain(rng, 30, 3, sep=4.0)
    tgt = random_target(rng, 0, 20, 3, pseudo=False)
    model = fit_war(src, tgt)
    assert model.alpha.shape == (50,) and np.all(np.isfinite(model.alpha))
    assert model.pseudo_y.shape == (20,)


def test_fit_war_reproduces_dense_solve(rng):
    # the factored system assembly must agree with the dense reference path
    src = random_domain(rng, 15, 3)
    tgt = random_target(rng, 5, 6, 3)
    params = WarHyperParams(pseudo_iters=1)
    model = fit_war(src, tgt, params)
    K = gram_matrix(model.X, model.spec)
    from warsds.dataset import loss_weight_diagonal
    from warsds.offline import weights_for
    e = loss_weight_diagonal(weights_for(src, tgt, params), 15, 5, 6)
    y = np.concatenate([src.y, tgt.y_l, tgt.pseudo_y])
    alpha = solve_alpha(K, np.diag(e), build_marginal_mmd(15, 11), build_conditional_mmd(src, tgt),
                        y, params)
    np.testing.assert_allclose(model.alpha, alpha, rtol=1e-9, atol=1e-11)


def _convergence_rate(pseudo_iters, seeds=range(20)):
    from warsds.features import FeatureMap, SynthConfig, synth_generate
    hits = []
    for seed in seeds:
        doms = synth_generate(SynthConfig(seed=seed))
        fmap = FeatureMap.fit(doms[0].X, 20)
        Xt = fmap(doms[0].X)
        rng = np.random.default_rng(seed)
        lab = rng.choice(len(Xt), 10, replace=False)
        rest = np.setdiff1d(np.arange(len(Xt)), lab)
        src = SourceDomain(1, fmap(doms[1].X), doms[1].y)
        model = fit_war(src, TargetState(Xt[lab], doms[0].y[lab], Xt[rest]),
                        WarHyperParams(pseudo_iters=pseudo_iters))
        hits.append(model.converged)
    return float(np.mean(hits))


def test_pseudo_labels_settle():
    # the last few near-boundary flips die out by round 10 on the default generator
    assert _convergence_rate(10) >= 0.9
    assert _convergence_rate(15) == 1.0


@pytest.mark.xfail(strict=True, reason="about half the seeds still flip 1-2 pool labels "
                                       "at round 5 on the default generator")
def test_pseudo_labels_fixed_by_round_five():
    assert _convergence_rate(5) >= 0.9
