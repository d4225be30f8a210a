import numpy as np
import pytest

from conftest import random_domain, random_target
from warsds.dataset import TargetState, source_sample_weights
from warsds.kernel import KernelSpec, gram_matrix
from warsds.offline import WarHyperParams, build_marginal_mmd, fit_war
from warsds.online import build_marginal_mmd_online, fit_owar


def test_online_marginal_one_one():
    np.testing.assert_array_equal(build_marginal_mmd_online(1, 1), [[1, -1], [-1, 1]])


@pytest.mark.parametrize("n,m", [(1, 1), (3, 2), (7, 11)])
def test_online_marginal_matches_offline(n, m):
    np.testing.assert_array_equal(build_marginal_mmd_online(n, m), build_marginal_mmd(n, m))


def test_online_marginal_rank_one():
    M = build_marginal_mmd_online(3, 2)
    a = np.array([1 / 3] * 3 + [-1 / 2] * 2)
    np.testing.assert_allclose(M, np.outer(a, a), atol=1e-16)
    assert abs(M.sum()) <= 1e-15 and np.linalg.matrix_rank(M) == 1


def test_owar_without_labels_is_weighted_rls(rng):
    src = random_domain(rng, 25, 3)
    tgt = TargetState(np.empty((0, 3)), [])
    params = WarHyperParams()
    spec = KernelSpec.rbf(0.4)
    model = fit_owar(src, tgt, params, spec)
    K = gram_matrix(src.X, spec)
    W = np.diag(source_sample_weights(src))
    want = np.linalg.solve(W @ K + params.sigma * np.eye(25), W @ src.y)
    np.testing.assert_allclose(model.alpha, want, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_owar_matches_war_without_pool(seed):
    rng = np.random.default_rng(seed)
    src = random_domain(rng, int(rng.integers(5, 30)), 3)
    tgt = random_target(rng, int(rng.integers(1, 10)), 0, 3)
    params = WarHyperParams(pseudo_iters=1)
    on = fit_owar(src, tgt, params)
    off = fit_war(src, tgt, params)
    np.testing.assert_allclose(on.alpha, off.alpha, rtol=0, atol=1e-10)


def test_owar_separable_train_accuracy():
    rng = np.random.default_rng(5)
    src = random_domain(rng, 60, 2, sep=6.0)
    tgt = random_target(rng, 10, 0, 2, sep=6.0)
    assert fit_owar(src, tgt).train_accuracy >= 0.95


def test_owar_rejects_pool(rng):
    with pytest.raises(ValueError):
        fit_owar(random_domain(rng, 10, 2), random_target(rng, 3, 2, 2))
