import numpy as np
import pytest

from warsds.dataset import NON_TARGET, TARGET, SourceDomain, TargetState
from warsds.offline import WarHyperParams


def labels_with_both(rng, n, p_target=0.3):
    y = np.where(rng.random(n) < p_target, TARGET, NON_TARGET)
    y[0], y[1] = TARGET, NON_TARGET
    return y


def random_domain(rng, n, d, shift=0.0, sep=2.0, dom_id=0):
    y = labels_with_both(rng, n)
    X = rng.normal(size=(n, d)) + shift
    X[y == TARGET, 0] += sep
    return SourceDomain(dom_id, X, y)


def random_target(rng, m_l, m_u, d, shift=0.0, sep=2.0, pseudo=True):
    y = labels_with_both(rng, m_l) if m_l >= 2 else np.full(m_l, TARGET)
    X_l = rng.normal(size=(m_l, d)) + shift
    X_l[y == TARGET, 0] += sep
    X_u = rng.normal(size=(m_u, d)) + shift
    pseudo_y = np.where(rng.random(m_u) < 0.4, TARGET, NON_TARGET) if pseudo else None
    return TargetState(X_l, y, X_u, pseudo_y)


def random_instance(rng, N, lam_max=10.0):
    """A random (K, e, M0, M, y, params) with K symmetric PSD and rank-one MMD blocks."""
    n = int(rng.integers(2, N - 1))
    m = N - n
    X = rng.normal(size=(N, 3))
    K = np.exp(-0.5 * ((X[:, None, :] - X[None, :, :]) ** 2).sum(-1))
    e = np.concatenate([rng.uniform(0.2, 1.0, n), rng.uniform(0, 2.0, m)])
    e[rng.random(N) < 0.2] = 0.0
    e[0] = 1.0
    a = np.concatenate([np.full(n, 1 / n), np.full(m, -1 / m)])
    M0 = np.outer(a, a)
    ys = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    yt = np.where(rng.random(m) < 0.5, 1.0, -1.0)
    M = np.zeros((N, N))
    for c in (1.0, -1.0):
        if (ys == c).any() and (yt == c).any():
            ac = np.concatenate([(ys == c) / (ys == c).sum(), (yt == c) / -(yt == c).sum()])
            M += np.outer(ac, ac)
    y = np.concatenate([ys, yt])
    params = WarHyperParams(sigma=rng.uniform(0.01, 1.0), lambda_P=rng.uniform(0, lam_max),
                            lambda_Q=rng.uniform(0, lam_max))
    return K, e, M0, M, y, params


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
