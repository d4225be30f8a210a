"""PCA scores, per-dimension min-max scaling and a synthetic multi-domain generator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .dataset import NON_TARGET, TARGET, SourceDomain
from .exceptions import DimensionMismatch, InvalidConfig, RankDeficient


@dataclass(frozen=True, eq=False)
class PcaBasis:
    mean: np.ndarray
    components: np.ndarray  # (n_comp, d_raw), orthonormal rows
    explained_variance: np.ndarray
    rank_deficient: bool = False

    @property
    def n_comp(self) -> int:
        return self.components.shape[0]


def pca_fit(X, n_comp: int = 20, *, strict: bool = False) -> PcaBasis:
    """Top principal directions of mean-centered ``X`` via thin SVD.

    Each component's sign is fixed so its largest-magnitude entry is positive.
    If fewer than ``n_comp`` directions carry variance the trailing rows are
    an arbitrary orthonormal completion and ``rank_deficient`` is set
    (``strict=True`` raises instead).
    """
    X = np.asarray(X, dtype=float)
    N, d = X.shape
    if N < 2:
        raise RankDeficient("PCA needs at least two samples")
    if n_comp > min(N, d):
        raise RankDeficient(f"cannot extract {n_comp} components from a {N}x{d} matrix")
    mean = X.mean(axis=0)
    _, s, Vt = np.linalg.svd(X - mean, full_matrices=False)
    comps = Vt[:n_comp].copy()
    pivots = np.argmax(np.abs(comps), axis=1)
    comps *= np.sign(comps[np.arange(n_comp), pivots])[:, None]
    var = s[:n_comp] ** 2 / (N - 1)
    deficient = bool(var[-1] <= 1e-12 * max(var[0], np.finfo(float).tiny))
    if deficient and strict:
        raise RankDeficient(f"fewer than {n_comp} directions with nonzero variance")
    return PcaBasis(mean=mean, components=comps, explained_variance=var,
                    rank_deficient=deficient)


def pca_transform(basis: PcaBasis, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != basis.mean.shape[0]:
        raise DimensionMismatch(f"{X.shape[1]} features, basis expects {basis.mean.shape[0]}")
    return (X - basis.mean) @ basis.components.T


def minmax_normalize(X) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Map each column affinely onto [0, 1]; constant columns become 0.5.

    Returns ``(X_scaled, col_min, col_max)``.
    """
    X = np.asarray(X, dtype=float)
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    return minmax_apply(X, lo, hi), lo, hi


def minmax_apply(X, lo, hi) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    span = hi - lo
    flat = span <= 0
    out = (X - lo) / np.where(flat, 1.0, span)
    out[:, flat] = 0.5
    return out


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """A fitted PCA basis followed by fixed min-max scaling."""

    basis: PcaBasis
    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def fit(cls, X, n_comp: int = 20) -> "FeatureMap":
        basis = pca_fit(X, n_comp)
        _, lo, hi = minmax_normalize(pca_transform(basis, X))
        return cls(basis, lo, hi)

    def __call__(self, X) -> np.ndarray:
        return minmax_apply(pca_transform(self.basis, X), self.lo, self.hi)


@dataclass(frozen=True)
class SynthConfig:
    """Synthetic stand-in for a multi-subject oddball data set.

    Every domain draws two Gaussian classes (NonTarget centered at 0, Target
    shifted by ``class_separation`` along a shared direction) with a decaying
    variance spectrum, then applies its own random rotation ``expm(s A)`` and
    translation, both scaled by ``domain_shift_scale``.
    """

    n_domains: int = 14
    samples_per_domain: int = 270
    target_fraction: float = 34 / 270
    raw_dim: int = 40
    class_separation: float = 1.5
    domain_shift_scale: float = 0.6
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.target_fraction < 0.5:
            raise InvalidConfig("target_fraction must lie in (0, 0.5)")
        if self.n_domains < 2 or self.samples_per_domain < 2 or self.raw_dim < 2:
            raise InvalidConfig("n_domains, samples_per_domain and raw_dim must be >= 2")
        if self.class_separation < 0 or self.domain_shift_scale < 0:
            raise InvalidConfig("class_separation and domain_shift_scale must be >= 0")

    @property
    def n_targets(self) -> int:
        return int(round(self.samples_per_domain * self.target_fraction))


def _noise_scales(d: int) -> np.ndarray:
    return 1.0 / np.sqrt(1.0 + np.arange(d) / 4.0)


def synth_generate(config: SynthConfig) -> list[SourceDomain]:
    """One labeled domain per synthetic subject; rows are in presentation order."""
    ss = np.random.SeedSequence(config.seed)
    shared_seq, *domain_seqs = ss.spawn(config.n_domains + 1)
    shared = np.random.default_rng(shared_seq)
    d = config.raw_dim
    direction = shared.standard_normal(d) * _noise_scales(d)
    direction /= np.linalg.norm(direction)
    scales = _noise_scales(d)
    n, n_t = config.samples_per_domain, config.n_targets
    if n_t < 1 or n_t >= n:
        raise InvalidConfig(f"{n_t} targets out of {n} samples leaves a class empty")

    domains = []
    for idx, seq in enumerate(domain_seqs):
        rng = np.random.default_rng(seq)
        G = rng.standard_normal((d, d))
        rotation = expm(config.domain_shift_scale * (G - G.T) / np.sqrt(2 * d))
        offset = config.domain_shift_scale * rng.standard_normal(d)
        y = np.full(n, NON_TARGET)
        y[:n_t] = TARGET
        y = y[rng.permutation(n)]
        Z = rng.standard_normal((n, d)) * scales
        Z[y == TARGET] += config.class_separation * direction
        X = Z @ rotation.T + offset
        domains.append(SourceDomain(id=idx, X=X, y=y))
    return domains


