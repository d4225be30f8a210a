"""Calibration simulations with leave-one-subject-out rotation.

Each held-out subject plays the new user; the others are source domains.  A
run picks a random start ``m0`` in the subject's epoch sequence and labels
``p`` consecutive epochs per iteration (wrapping at the end).  After each
labeling step every algorithm is refit and scored by BCA on the epochs that
are still unlabeled.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from threadpoolctl import threadpool_limits

from ..dataset import SourceDomain, TargetState
from ..ensemble import (
    Mode,
    baseline_arrls,
    baseline_target_only,
    baseline_tl,
    fit_owarsds,
    fit_warsds,
)
from ..exceptions import ConfigError
from ..features import FeatureMap, synth_generate
from .config import ExperimentConfig
from .metrics import aupc, bca

log = logging.getLogger(__name__)


@dataclass
class RunResult:
    mode: str
    algorithm: str
    subject_id: int
    run_index: int
    m0: int  # 1-based start position
    curve: list = field(default_factory=list)  # (m_l, bca)
    aupc: float = float("nan")
    retained_fraction: float = 1.0
    wall_time: float = 0.0


def labeled_indices(m0: int, t: int, p: int, m: int) -> np.ndarray:
    """0-based indices labeled after ``t`` iterations starting at 1-based ``m0``."""
    count = min(t * p, m)
    return (m0 - 1 + np.arange(count)) % m


def load_domains(config: ExperimentConfig) -> list[SourceDomain]:
    if config.data_dir:
        from .io import read_dataset
        return read_dataset(config.data_dir)
    return synth_generate(config.synth)


def online_feature_map(X_target, labeled, raw_sources, n_comp: int) -> FeatureMap:
    """Feature map for an online iteration.

    Fit on the labeled target rows once there are more of them than
    components, otherwise on the pooled source rows.
    """
    if len(labeled) >= n_comp + 1:
        return FeatureMap.fit(X_target[labeled], n_comp)
    return FeatureMap.fit(np.vstack([s.X for s in raw_sources]), n_comp)


def _check(config: ExperimentConfig, domains, mode: Mode) -> list[int]:
    if config.mode is not mode:
        raise ConfigError(f"config is in {config.mode.value} mode, expected {mode.value}")
    if len(domains) < 2:
        raise ConfigError("need at least two domains")
    subjects = list(config.subjects) if config.subjects is not None else list(range(len(domains)))
    for s in subjects:
        if not 0 <= s < len(domains):
            raise ConfigError(f"subject index {s} out of range")
    m_min = min(domains[s].n for s in subjects)
    if (config.max_iterations - 1) * config.p >= m_min:
        raise ConfigError(
            f"{config.max_iterations} iterations of {config.p} labels exhaust a {m_min}-epoch subject")
    return subjects


def _fitters(config: ExperimentConfig) -> dict[str, Callable]:
    params, spec, k, wm = config.params, config.kernel, config.k, config.weight_metric
    return {
        "wAR": lambda S, T: fit_warsds(S, T, params, spec, k, use_sds=False, weight_metric=wm),
        "wARSDS": lambda S, T: fit_warsds(S, T, params, spec, k, weight_metric=wm),
        "ARRLS": lambda S, T: baseline_arrls(S, T, params, spec, weight_metric=wm),
        "OwAR": lambda S, T: fit_owarsds(S, T, params, spec, k, use_sds=False, weight_metric=wm),
        "OwARSDS": lambda S, T: fit_owarsds(S, T, params, spec, k, weight_metric=wm),
        "TL": lambda S, T: baseline_tl(S, T, params, spec, weight_metric=wm),
        "TLSDS": lambda S, T: baseline_tl(S, T, params, spec, True, k, weight_metric=wm),
        "TargetOnly": lambda S, T: baseline_target_only(T, params, spec, wm),
    }


# algorithms whose fit consumes pseudo-labels from their own previous iteration
_SEMI_SUPERVISED = {"wAR", "wARSDS", "ARRLS"}


def run_one(config: ExperimentConfig, domains: Sequence[SourceDomain], subject: int,
            run: int) -> list[RunResult]:
    """One (held-out subject, run) pair for every configured algorithm."""
    with threadpool_limits(limits=1):
        return _run_one(config, domains, subject, run)


def _run_one(config, domains, subject, run):
    rng = np.random.default_rng([config.seed, subject, run])
    target = domains[subject]
    raw_sources = [d for i, d in enumerate(domains) if i != subject]
    m = target.n
    m0 = int(rng.integers(1, m + 1))
    online = config.mode is Mode.ONLINE
    n_comp = config.n_components
    fitters = _fitters(config)
    results = {a: RunResult(config.mode.value, a, subject, run, m0) for a in config.algorithms}
    retained = {a: [] for a in config.algorithms}
    previous: dict[str, object] = {}

    def featurize(fmap):
        return [SourceDomain(s.id, fmap(s.X), s.y) for s in raw_sources], fmap(target.X)

    if not online:
        sources, X_t = featurize(FeatureMap.fit(target.X, n_comp))
    pooled_map = None

    if "OracleUpperBound" in results:
        t0 = time.perf_counter()
        oracle_map = FeatureMap.fit(target.X, n_comp)
        full = TargetState(oracle_map(target.X), target.y)
        oracle = fitters["TargetOnly"](None, full)
        oracle_time = time.perf_counter() - t0

    for t in range(config.max_iterations):
        lab = labeled_indices(m0, t, config.p, m)
        rest = np.setdiff1d(np.arange(m), lab)
        m_l = len(lab)
        y_rest = target.y[rest]
        if online:
            if m_l < n_comp + 1 and pooled_map is None:
                pooled_map = online_feature_map(target.X, lab, raw_sources, n_comp)
            fmap = pooled_map if m_l < n_comp + 1 else online_feature_map(
                target.X, lab, raw_sources, n_comp)
            sources, X_t = featurize(fmap)
        X_l = X_t[lab]
        X_u = X_t[rest]
        for name in config.algorithms:
            res = results[name]
            if name == "OracleUpperBound":
                res.curve.append((m_l, bca(oracle.predict(oracle_map(target.X[rest])), y_rest)))
                continue
            t0 = time.perf_counter()
            if online or name not in _SEMI_SUPERVISED:
                state = TargetState(X_l, target.y[lab], np.empty((0, n_comp)))
            else:
                pseudo = previous[name].predict(X_u) if name in previous else None
                state = TargetState(X_l, target.y[lab], X_u, pseudo)
            clf = fitters[name](sources, state)
            previous[name] = clf
            pred = clf.predict(X_u)
            res.wall_time += time.perf_counter() - t0
            res.curve.append((m_l, bca(pred, y_rest)))
            retained[name].append(getattr(clf, "retained_fraction", 1.0))

    for name, res in results.items():
        res.aupc = aupc(res.curve)
        if name == "OracleUpperBound":
            res.wall_time = oracle_time
        elif retained[name]:
            res.retained_fraction = float(np.mean(retained[name]))
    return [results[a] for a in config.algorithms]


def _simulate(config: ExperimentConfig, mode: Mode, jobs: int,
              domains: Optional[Sequence[SourceDomain]]) -> list[RunResult]:
    domains = list(domains) if domains is not None else load_domains(config)
    subjects = _check(config, domains, mode)
    tasks = [(s, r) for s in subjects for r in range(config.runs_per_subject)]
    log.info("%s simulation: %d subject/run pairs, jobs=%d", mode.value, len(tasks), jobs)
    if jobs == 1:
        chunks = [run_one(config, domains, s, r) for s, r in tasks]
    else:
        chunks = Parallel(n_jobs=jobs)(delayed(run_one)(config, domains, s, r) for s, r in tasks)
    out = [res for chunk in chunks for res in chunk]
    out.sort(key=lambda r: (r.subject_id, r.run_index, r.algorithm))
    return out


def simulate_offline(config: ExperimentConfig, jobs: int = 1, domains=None) -> list[RunResult]:
    return _simulate(config, Mode.OFFLINE, jobs, domains)


def simulate_online(config: ExperimentConfig, jobs: int = 1, domains=None) -> list[RunResult]:
    return _simulate(config, Mode.ONLINE, jobs, domains)


def simulate(config: ExperimentConfig, jobs: int = 1, domains=None) -> list[RunResult]:
    return _simulate(config, config.mode, jobs, domains)


@dataclass(frozen=True)
class SweepRow:
    parameter: str
    value: float
    algorithm: str
    m_l: int
    mean_bca: float


def sensitivity_sweep(config: ExperimentConfig, sigmas: Sequence[float] = (),
                      lambdas: Sequence[float] = (), jobs: int = 1,
                      domains=None) -> list[SweepRow]:
    """Mean BCA per (parameter value, m_l).

    ``sigmas`` vary sigma with the lambdas fixed; ``lambdas`` vary
    lambda_P = lambda_Q with sigma fixed.  Every grid point reuses the same
    seeds, so runs differ only in the swept parameter.
    """
    grid = [("sigma", float(v)) for v in sigmas] + [("lambda", float(v)) for v in lambdas]
    if not grid:
        raise ConfigError("sensitivity sweep needs at least one grid value")
    domains = list(domains) if domains is not None else load_domains(config)
    rows = []
    for name, value in grid:
        if name == "sigma":
            params = replace(config.params, sigma=value)
        else:
            params = replace(config.params, lambda_P=value, lambda_Q=value)
        results = simulate(config.replace(params=params), jobs, domains)
        rows.extend(_mean_curves(results, name, value))
    return rows


def _mean_curves(results, name, value) -> list[SweepRow]:
    acc: dict[tuple, list] = {}
    for res in results:
        for m_l, b in res.curve:
            acc.setdefault((res.algorithm, m_l), []).append(b)
    return [SweepRow(name, value, alg, m_l, float(np.mean(v)))
            for (alg, m_l), v in sorted(acc.items())]
