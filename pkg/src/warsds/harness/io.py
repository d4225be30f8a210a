"""Dataset and result files.

A dataset directory holds one ``domain_<id>.csv`` per domain.  The first
line is ``id,n,d``; each of the ``n`` following lines is a ``T``/``N`` tag
and ``d`` feature values.  Result tables are plain CSV with floats written
to 17 significant digits so they round-trip exactly.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..dataset import TARGET, ClassLabel, SourceDomain
from ..exceptions import ConfigError
from .simulate import RunResult, SweepRow

CURVE_HEADER = ["mode", "algorithm", "subject", "run", "m0", "m_l", "bca"]
SUMMARY_HEADER = ["mode", "algorithm", "subject", "run", "aupc", "retained_fraction",
                  "wall_time_s"]
MEAN_HEADER = ["mode", "algorithm", "m_l", "mean_bca", "std_bca", "count"]
SWEEP_HEADER = ["parameter", "value", "algorithm", "m_l", "mean_bca"]

REPORT_NOTE = ("TL, TLSDS, TargetOnly and OracleUpperBound use class-balanced kernel "
               "RLS members without cross-validation.")


def _f(x: float) -> str:
    return format(float(x), ".17g")


def write_dataset(domains: Sequence[SourceDomain], directory) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for dom in domains:
        path = directory / f"domain_{dom.id}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([dom.id, dom.n, dom.d])
            for label, row in zip(dom.y, dom.X):
                tag = ClassLabel.TARGET.tag if label == TARGET else ClassLabel.NON_TARGET.tag
                w.writerow([tag, *(_f(v) for v in row)])
        paths.append(path)
    return paths


def _domain_id(raw: str):
    try:
        return int(raw)
    except ValueError:
        return raw


def read_domain(path) -> SourceDomain:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or len(rows[0]) != 3:
        raise ConfigError(f"{path}: missing 'id,n,d' header")
    dom_id, n, d = _domain_id(rows[0][0]), int(rows[0][1]), int(rows[0][2])
    body = rows[1:]
    if len(body) != n:
        raise ConfigError(f"{path}: header says {n} rows, found {len(body)}")
    tags, X = [], np.empty((n, d))
    for i, row in enumerate(body):
        if len(row) != d + 1 or row[0] not in ("T", "N"):
            raise ConfigError(f"{path}: malformed row {i + 2}")
        tags.append(row[0])
        X[i] = [float(v) for v in row[1:]]
    return SourceDomain(dom_id, X, tags)


def read_dataset(directory) -> list[SourceDomain]:
    directory = Path(directory)
    paths = sorted(directory.glob("domain_*.csv"))
    if not paths:
        raise ConfigError(f"no domain_*.csv files in {directory}")
    domains = [read_domain(p) for p in paths]
    try:
        domains.sort(key=lambda d: d.id)
    except TypeError:
        domains.sort(key=lambda d: str(d.id))
    return domains


def curve_rows(results: Iterable[RunResult]) -> list[list[str]]:
    rows = []
    for r in results:
        for m_l, b in r.curve:
            rows.append([r.mode, r.algorithm, str(r.subject_id), str(r.run_index), str(r.m0),
                         str(m_l), _f(b)])
    return sorted(rows, key=_canonical)


def _canonical(row):
    mode, alg, subject, run, _, m_l, _ = row
    return (mode, alg, int(subject), int(run), int(m_l))


def summary_rows(results: Iterable[RunResult]) -> list[list[str]]:
    rows = [[r.mode, r.algorithm, str(r.subject_id), str(r.run_index), _f(r.aupc),
             _f(r.retained_fraction), _f(r.wall_time)] for r in results]
    return sorted(rows, key=lambda row: (row[0], row[1], int(row[2]), int(row[3])))


def mean_curve_rows(results: Iterable[RunResult]) -> list[list[str]]:
    acc = defaultdict(list)
    for r in results:
        for m_l, b in r.curve:
            acc[(r.mode, r.algorithm, m_l)].append(b)
    rows = []
    for (mode, alg, m_l), vals in sorted(acc.items()):
        rows.append([mode, alg, str(m_l), _f(np.mean(vals)), _f(np.std(vals)), str(len(vals))])
    return rows


def _write(path: Path, header, rows) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def write_results(results: Sequence[RunResult], directory) -> dict[str, Path]:
    """Write curves.csv, summary.csv and curves_mean.csv."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    return {
        "curves": _write(directory / "curves.csv", CURVE_HEADER, curve_rows(results)),
        "summary": _write(directory / "summary.csv", SUMMARY_HEADER, summary_rows(results)),
        "mean": _write(directory / "curves_mean.csv", MEAN_HEADER, mean_curve_rows(results)),
    }


def write_sweep(rows: Sequence[SweepRow], path) -> Path:
    body = [[r.parameter, _f(r.value), r.algorithm, str(r.m_l), _f(r.mean_bca)] for r in rows]
    return _write(Path(path), SWEEP_HEADER, body)


def read_curves(path) -> list[RunResult]:
    """Rebuild per-run curves from curves.csv (AUPC recomputed by the caller)."""
    runs: dict[tuple, RunResult] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["mode"], row["algorithm"], int(row["subject"]), int(row["run"]))
            if key not in runs:
                runs[key] = RunResult(key[0], key[1], key[2], key[3], int(row["m0"]))
            runs[key].curve.append((int(row["m_l"]), float(row["bca"])))
    for r in runs.values():
        r.curve.sort()
    return list(runs.values())


def read_summary(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [
            {**row, "subject": int(row["subject"]), "run": int(row["run"]),
             "aupc": float(row["aupc"]), "retained_fraction": float(row["retained_fraction"]),
             "wall_time_s": float(row["wall_time_s"])}
            for row in csv.DictReader(fh)
        ]


def format_report(results_dir) -> str:
    """Plain-text table of mean AUPC, retained fraction and m_l=0 BCA per algorithm."""
    results_dir = Path(results_dir)
    summary = read_summary(results_dir / "summary.csv")
    curves = read_curves(results_dir / "curves.csv")
    if not summary:
        raise ConfigError(f"{results_dir}: summary.csv is empty")
    by_alg = defaultdict(list)
    for row in summary:
        by_alg[(row["mode"], row["algorithm"])].append(row)
    first = defaultdict(list)
    for r in curves:
        if r.curve:
            first[(r.mode, r.algorithm)].append(r.curve[0][1])
    lines = [f"# {REPORT_NOTE}",
             f"{'mode':<8} {'algorithm':<17} {'runs':>5} {'AUPC':>7} {'sd':>7} "
             f"{'BCA@0':>7} {'retained':>8} {'time_s':>8}"]
    for key in sorted(by_alg):
        rows = by_alg[key]
        aupcs = np.array([r["aupc"] for r in rows])
        lines.append(
            f"{key[0]:<8} {key[1]:<17} {len(rows):>5} {aupcs.mean():>7.4f} {aupcs.std():>7.4f} "
            f"{np.mean(first[key]) if first[key] else float('nan'):>7.4f} "
            f"{np.mean([r['retained_fraction'] for r in rows]):>8.3f} "
            f"{np.mean([r['wall_time_s'] for r in rows]):>8.2f}")
    return "\n".join(lines) + "\n"
