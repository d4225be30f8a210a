"""Command line entry point: ``warsds gen-data|simulate|sweep|report``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import yaml

from .exceptions import WarError
from .features import synth_generate
from .harness.config import config_from_dict, dump_config
from .harness.io import format_report, write_dataset, write_results, write_sweep
from .harness.simulate import sensitivity_sweep, simulate

log = logging.getLogger("warsds")


def _load(args) -> dict:
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise WarError(f"{args.config}: top level must be a mapping")
    if getattr(args, "mode", None):
        data["mode"] = args.mode
    if args.seed is not None:
        # one seed drives both the generated data and the run protocol
        data["seed"] = args.seed
        data["synth"] = {**(data.get("synth") or {}), "seed": args.seed}
    if getattr(args, "out", None):
        data["output_dir"] = args.out
    return data


def cmd_gen_data(args) -> int:
    config = config_from_dict(_load(args))
    paths = write_dataset(synth_generate(config.synth), config.output_dir)
    print(f"wrote {len(paths)} domains to {config.output_dir}")
    return 0


def cmd_simulate(args) -> int:
    config = config_from_dict(_load(args))
    results = simulate(config, jobs=args.jobs)
    out = Path(config.output_dir)
    paths = write_results(results, out)
    dump_config(config, out / "config.yaml")
    print(f"wrote {', '.join(str(p) for p in paths.values())}")
    print(format_report(out), end="")
    return 0


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def cmd_sweep(args) -> int:
    config = config_from_dict(_load(args))
    rows = sensitivity_sweep(config, args.sigmas, args.lambdas, jobs=args.jobs)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = write_sweep(rows, out / "sweep.csv")
    dump_config(config, out / "config.yaml")
    print(f"wrote {path}")
    return 0


def cmd_report(args) -> int:
    print(format_report(args.results or args.out or "results"), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="warsds", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, mode=True, jobs=True):
        p.add_argument("--config", help="YAML experiment config")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="output directory")
        if mode:
            p.add_argument("--mode", choices=["offline", "online"])
        if jobs:
            p.add_argument("--jobs", type=int, default=1, help="parallel (subject, run) workers")

    p = sub.add_parser("gen-data", help="write a synthetic multi-domain data set")
    common(p, mode=False, jobs=False)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("simulate", help="run a calibration simulation")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="sensitivity of mean BCA to sigma and lambda")
    common(p)
    p.add_argument("--sigmas", type=_floats, default=[], help="comma-separated sigma values")
    p.add_argument("--lambdas", type=_floats, default=[],
                   help="comma-separated lambda_P = lambda_Q values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="summarize a results directory")
    p.add_argument("results", nargs="?", help="results directory")
    p.add_argument("--out", help="results directory (alias)")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (WarError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
