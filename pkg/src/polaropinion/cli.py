"""Command line entry point: ``polaropinion <subcommand> ...``."""

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import config as config_mod
from . import experiments, files
from .geometry import convex_hull

log = logging.getLogger("polaropinion")


def _load(path, seed):
    """Read an INI config, or the meta.json of an earlier run."""
    if str(path).endswith(".json"):
        sections = files.read_json(path)["config"]
        return config_mod.from_sections(sections, seed=seed)
    return config_mod.load(path, seed=seed)


def cmd_simulate(args):
    cfg = _load(args.config, args.seed)
    result = experiments.simulate(cfg, args.out)
    meta = result["meta"]
    log.info(
        "wrote %s: %d epochs, N_inf=%d, %.1fs",
        result["dir"],
        meta["epochs_run"],
        result["summary"].n_infinity,
        meta["wall_time_s"],
    )


def cmd_sweep(args):
    cfg = _load(args.config, args.seed)
    sw = cfg.sweep
    seeds = [args.seed] if args.seed is not None else sw.seeds
    rows, medians = experiments.sweep_accuracy(
        cfg.init, cfg.run, sw.sample_sizes, sw.dts, seeds, workers=args.threads
    )
    out = Path(args.out or cfg.output.dir)
    experiments.write_sweep(out, cfg.init.n_agents, rows, medians, sw.sample_sizes, sw.dts)
    for dt in sw.dts:
        log.info("dt=%g: %s", dt, " ".join(f"{medians[(dt, s)]:.4g}" for s in sw.sample_sizes))


def cmd_bench(args):
    cfg = _load(args.config, args.seed)
    b = cfg.bench
    rows = experiments.bench(cfg.init, cfg.run, b.sample_sizes, b.n_agents, b.epochs)
    out = Path(args.out or cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    files.write_table(out / "bench.csv", ["sample_size", "n_agents", "wall_seconds"], rows)


def cmd_dataset(args):
    cfg = _load(args.config, None)
    spec = cfg.dataset
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    experiments.make_dataset(spec, args.out or cfg.output.dir, workers=args.threads)


def cmd_hull(args):
    pts = files.read_positions(args.positions)
    idx = convex_hull(pts)
    json.dump({"n_points": len(pts), "vertices": np.asarray(idx).tolist()}, sys.stdout)
    sys.stdout.write("\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (overrides [output] dir)")
    common.add_argument("--seed", type=int, help="override init and solver seeds")
    common.add_argument("--threads", type=int, default=1, help="worker processes for sweep/dataset")
    common.add_argument("--quiet", action="store_true", help="only report errors")

    parser = argparse.ArgumentParser(prog="polaropinion", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, helptext in (
        ("simulate", cmd_simulate, "run one simulation"),
        ("sweep", cmd_sweep, "attractor accuracy vs sample size and dt"),
        ("bench", cmd_bench, "wall time per (S, N)"),
        ("dataset", cmd_dataset, "initial/attractor training pairs"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("config", help="INI config, or meta.json of a previous run")
        p.set_defaults(func=func)
    p = sub.add_parser("hull", parents=[common], help="print hull vertex indices of a positions CSV")
    p.add_argument("positions")
    p.set_defaults(func=cmd_hull)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.ERROR if args.quiet else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.seed is not None and not 0 <= args.seed < 2**64:
        log.error("--seed must be an unsigned 64-bit integer")
        return 2
    try:
        args.func(args)
    except (config_mod.ConfigError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
