"""Run orchestration: single simulations, accuracy sweeps, timing, datasets."""

import dataclasses
import logging
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, files
from .analysis import (
    attractor_mse,
    default_bounds,
    default_merge_radius,
    extract_attractor,
    grid_histogram,
    verify_block_structure,
)
from .dynamics import RunConfig, run
from .geometry import convex_hull, points_in_hull
from .init import InitSpec, generate
from .model import Ensemble

log = logging.getLogger(__name__)

DATASET_PROTOCOL = (
    "uniform ball init (N agents, D=2); deterministic solver S=N, p, dt, epochs as recorded; "
    "input = flattened initial positions, label = flattened final positions"
)


def simulate(cfg, out_dir=None):
    """Run one configured simulation and write its output directory.

    Files: positions.csv, loss.csv, attractor.json, meta.json.
    """
    out = Path(out_dir or cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    init = generate(cfg.init)
    start = time.perf_counter()
    final, trace, records = run(cfg.run, init)
    wall = time.perf_counter() - start

    radius = cfg.output.merge_radius or default_merge_radius(init)
    summary = extract_attractor(final, radius)
    holds, t_star = verify_block_structure(records, summary) if records else (True, 0)

    files.write_positions(out / "positions.csv", final.positions)
    files.write_loss(out / "loss.csv", trace)
    files.write_json(out / "attractor.json", summary.to_dict())
    meta = {
        "version": __version__,
        "config": cfg.to_sections(),
        "wall_time_s": wall,
        "epochs_run": len(trace) - 1,
        "final_time": final.time,
        "merge_radius": radius,
        "initial_hull_size": int(len(convex_hull(init.positions))),
        "block_structure": {"holds": holds, "t_star": int(t_star)},
    }
    if cfg.output.histogram_grid and final.dim == 2:
        hist = grid_histogram(final, cfg.output.histogram_grid, default_bounds(init))
        files.write_table(out / "histogram.csv", ["i", "j", "count"], _nonzero_cells(hist.counts))
        meta["histogram"] = {
            "grid_size": hist.grid_size,
            "bounds": [b.tolist() for b in hist.bounds],
        }
    files.write_json(out / "meta.json", meta)
    return {"final": final, "trace": trace, "summary": summary, "meta": meta, "dir": out}


def _nonzero_cells(counts):
    i, j = np.nonzero(counts)
    return zip(i.tolist(), j.tolist(), counts[i, j].tolist())


def _sweep_cell(args):
    init_spec, base, dt, seed, sample_sizes = args
    spec = dataclasses.replace(init_spec, seed=seed)
    init = generate(spec)
    n = spec.n_agents
    truth_cfg = dataclasses.replace(base, dt=dt, seed=seed, sample_size=n, stop_at_convergence=False)
    truth, _, _ = run(truth_cfg, init, keep_records=False)
    rows = []
    for s in sample_sizes:
        cfg = dataclasses.replace(truth_cfg, sample_size=s)
        approx, _, _ = run(cfg, init, keep_records=False)
        mse = attractor_mse(approx, truth)
        log.info("N=%d dt=%g S=%d seed=%d mse=%.6g", n, dt, s, seed, mse)
        rows.append((n, dt, s, seed, mse))
    return rows


def sweep_accuracy(init_spec, base, sample_sizes, dts, seeds, workers=1):
    """Index-matched MSE of stochastic runs against the S=N run, per (dt, S, seed).

    Each seed fixes both the initial ensemble and the solver stream. Returns
    (rows, medians) with rows (N, dt, S, seed, mse) and medians keyed by (dt, S).
    """
    if any(s > init_spec.n_agents for s in sample_sizes):
        raise ValueError("every sample size must be <= n_agents")
    cells = [(init_spec, base, dt, seed, list(sample_sizes)) for dt in dts for seed in seeds]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_sweep_cell, cells))
    else:
        results = [_sweep_cell(c) for c in cells]
    rows = [r for cell in results for r in cell]
    medians = {}
    for dt in dts:
        for s in sample_sizes:
            vals = [r[4] for r in rows if r[1] == dt and r[2] == s]
            medians[(dt, s)] = statistics.median(vals)
    return rows, medians


def write_sweep(out_dir, n, rows, medians, sample_sizes, dts):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files.write_table(out / "sweep.csv", ["n_agents", "dt", "sample_size", "seed", "mse"], rows)
    table = [[n, dt] + [medians[(dt, s)] for s in sample_sizes] for dt in dts]
    files.write_table(out / "table.csv", ["n_agents", "dt"] + [f"S={s}" for s in sample_sizes], table)


def bench(init_spec, base, sample_sizes, n_values, epochs=150):
    """Wall seconds for ``epochs`` stochastic epochs per (S, N)."""
    # compile the kernels outside the timed region
    warm = dataclasses.replace(init_spec, n_agents=8)
    run(dataclasses.replace(base, n_agents=8, sample_size=2, epochs=1), generate(warm))
    rows = []
    for n in n_values:
        init = generate(dataclasses.replace(init_spec, n_agents=n))
        for s in sample_sizes:
            cfg = dataclasses.replace(
                base, n_agents=n, sample_size=min(s, n), epochs=epochs, stop_at_convergence=False
            )
            start = time.perf_counter()
            run(cfg, init, keep_records=False)
            wall = time.perf_counter() - start
            log.info("S=%d N=%d epochs=%d wall=%.2fs", s, n, epochs, wall)
            rows.append((s, n, wall))
    return rows


def pair_seed(seed, index):
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


def make_pair(spec, index):
    """(input, label) vectors of length n_agents * 2, agent-major."""
    init = generate(
        InitSpec(kind="ball", n_agents=spec.n_agents, dim=2, radius=spec.radius, seed=pair_seed(spec.seed, index))
    )
    cfg = RunConfig(n_agents=spec.n_agents, dim=2, p=spec.p, dt=spec.dt, epochs=spec.epochs)
    final, _, _ = run(cfg, init, keep_records=False)
    return init, final


def _pair_job(args):
    spec, index = args
    init, final = make_pair(spec, index)
    return init.positions, final.positions


def make_dataset(spec, out_dir, workers=1):
    """Write train.csv / test.csv (+ meta.json, optional histograms.npz)."""
    if spec.count < 1:
        raise ValueError("count must be >= 1")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(spec, i) for i in range(spec.count)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            pairs = list(pool.map(_pair_job, jobs))
    else:
        pairs = [_pair_job(j) for j in jobs]

    n_test = int(round(spec.count * spec.split))
    n_train = spec.count - n_test
    width = spec.n_agents * 2
    header = [f"x{i}" for i in range(width)] + [f"y{i}" for i in range(width)]
    splits = {"train": range(0, n_train), "test": range(n_train, spec.count)}
    for name, idx in splits.items():
        files.write_table(
            out / f"{name}.csv",
            header,
            (list(map(float, pairs[i][0].ravel())) + list(map(float, pairs[i][1].ravel())) for i in idx),
        )

    box = (np.full(2, -1.05 * spec.radius), np.full(2, 1.05 * spec.radius))
    meta = {
        "version": __version__,
        "protocol": DATASET_PROTOCOL,
        "flatten_order": "agent-major: [z0_x, z0_y, z1_x, z1_y, ...]",
        "dataset": dataclasses.asdict(spec),
        "n_train": n_train,
        "n_test": n_test,
        "pair_seeds": [pair_seed(spec.seed, i) for i in range(spec.count)],
        "radius": spec.radius,
        "grid_sizes": list(spec.grid_sizes),
        "histogram_bounds": [box[0].tolist(), box[1].tolist()],
    }
    if spec.histograms:
        arrays = {}
        for g in spec.grid_sizes:
            for part, which in (("input", 0), ("label", 1)):
                arrays[f"{part}_{g}"] = np.stack(
                    [grid_histogram(Ensemble(pr[which]), g, box).counts for pr in pairs]
                )
        np.savez_compressed(out / "histograms.npz", **arrays)
        meta["histograms_file"] = "histograms.npz"
    files.write_json(out / "meta.json", meta)
    return pairs


def label_in_hull(inp, label, tol=1e-9):
    z0 = np.asarray(inp, dtype=np.float64).reshape(-1, 2)
    z1 = np.asarray(label, dtype=np.float64).reshape(-1, 2)
    return bool(np.all(points_in_hull(z1, z0, convex_hull(z0), tol)))
