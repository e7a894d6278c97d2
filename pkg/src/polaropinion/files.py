"""CSV / JSON readers and writers for run outputs.

Floats are written with ``repr``, the shortest decimal that parses back to
the same double, so every file round-trips bit for bit.
"""

import csv
import json
from pathlib import Path

import numpy as np


def _fmt(x):
    return repr(float(x))


def write_table(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def write_positions(path, positions):
    z = np.asarray(positions, dtype=np.float64)
    header = [f"z{d}" for d in range(z.shape[1])]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in z.tolist():
            fh.write(",".join(map(repr, row)) + "\n")


def read_positions(path):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: no positions")
    return np.array(rows, dtype=np.float64).reshape(len(rows), len(header))


def write_loss(path, trace):
    write_table(path, ["epoch", "loss"], ((i, float(v)) for i, v in enumerate(trace)))


def read_loss(path):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        return np.array([float(row[1]) for row in reader if row])


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
