"""Post-processing of runs: attractor clusters, histograms, error metrics."""

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .geometry import as_points, diameter


@dataclass(frozen=True)
class AttractorSummary:
    """Concentration points of an ensemble and the agent partition over them.

    Clusters are ordered by descending size, ties by smallest member index.
    """

    centers: np.ndarray
    assignment: np.ndarray
    counts: np.ndarray
    merge_radius: float

    @property
    def n_infinity(self):
        return len(self.counts)

    def to_dict(self):
        return {
            "centers": self.centers.tolist(),
            "counts": self.counts.tolist(),
            "assignment": self.assignment.tolist(),
            "merge_radius": self.merge_radius,
            "n_infinity": self.n_infinity,
        }


@dataclass(frozen=True)
class GridHistogram:
    grid_size: int
    bounds: tuple
    counts: np.ndarray


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _sets_touch(a, b, radius):
    if len(a) * len(b) <= 250_000:
        d2 = np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=-1)
        return bool(d2.min() <= radius * radius)
    small, big = (a, b) if len(a) < len(b) else (b, a)
    dist, _ = cKDTree(big).query(small, k=1, distance_upper_bound=radius * (1 + 1e-12))
    return bool(np.any(dist <= radius))


def single_linkage_labels(points, radius):
    """Connected components of the graph joining points at distance <= radius.

    Points are bucketed into cubes of side radius/sqrt(D), so each cube is a
    clique and only nearby cubes need pairwise checks.
    """
    pts = as_points(points)
    n, dim = pts.shape
    side = radius / np.sqrt(dim)
    keys = np.floor((pts - pts.min(axis=0)) / side).astype(np.int64)
    cells, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    order = np.argsort(inverse, kind="stable")
    bounds = np.searchsorted(inverse[order], np.arange(len(cells) + 1))
    members = [order[bounds[c] : bounds[c + 1]] for c in range(len(cells))]
    lookup = {tuple(key): c for c, key in enumerate(cells.tolist())}

    reach = int(np.ceil(radius / side))
    offsets = [
        o
        for o in itertools.product(range(-reach, reach + 1), repeat=dim)
        if o > (0,) * dim
    ]
    uf = _UnionFind(len(cells))
    for c, key in enumerate(cells.tolist()):
        for off in offsets:
            nb = lookup.get(tuple(k + o for k, o in zip(key, off)))
            if nb is None or uf.find(c) == uf.find(nb):
                continue
            if _sets_touch(pts[members[c]], pts[members[nb]], radius):
                uf.union(c, nb)
    roots = np.array([uf.find(c) for c in range(len(cells))])
    return roots[inverse]


def extract_attractor(e, merge_radius):
    """Cluster the agents of ``e`` by single linkage at ``merge_radius``."""
    if not merge_radius > 0:
        raise ValueError("merge_radius must be positive")
    pts = e.positions
    raw = single_linkage_labels(pts, merge_radius)
    _, first, label, counts = np.unique(raw, return_index=True, return_inverse=True, return_counts=True)
    label = label.ravel()
    # sort clusters: largest first, then by smallest member index
    rank = np.lexsort((first, -counts))
    relabel = np.empty_like(rank)
    relabel[rank] = np.arange(len(rank))
    assignment = relabel[label]
    counts = counts[rank]
    centers = np.zeros((len(counts), pts.shape[1]))
    np.add.at(centers, assignment, pts)
    centers /= counts[:, None]
    return AttractorSummary(centers, assignment, counts, float(merge_radius))


def default_merge_radius(initial):
    """1e-3 of the initial diameter."""
    d = diameter(initial.positions)
    return 1e-3 * d if d > 0 else 1e-12


def attractor_mse(predicted, ground_truth):
    """Mean over agents of the squared distance between matched positions."""
    a = predicted.positions if hasattr(predicted, "positions") else as_points(predicted)
    b = ground_truth.positions if hasattr(ground_truth, "positions") else as_points(ground_truth)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.mean(np.sum((a - b) ** 2, axis=1)))


def default_bounds(e, margin=0.05):
    """Bounding box of ``e`` padded by ``margin`` of its extent on every side."""
    lo = e.positions.min(axis=0)
    hi = e.positions.max(axis=0)
    extent = hi - lo
    pad = np.where(extent > 0, margin * extent, 0.5)
    return (lo - pad, hi + pad)


def grid_histogram(e, grid_size=64, bounds=None):
    """Agent counts on a grid_size x grid_size grid over ``bounds``.

    Bins are half-open [lo, hi) except the last one on each axis, which also
    takes the upper edge. Agents outside the box are clamped to edge bins.
    counts[i, j] holds bin i along x and bin j along y.
    """
    if e.dim != 2:
        raise ValueError(f"grid_histogram needs 2-d positions, got D={e.dim}")
    if grid_size < 1:
        raise ValueError("grid_size must be positive")
    lo, hi = default_bounds(e) if bounds is None else bounds
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    if np.any(hi <= lo):
        raise ValueError("bounds must have positive extent")
    idx = np.floor((e.positions - lo) / (hi - lo) * grid_size).astype(np.int64)
    idx = np.clip(idx, 0, grid_size - 1)
    counts = np.zeros((grid_size, grid_size), dtype=np.int64)
    np.add.at(counts, (idx[:, 0], idx[:, 1]), 1)
    return GridHistogram(grid_size, (lo, hi), counts)


def verify_block_structure(records, summary):
    """Earliest epoch after which every friend edge stays inside one cluster.

    Returns (True, t*) when the last recorded epochs from t* on only contain
    intra-cluster edges, else (False, number of recorded epochs).
    """
    if not records:
        raise ValueError("need at least one communication record")
    assign = np.asarray(summary.assignment)
    intra = [bool(np.all(assign == assign[np.asarray(r.friends)])) for r in records]
    if not intra[-1]:
        return False, records[-1].epoch + 1
    start = len(intra) - 1
    while start > 0 and intra[start - 1]:
        start -= 1
    return True, records[start].epoch


def block_permutation(summary):
    """Agent order that groups clusters, turning C(G) into block-diagonal form."""
    return np.argsort(summary.assignment, kind="stable")
