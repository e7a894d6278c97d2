"""Convex hull vertices and hull containment for agent point sets.

Hulls are exact for D <= 3 (Qhull, with an explicit fallback for affinely
degenerate inputs). For D > 3 ``convex_hull`` returns one representative per
distinct point, which is a superset of the extreme points and therefore still
safe for the friend search.
"""

import numpy as np
from scipy.spatial import ConvexHull, QhullError

DEFAULT_TOL = 1e-9
MAX_EXACT_DIM = 3


def as_points(points):
    """Validate and return an (N, D) float64 array. 1-d input is read as D=1."""
    try:
        pts = np.asarray(points, dtype=np.float64)
    except ValueError as exc:
        # ragged input, i.e. vectors of different dimension
        raise ValueError(f"inconsistent point dimensions: {exc}") from None
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
        raise ValueError(f"expected an (N, D) array with N, D >= 1, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("point coordinates must be finite")
    return pts


def _affine_frame(pts):
    """Origin, orthonormal basis (D, r) and rank of the affine span of pts."""
    origin = pts[0]
    centered = pts - origin
    scale = np.abs(centered).max()
    if scale == 0.0:
        return origin, np.zeros((pts.shape[1], 0)), 0
    _, s, vt = np.linalg.svd(centered / scale, full_matrices=False)
    rank = int(np.sum(s > s[0] * max(pts.shape) * np.finfo(float).eps * 16))
    return origin, vt[:rank].T, rank


def _extreme_indices(pts):
    """Indices (into pts) of extreme points; duplicates may appear as any copy."""
    n, dim = pts.shape
    if n == 1:
        return np.array([0])
    if dim == 1:
        return np.unique([np.argmin(pts[:, 0]), np.argmax(pts[:, 0])])
    try:
        hull = ConvexHull(pts)
    except QhullError:
        # lower-dimensional input: recurse inside the affine span
        origin, basis, rank = _affine_frame(pts)
        if rank == 0:
            return np.array([0])
        return _extreme_indices((pts - origin) @ basis)
    verts = hull.vertices
    if dim == 2:
        verts = _drop_collinear(pts, verts)
    return verts


def _drop_collinear(pts, cycle):
    # Qhull reports 2-d vertices in cyclic order; remove exact straight angles
    if len(cycle) < 3:
        return cycle
    a = pts[np.roll(cycle, 1)]
    b = pts[cycle]
    c = pts[np.roll(cycle, -1)]
    cross = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    return cycle[cross != 0.0]


def _smallest_duplicates(pts, idx):
    """Replace every index by the smallest index holding the same coordinates."""
    verts = pts[idx]
    maybe = np.flatnonzero(np.isin(pts[:, 0], verts[:, 0]))
    first = {}
    for j in maybe:
        first.setdefault(pts[j].tobytes(), j)
    return np.unique([first[v.tobytes()] for v in verts])


def convex_hull(points):
    """Sorted indices of the extreme points of ``points``.

    Among coincident points only the smallest index is reported. Points that
    sit on a hull edge or facet without being a vertex are excluded.
    """
    pts = as_points(points)
    if pts.shape[1] > MAX_EXACT_DIM:
        _, first = np.unique(pts, axis=0, return_index=True)
        return np.sort(first)
    return _smallest_duplicates(pts, _extreme_indices(pts))


def diameter(z):
    """Largest pairwise distance, evaluated over hull vertices."""
    z = as_points(z)
    v = z[convex_hull(z)]
    if len(v) < 2:
        return 0.0
    d2 = np.sum((v[:, None, :] - v[None, :, :]) ** 2, axis=-1)
    return float(np.sqrt(d2.max()))


def _segment_distance(q, a, b):
    ab = b - a
    denom = ab @ ab
    t = np.clip(((q - a) @ ab) / denom, 0.0, 1.0) if denom > 0 else np.zeros(len(q))
    return np.linalg.norm(q - (a + t[:, None] * ab), axis=1)


def _polygon_distance(q, verts):
    """Euclidean distance from each row of q to the convex polygon ``verts``."""
    if len(verts) == 1:
        return np.linalg.norm(q - verts[0], axis=1)
    if len(verts) == 2:
        return _segment_distance(q, verts[0], verts[1])
    cyc = verts[ConvexHull(verts).vertices]
    a = cyc
    b = np.roll(cyc, -1, axis=0)
    # signed area of (a, b, q) per edge; counter-clockwise cycle => inside iff all >= 0
    cross = (b[:, 0] - a[:, 0]) * (q[:, None, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (
        q[:, None, 0] - a[:, 0]
    )
    inside = np.all(cross >= 0.0, axis=1)
    dist = np.zeros(len(q))
    out = ~inside
    if out.any():
        qo = q[out]
        dist[out] = np.min([_segment_distance(qo, a[i], b[i]) for i in range(len(a))], axis=0)
    return dist


def _excess(q, verts):
    """Distance-like exterior measure of each q w.r.t. conv(verts); 0 inside."""
    origin, basis, rank = _affine_frame(verts)
    if rank == verts.shape[1]:
        # full-dimensional: stay in the input coordinates, no rounding from a change of frame
        local, lv, off_span = q, verts, np.zeros(len(q))
    else:
        rel = q - origin
        local = rel @ basis
        off_span = np.linalg.norm(rel - local @ basis.T, axis=1)
        lv = (verts - origin) @ basis
    if rank == 0:
        inner = np.zeros(len(q))
    elif rank == 1:
        lo, hi = lv[:, 0].min(), lv[:, 0].max()
        inner = np.maximum(np.maximum(lo - local[:, 0], local[:, 0] - hi), 0.0)
    elif rank == 2:
        inner = _polygon_distance(local, lv)
    else:
        # largest facet-hyperplane violation; equals the distance except near ridges
        eq = ConvexHull(lv).equations
        inner = np.maximum((local @ eq[:, :-1].T + eq[:, -1]).max(axis=1), 0.0)
    return np.hypot(off_span, inner)


def points_in_hull(queries, points, hull, tol=DEFAULT_TOL):
    """Vectorised :func:`point_in_hull` for an (M, D) array of query points."""
    pts = as_points(points)
    q = np.asarray(queries, dtype=np.float64)
    if q.ndim == 1:
        q = q[:, None] if pts.shape[1] == 1 else q[None, :]
    if q.shape[1] != pts.shape[1]:
        raise ValueError(f"query dimension {q.shape[1]} != point dimension {pts.shape[1]}")
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    verts = pts[np.asarray(hull, dtype=np.int64)]
    if len(verts) == 0:
        raise ValueError("empty hull index")
    return _excess(q, verts) <= tol


def point_in_hull(p, points, hull, tol=DEFAULT_TOL):
    """True iff ``p`` lies within ``tol`` of the hull spanned by ``points[hull]``.

    Exact Euclidean distance for hulls of affine dimension <= 2. For
    3-dimensional and larger hulls the test uses the largest violation of a
    facet hyperplane, which can accept points slightly further than ``tol``
    beyond an edge or corner.
    """
    p = np.asarray(p, dtype=np.float64).reshape(1, -1)
    return bool(points_in_hull(p, points, hull, tol)[0])
