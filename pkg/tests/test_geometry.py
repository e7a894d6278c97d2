import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import unit_square
from polaropinion.geometry import convex_hull, diameter, point_in_hull, points_in_hull


def monotone_chain(pts):
    """Independent 2-d oracle: Andrew's monotone chain, strict turns only."""
    order = sorted(range(len(pts)), key=lambda i: (pts[i][0], pts[i][1], i))

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def half(seq):
        out = []
        for i in seq:
            while len(out) >= 2 and cross(pts[out[-2]], pts[out[-1]], pts[i]) <= 0:
                out.pop()
            out.append(i)
        return out

    lower = half(order)
    upper = half(order[::-1])
    verts = {tuple(pts[i]) for i in lower + upper}
    # smallest index per distinct coordinate
    return sorted(min(i for i in range(len(pts)) if tuple(pts[i]) == v) for v in verts)


def test_square_with_center():
    pts = np.vstack([unit_square(), [[0.5, 0.5]]])
    assert convex_hull(pts).tolist() == [0, 1, 2, 3]


def test_single_point():
    assert convex_hull([[3.0, 4.0]]).tolist() == [0]


def test_one_dimensional_extremes():
    assert convex_hull([2.0, -1.0, 5.0, 5.0, -1.0, 0.0]).tolist() == [1, 2]
    assert convex_hull([[7.0], [7.0], [7.0]]).tolist() == [0]


def test_collinear_points_give_endpoints():
    pts = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [1.5, 1.5]])
    assert convex_hull(pts).tolist() == [0, 3]


def test_duplicates_keep_smallest_index():
    pts = np.array([[1.0, 1.0], [0.0, 0.0], [2.0, 0.0], [0.0, 0.0], [1.0, 2.0], [2.0, 0.0]])
    assert convex_hull(pts).tolist() == [1, 2, 4]


def test_edge_midpoints_excluded():
    pts = np.vstack([unit_square(), [[0.5, 0.0], [1.0, 0.5], [0.0, 0.25]]])
    assert convex_hull(pts).tolist() == [0, 1, 2, 3]


def test_coplanar_points_in_3d():
    rng = np.random.default_rng(3)
    flat = np.c_[rng.uniform(size=(30, 2)), np.full(30, 2.0)]
    h = convex_hull(flat)
    assert h.tolist() == monotone_chain(flat[:, :2].tolist())


def test_cube_vertices_3d():
    corners = np.array([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)], dtype=float)
    rng = np.random.default_rng(1)
    inner = rng.uniform(0.1, 0.9, size=(50, 3))
    assert convex_hull(np.vstack([inner, corners])).tolist() == list(range(50, 58))


def test_high_dimension_returns_unique_superset():
    rng = np.random.default_rng(2)
    pts = rng.normal(size=(40, 5))
    pts[10] = pts[3]
    h = convex_hull(pts)
    assert 10 not in h and 3 in h and len(h) == 39


def test_errors():
    with pytest.raises(ValueError):
        convex_hull([[0.0, 1.0], [np.nan, 0.0]])
    with pytest.raises(ValueError):
        convex_hull([[0.0, 1.0], [1.0, 2.0, 3.0]])
    with pytest.raises(ValueError):
        point_in_hull([0.0, 0.0, 0.0], unit_square(), [0, 1, 2, 3])


@pytest.mark.parametrize("seed", range(20))
def test_matches_monotone_chain(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 80))
    # integer grid produces plenty of duplicates and collinear triples
    pts = rng.integers(0, 6, size=(n, 2)).astype(float)
    assert convex_hull(pts).tolist() == monotone_chain(pts.tolist())


def test_disc_containment_brute_force():
    rng = np.random.default_rng(7)
    r = np.sqrt(rng.uniform(size=100))
    a = rng.uniform(0, 2 * np.pi, size=100)
    pts = np.c_[r * np.cos(a), r * np.sin(a)]
    h = convex_hull(pts)
    assert all(point_in_hull(p, pts, h, 1e-9) for p in pts)
    # every non-vertex is strictly inside: it is not extreme in any sampled direction
    dirs = rng.normal(size=(500, 2))
    best = np.argmax(pts @ dirs.T, axis=0)
    assert set(best.tolist()) <= set(h.tolist())


def test_point_in_hull_examples():
    sq = unit_square()
    assert point_in_hull([0.5, 0.5], sq, [0, 1, 2, 3], 0.0)
    assert not point_in_hull([2.0, 0.0], sq, [0, 1, 2, 3], 0.0)
    assert point_in_hull([1 + 1e-12, 0.5], sq, [0, 1, 2, 3], 1e-9)
    assert not point_in_hull([1 + 1e-6, 0.5], sq, [0, 1, 2, 3], 1e-9)
    # corner region: Euclidean distance, not per-edge violation
    assert not point_in_hull([1 + 8e-10, 1 + 8e-10], sq, [0, 1, 2, 3], 1e-9)
    assert point_in_hull([1.0, 1.0], sq, [0, 1, 2, 3], 0.0)


def test_point_in_degenerate_hulls():
    seg = np.array([[0.0, 0.0], [2.0, 2.0]])
    assert point_in_hull([1.0, 1.0], seg, [0, 1], 1e-12)
    assert not point_in_hull([1.0, 1.1], seg, [0, 1], 1e-9)
    assert point_in_hull([5.0], np.array([[5.0]]), [0], 0.0)
    tri3 = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
    assert point_in_hull([0.2, 0.2, 1.0], tri3, [0, 1, 2], 1e-12)
    assert not point_in_hull([0.2, 0.2, 1.1], tri3, [0, 1, 2], 1e-9)


def test_point_in_3d_hull():
    corners = np.array([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)], dtype=float)
    h = convex_hull(corners)
    assert point_in_hull([0.5, 0.5, 0.5], corners, h, 0.0)
    assert not point_in_hull([0.5, 0.5, 1.01], corners, h, 1e-9)


@pytest.mark.parametrize("dim", [2, 3])
def test_idempotence_and_containment(dim):
    rng = np.random.default_rng(dim)
    pts = rng.normal(size=(300, dim))
    h = convex_hull(pts)
    assert convex_hull(pts[h]).tolist() == list(range(len(h)))
    assert np.all(points_in_hull(pts, pts, h, 1e-9))


def test_diameter():
    assert diameter(unit_square()) == pytest.approx(np.sqrt(2))
    assert diameter([[1.0, 1.0], [1.0, 1.0]]) == 0.0


coords = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 40), st.just(2)), elements=coords), st.randoms())
def test_permutation_covariance(pts, rnd):
    perm = list(range(len(pts)))
    rnd.shuffle(perm)
    perm = np.array(perm)
    a = {tuple(v) for v in pts[convex_hull(pts)]}
    b = {tuple(v) for v in pts[perm][convex_hull(pts[perm])]}
    assert a == b


@settings(max_examples=60, deadline=None)
@given(
    arrays(np.float64, st.tuples(st.integers(1, 40), st.sampled_from([1, 2, 3])), elements=coords),
    st.integers(0, 2**32 - 1),
)
def test_maximizer_completeness(pts, seed):
    h = convex_hull(pts)
    dirs = np.random.default_rng(seed).normal(size=(20, pts.shape[1]))
    full = (pts @ dirs.T).max(axis=0)
    restricted = (pts[h] @ dirs.T).max(axis=0)
    np.testing.assert_allclose(restricted, full, rtol=1e-12, atol=1e-12 * np.abs(full).max())
