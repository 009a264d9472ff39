import itertools
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tlbs.enhancements.hull import contains, convex_hull, monotone_chain, roi_hull
from tlbs.scenario import Grid, generate_random

GRID = Grid()


def brute_force_vertices(points):
    """Extreme points via all-pairs half-plane checks: (p, q) is a hull edge when
    every other point lies strictly left of p->q or strictly inside the segment."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return set(pts)
    verts = set()
    for p, q in itertools.permutations(pts, 2):
        ok = True
        for r in pts:
            if r in (p, q):
                continue
            cr = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
            if cr > 0:
                continue
            if cr == 0:
                dot = (r[0] - p[0]) * (q[0] - p[0]) + (r[1] - p[1]) * (q[1] - p[1])
                if 0 < dot < (q[0] - p[0]) ** 2 + (q[1] - p[1]) ** 2:
                    continue
            ok = False
            break
        if ok:
            verts |= {p, q}
    if not verts:  # all collinear: endpoints of the longest span
        return {pts[0], pts[-1]}
    return verts


def test_triangle():
    h = convex_hull([(0, 0), (4, 0), (0, 3)])
    assert set(h.vertices) == {(0, 0), (4, 0), (0, 3)}


def test_square_with_center():
    h = convex_hull([(0, 0), (2, 0), (2, 2), (0, 2), (1, 1)])
    assert set(h.vertices) == {(0, 0), (2, 0), (2, 2), (0, 2)}
    assert contains(h.vertices, np.array([[1.0, 1.0]]))[0]
    assert not contains(h.vertices, np.array([[3.0, 1.0]]))[0]


def test_degenerate_hulls():
    assert monotone_chain([(1, 1), (1, 1)]) == [(1.0, 1.0)]
    seg = convex_hull([(500, 500), (2500, 500), (1500, 500)], GRID)
    assert set(seg.vertices) == {(500.0, 500.0), (2500.0, 500.0)}
    assert seg.members == {(0, 0), (0, 1), (0, 2)}
    pt = convex_hull([(500, 1500)], GRID)
    assert pt.members == {(1, 0)}
    with pytest.raises(ValueError):
        convex_hull([])


coords = st.lists(st.tuples(st.integers(0, 12), st.integers(0, 12)), min_size=1, max_size=25)


@given(coords)
def test_matches_brute_force(points):
    assert set(monotone_chain(points)) == {(float(x), float(y)) for x, y in brute_force_vertices(points)}


@given(coords)
def test_convex_and_positively_oriented(points):
    v = monotone_chain(points)
    if len(v) < 3:
        return
    for a, b, c in zip(v, v[1:] + v[:1], v[2:] + v[:2]):
        assert (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) > 0


@given(coords, st.randoms(use_true_random=False))
def test_permutation_invariant(points, rnd):
    shuffled = list(points)
    rnd.shuffle(shuffled)
    assert monotone_chain(points) == monotone_chain(shuffled)


@pytest.mark.parametrize("seed", range(20))
def test_roi_hull_members(seed):
    sc = generate_random(seed)
    h = roi_hull(sc)
    assert set(sc.rois) <= h.members
    # against a scalar point-in-polygon check on every cell center
    v = h.vertices
    for i in range(GRID.num_cells):
        x, y = GRID.centers[i]
        inside = all((b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]) >= -1e-6
                     for a, b in zip(v, v[1:] + v[:1]))
        assert inside == (GRID.cell(i) in h)


def test_random_ten_rois_against_brute_force():
    rng = random.Random(3)
    for _ in range(10):
        pts = [GRID.center(GRID.cell(i)) for i in rng.sample(range(400), 10)]
        assert set(monotone_chain(pts)) == brute_force_vertices(pts)
