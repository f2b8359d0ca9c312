import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial import ConvexHull

from fracsum.errors import EpsOutOfRange, PreconditionViolated
from fracsum.geom import (TOL_GEO, chebyshev_center, check_ball_sum_cover, check_distance_bound,
                          check_lemma_sum_absorption, check_perturbation_lemma, contains_point,
                          contains_points, convex_hull, diameter, distance_to_polytope,
                          polytope_hausdorff)

seeds = st.integers(0, 2 ** 31 - 1)


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(4, 60), st.sampled_from([2, 3]))
def test_hull_matches_scipy(seed, n, d):
    pts = np.random.default_rng(seed).normal(size=(n, d))
    ours = convex_hull(pts)
    ref = ConvexHull(pts)
    assert sorted(map(tuple, ours.vertices)) == sorted(map(tuple, pts[ref.vertices]))
    assert ours.volume() == pytest.approx(ref.volume, rel=1e-9)


def test_hull_drops_collinear_and_coplanar_points():
    sq = convex_hull([[0, 0], [0.5, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5]])
    assert len(sq.vertices) == 4
    cube = np.array([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)], float)
    faces = np.array([[0.5, 0.5, 0], [0.5, 0.5, 1], [0, 0.5, 0.5], [0.3, 0, 0.2]])
    h = convex_hull(np.vstack([cube, faces]))
    assert len(h.vertices) == 8 and len(h.normals) == 6
    assert h.volume() == pytest.approx(1.0)


def test_degenerate_hulls():
    seg = convex_hull([[0, 0], [1, 1], [0.5, 0.5]])
    assert seg.degenerate and seg.rank == 1
    assert contains_point(seg, [0.25, 0.25]) and not contains_point(seg, [0.25, 0.3])
    assert chebyshev_center(seg).radius == 0.0
    pt = convex_hull([[2.0, 3.0, 4.0]])
    assert pt.rank == 0 and contains_point(pt, [2, 3, 4])
    flat = convex_hull([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]])
    assert flat.degenerate and flat.rank == 2
    assert contains_point(flat, [0.5, 0.5, 0]) and not contains_point(flat, [0.5, 0.5, 1e-6])


def test_chebyshev_known_values():
    tri = chebyshev_center(convex_hull([[0, 0], [1, 0], [0, 1]]))
    assert tri.radius == pytest.approx(1 - 1 / math.sqrt(2))
    assert tri.center == pytest.approx([tri.radius, tri.radius])
    sq = chebyshev_center(convex_hull([[0, 0], [1, 0], [1, 1], [0, 1]]))
    assert sq.radius == pytest.approx(0.5) and sq.center == pytest.approx([0.5, 0.5])
    cube = chebyshev_center(convex_hull([[x, y, z] for x in (0, 2) for y in (0, 2) for z in (0, 2)]))
    assert cube.radius == pytest.approx(1.0)
    seg = chebyshev_center(convex_hull([[0.0], [4.0]]))
    assert seg.radius == pytest.approx(2.0) and seg.center == pytest.approx([2.0])


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from([2, 3]))
def test_chebyshev_ball_is_inscribed(seed, d):
    rng = np.random.default_rng(seed)
    p = convex_hull(rng.normal(size=(d + 5, d)))
    ball = chebyshev_center(p)
    slack = p.offsets - p.normals @ ball.center
    assert slack.min() == pytest.approx(ball.radius, abs=1e-9)
    # no facet-feasible point is deeper (scipy LP oracle)
    from scipy.optimize import linprog
    A = np.hstack([p.normals, np.ones((len(p.normals), 1))])
    res = linprog(np.r_[np.zeros(d), -1.0], A_ub=A, b_ub=p.offsets, bounds=[(None, None)] * (d + 1))
    assert -res.fun == pytest.approx(ball.radius, rel=1e-7, abs=1e-9)


def test_distance_and_hausdorff():
    sq = convex_hull([[0, 0], [1, 0], [1, 1], [0, 1]])
    d = distance_to_polytope(sq, [[0.5, 0.5], [2, 0.5], [2, 2]])
    assert d == pytest.approx([0, 1, math.sqrt(2)])
    big = sq.affine_image(2.0)
    assert polytope_hausdorff(sq, big) == pytest.approx(math.sqrt(2))
    cube = convex_hull([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)])
    assert distance_to_polytope(cube, [[0.5, 0.5, 3.0]])[0] == pytest.approx(2.0)
    assert diameter([[0, 0], [3, 4], [1, 1]]) == pytest.approx(5.0)


def test_affine_image_membership():
    tri = convex_hull([[0, 0], [1, 0], [0, 1]])
    img = tri.affine_image(7.0, [1.0, -1.0])
    assert contains_point(img, [1 + 3.5, -1 + 3.5])
    assert not contains_point(img, [1 + 3.6, -1 + 3.5])
    xs = np.array([[0.2, 0.2], [1.0, 1.0], [0.0, 0.0]])
    assert contains_points(tri, xs).tolist() == [True, False, True]


def test_sum_absorption_hypothesis_and_failure():
    A = [[0.0], [1.0]]
    assert check_lemma_sum_absorption(A, 0.5, seed=1)
    with pytest.raises(EpsOutOfRange):
        check_lemma_sum_absorption(A, 2.0)
    # with eps = 2 the union conv(A) + eps*A = [0,1] u [2,3] misses (1, 2)
    assert not check_lemma_sum_absorption(A, 2.0, strict=False, seed=1)


def test_lemma_preconditions_raise():
    with pytest.raises(PreconditionViolated):
        check_distance_bound([[0.5, 0.0]], R=1.0)
    A = [[0, 0], [1, 0], [0, 1]]
    with pytest.raises(PreconditionViolated):
        check_perturbation_lemma(A, A, [0.2, 0.2], r=0.1, delta=0.2)
    with pytest.raises(PreconditionViolated):
        check_perturbation_lemma(A, [[5, 5]], [0.25, 0.25], r=0.2, delta=0.1)
    with pytest.raises(PreconditionViolated):
        check_ball_sum_cover(A, [0.25, 0.25], r=0.2, R=1.0)


def test_distance_bound_on_chord_midpoint():
    pts = [[2.0, 0.0], [0.0, 2.0]]
    assert check_distance_bound(pts, 2.0, seed=3)
    # the chord midpoint is the worst point; the bound R - diam^2/(2R) is 0 here
    assert np.linalg.norm([1.0, 1.0]) >= 2.0 - diameter(pts) ** 2 / 4.0 - TOL_GEO
