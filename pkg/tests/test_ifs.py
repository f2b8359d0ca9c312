from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracsum.errors import BudgetExceeded, DimensionMismatch, NotContracting, NotSimilitude
from fracsum.geom import contains_point, convex_hull
from fracsum.ifs import (IFS, AffineMap, apply_word, cantor, expand_cover, fixed_points, homogeneous,
                         root_ball, rotation_counterexample, rotation_matrix, sierpinski, unit_square)


def test_quarter_turns_are_exact():
    assert rotation_matrix(-90, 2).tolist() == [[0.0, 1.0], [-1.0, 0.0]]
    assert rotation_matrix(Fraction(180), 2).tolist() == [[-1.0, -0.0], [0.0, -1.0]]
    assert rotation_matrix(180, 1).tolist() == [[-1.0]]
    R = rotation_matrix([90, 0, 0], 3)
    assert set(np.unique(R)) <= {-1.0, 0.0, 1.0}
    with pytest.raises(ValueError):
        rotation_matrix(45, 1)


def test_fixed_points_of_reference_systems():
    assert fixed_points(sierpinski()).points.tolist() == [[0, 0], [1, 0], [0, 1]]
    assert fixed_points(cantor()).points.ravel() == pytest.approx([0, 1])
    ex = fixed_points(rotation_counterexample()).points
    assert ex == pytest.approx(np.array([[1, 0], [0, 1], [1 / 17, 4 / 17]]))


def test_validation_errors():
    with pytest.raises(NotContracting):
        IFS((AffineMap.affine([[1.2]], [0.0]),))
    with pytest.raises(DimensionMismatch):
        IFS((AffineMap.similitude(0.5, [0.0]), AffineMap.similitude(0.5, [0.0, 0.0])))
    shear = IFS((AffineMap.affine([[0.5, 0.2], [0.0, 0.5]], [0, 0]),))
    with pytest.raises(NotSimilitude):
        shear.ratios()
    assert cantor().ratios(exact=True) == [Fraction(1, 3)] * 2


def test_apply_word_order():
    ifs = cantor()
    # phi_2(phi_1(x)): last letter first
    assert apply_word(ifs, (2, 1), [1.0])[0] == pytest.approx(2 / 3 + 1 / 9)
    assert ifs.word_ratio((1, 2, 2), exact=True) == Fraction(1, 27)


@pytest.mark.parametrize("make", [cantor, sierpinski, rotation_counterexample, unit_square])
def test_root_ball_is_invariant(make):
    ifs = make()
    ball = root_ball(ifs)
    for m in ifs.maps:
        # phi(B(c, R)) = B(phi(c), rho R) for similitudes
        assert np.linalg.norm(m(ball.center) - ball.center) + m.contraction_ub * ball.radius <= ball.radius * (1 + 1e-9)


def test_cover_counts_order_and_anchor():
    cov = expand_cover(cantor(), 1)
    assert cov.inner_points.ravel() == pytest.approx([0, 2 / 3])
    sier = expand_cover(sierpinski(), 2)
    assert len(sier) == 9
    # first letter slowest: the first three points share the outer map 1
    assert np.all(sier.inner_points[:3] <= 0.5 + 1e-12)
    with pytest.raises(BudgetExceeded):
        expand_cover(sierpinski(), 8, budget=1000)


@pytest.mark.parametrize("make,k", [(cantor, 5), (sierpinski, 4), (rotation_counterexample, 3)])
def test_cover_brackets_deeper_levels(make, k):
    """Deeper inner points stay in the outer balls and within eps of P_k."""
    ifs = make()
    cov = expand_cover(ifs, k)
    deep = expand_cover(ifs, k + 3).inner_points
    dist = np.linalg.norm(deep[:, None, :] - cov.centers[None, :, :], axis=2)
    assert np.all((dist <= cov.radii[None, :] + 1e-12).any(axis=1))
    to_inner = np.linalg.norm(deep[:, None, :] - cov.inner_points[None, :, :], axis=2).min(axis=1)
    assert to_inner.max() <= cov.eps


def test_attractor_inside_fixed_point_hull():
    for ifs in (sierpinski(), rotation_counterexample()):
        hull = convex_hull(fixed_points(ifs).points)
        pts = expand_cover(ifs, 5).inner_points
        if ifs.name == "ex73":
            hull = convex_hull([[0, 0], [1, 0], [0, 1]])
        assert all(contains_point(hull, p) for p in pts)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 3))
def test_workers_do_not_change_cover(seed, d):
    rng = np.random.default_rng(seed)
    maps = tuple(AffineMap.similitude(Fraction(1, 3), rng.uniform(-1, 1, d)) for _ in range(3))
    ifs = IFS(maps)
    a, b = expand_cover(ifs, 5, workers=1), expand_cover(ifs, 5, workers=3)
    assert np.array_equal(a.inner_points, b.inner_points) and np.array_equal(a.radii, b.radii)


def test_homogeneous_system():
    sq = homogeneous(Fraction(1, 2), [[0, 0], [0.5, 0], [0, 0.5], [0.5, 0.5]])
    assert sq.ell == 4 and sq.rho_min == 0.5
