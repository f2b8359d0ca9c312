"""Affine iterated function systems and certified cylinder covers."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational, Real
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import BudgetExceeded, DimensionMismatch, NotContracting, NotSimilitude, SingularSystem
from .geom import TOL_GEO, Ball, as_points

DEFAULT_BUDGET = 10_000_000

Word = Tuple[int, ...]


def _exact_cos_sin(degrees: Real) -> Tuple[float, float]:
    """cos/sin of an angle in degrees, exact for multiples of 90."""
    q, rem = divmod(Fraction(degrees), 90)
    if rem == 0:
        return [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][int(q) % 4]
    rad = math.radians(float(degrees))
    return math.cos(rad), math.sin(rad)


def rotation_matrix(angles, d: int) -> np.ndarray:
    """Rotation from angle(s) in degrees.

    d=1 accepts 0 or 180 (a reflection of the line); d=2 one angle,
    counter-clockwise; d=3 three angles about the x, y and z axes,
    composed as Rz @ Ry @ Rx.
    """
    if d == 1:
        c, _ = _exact_cos_sin(angles)
        if c not in (1.0, -1.0):
            raise ValueError("a rotation of the line must be 0 or 180 degrees")
        return np.array([[c]])
    if d == 2:
        c, s = _exact_cos_sin(angles)
        return np.array([[c, -s], [s, c]])
    ax, ay, az = angles
    cx, sx = _exact_cos_sin(ax)
    cy, sy = _exact_cos_sin(ay)
    cz, sz = _exact_cos_sin(az)
    rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]], dtype=np.float64)
    ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]], dtype=np.float64)
    rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]], dtype=np.float64)
    return rz @ ry @ rx


def operator_norm_bound(T: np.ndarray) -> float:
    """Upper bound on the spectral norm, padded by 1e-12 for rounding."""
    return float(np.sqrt(np.linalg.eigvalsh(T.T @ T).max())) + 1e-12


@dataclass(frozen=True, eq=False)
class AffineMap:
    """x -> linear @ x + translation.

    ``ratio`` is set for similitudes; ``exact_ratio`` keeps a rational
    ratio exactly when one was supplied, for threshold arithmetic.
    """

    linear: np.ndarray
    translation: np.ndarray
    contraction_ub: float
    ratio: Optional[float] = None
    exact_ratio: Optional[Fraction] = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.translation.shape[0]

    @property
    def is_similitude(self) -> bool:
        return self.ratio is not None

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        return x @ self.linear.T + self.translation

    @classmethod
    def affine(cls, matrix, translation) -> "AffineMap":
        T = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
        a = np.asarray(translation, dtype=np.float64).reshape(-1)
        if T.shape != (a.shape[0], a.shape[0]):
            raise DimensionMismatch(f"matrix shape {T.shape} does not match translation of length {a.shape[0]}")
        return cls(T, a, operator_norm_bound(T))

    @classmethod
    def similitude(cls, ratio, translation=None, rotation=None, fixed_point=None) -> "AffineMap":
        """x -> ratio * R x + a, given either the translation or the fixed point.

        ``rotation`` is an orthogonal matrix or angle(s) in degrees.
        """
        if (translation is None) == (fixed_point is None):
            raise ValueError("give exactly one of translation / fixed_point")
        if not 0 < ratio:
            raise ValueError(f"ratio must be positive, got {ratio!r}")
        ref = translation if translation is not None else fixed_point
        d = np.asarray(ref, dtype=np.float64).reshape(-1).shape[0]
        if rotation is None:
            R = np.eye(d)
        elif np.ndim(rotation) == 2:
            R = np.asarray(rotation, dtype=np.float64)
        else:
            R = rotation_matrix(rotation, d)
        if not np.allclose(R.T @ R, np.eye(d), atol=TOL_GEO):
            raise ValueError("rotation matrix is not orthogonal")
        exact = Fraction(ratio) if isinstance(ratio, Rational) else None
        rho = float(ratio)
        T = rho * R
        if fixed_point is not None:
            b = np.asarray(fixed_point, dtype=np.float64).reshape(-1)
            a = b - T @ b
        else:
            a = np.asarray(translation, dtype=np.float64).reshape(-1)
        return cls(T, a, rho, rho, exact)


@dataclass(frozen=True, eq=False)
class IFS:
    maps: Tuple[AffineMap, ...]
    name: str = ""

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise ValueError("an IFS needs at least one map")
        d = maps[0].dim
        for i, m in enumerate(maps, 1):
            if m.dim != d:
                raise DimensionMismatch(f"map {i} has dimension {m.dim}, map 1 has {d}")
            if m.contraction_ub >= 1:
                raise NotContracting(i, m.contraction_ub)
        object.__setattr__(self, "maps", maps)

    @property
    def dim(self) -> int:
        return self.maps[0].dim

    @property
    def ell(self) -> int:
        return len(self.maps)

    @property
    def is_similitude(self) -> bool:
        return all(m.is_similitude for m in self.maps)

    @property
    def rho_min(self) -> Optional[float]:
        if not self.is_similitude:
            return None
        return min(m.ratio for m in self.maps)

    @property
    def max_contraction(self) -> float:
        return max(m.contraction_ub for m in self.maps)

    def ratios(self, exact: bool = False):
        """Per-map similarity ratios (Fractions when every map has one)."""
        if not self.is_similitude:
            raise NotSimilitude("IFS contains a non-similitude map")
        if exact and all(m.exact_ratio is not None for m in self.maps):
            return [m.exact_ratio for m in self.maps]
        return [m.ratio for m in self.maps]

    def word_ratio(self, word: Word, exact: bool = False):
        rs = self.ratios(exact)
        out = Fraction(1) if exact and isinstance(rs[0], Fraction) else 1.0
        for letter in word:
            out = out * rs[letter - 1]
        return out


# -- reference systems ---------------------------------------------------

def cantor() -> IFS:
    """Middle-third Cantor set: x/3 and x/3 + 2/3."""
    third = Fraction(1, 3)
    return IFS((AffineMap.similitude(third, [0.0]), AffineMap.similitude(third, [2 / 3])), "cantor")


def sierpinski() -> IFS:
    """Right-angle Sierpinski gasket with fixed points (0,0), (1,0), (0,1)."""
    half = Fraction(1, 2)
    return IFS(tuple(AffineMap.similitude(half, fixed_point=p) for p in ([0, 0], [1, 0], [0, 1])), "sierpinski")


def unit_square() -> IFS:
    """The unit square as the attractor of four half-scale copies."""
    half = Fraction(1, 2)
    return IFS(tuple(AffineMap.similitude(half, [u, v]) for u in (0, 0.5) for v in (0, 0.5)), "square")


def homogeneous(ratio, translations, name: str = "homogeneous") -> IFS:
    return IFS(tuple(AffineMap.similitude(ratio, t) for t in translations), name)


def rotation_counterexample() -> IFS:
    """Two quarter-scale homotheties fixing (1,0), (0,1) and the map
    x -> R(x - (1,0))/4 with R the clockwise quarter turn."""
    quarter = Fraction(1, 4)
    R = np.array([[0.0, 1.0], [-1.0, 0.0]])
    phi3 = AffineMap.similitude(quarter, translation=-0.25 * (R @ np.array([1.0, 0.0])), rotation=R)
    return IFS((AffineMap.similitude(quarter, fixed_point=[1, 0]),
                AffineMap.similitude(quarter, fixed_point=[0, 1]),
                phi3), "ex73")


# -- words and fixed points ----------------------------------------------

def apply_word(ifs: IFS, word: Sequence[int], x) -> np.ndarray:
    """phi_{w1} o ... o phi_{wn} (x); the last letter acts first."""
    y = np.asarray(x, dtype=np.float64).reshape(-1)
    for letter in reversed(tuple(word)):
        if not 1 <= letter <= ifs.ell:
            raise ValueError(f"letter {letter} outside alphabet 1..{ifs.ell}")
        y = ifs.maps[letter - 1](y)
    return y


@dataclass(frozen=True)
class FixedPointSet:
    points: np.ndarray


def fixed_points(ifs: IFS) -> FixedPointSet:
    """Solve (I - T_i) b_i = a_i for every map."""
    d = ifs.dim
    out = []
    for i, m in enumerate(ifs.maps, 1):
        M = np.eye(d) - m.linear
        if np.linalg.cond(M) > 1e12:
            raise SingularSystem(f"I - T is singular for map {i}")
        b = np.linalg.solve(M, m.translation)
        if np.linalg.norm(m(b) - b) > TOL_GEO:
            raise SingularSystem(f"fixed point residual too large for map {i}")
        out.append(b)
    return FixedPointSet(np.array(out))


def root_ball(ifs: IFS, samples: int = 64) -> Ball:
    """A ball B with phi_i(B) inside B for every map.

    Centre: mean of the fixed points.  Radius: the smallest R with
    |phi_i(x0) - x0| + ub_i R <= R for all i.
    """
    for i, m in enumerate(ifs.maps, 1):
        if m.contraction_ub >= 1:
            raise NotContracting(i, m.contraction_ub)
    x0 = fixed_points(ifs).points.mean(axis=0)
    R = max(np.linalg.norm(m(x0) - x0) / (1 - m.contraction_ub) for m in ifs.maps)
    R = float(R) * (1 + 1e-12) + 1e-15
    d = ifs.dim
    dirs = np.random.default_rng(0).standard_normal((samples, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    if d == 1:
        dirs = np.array([[-1.0], [1.0]])
    boundary = x0 + R * dirs
    for m in ifs.maps:
        assert np.linalg.norm(m(x0) - x0) + m.contraction_ub * R <= R + TOL_GEO
        assert np.all(np.linalg.norm(m(boundary) - x0, axis=1) <= R + TOL_GEO)
    return Ball(x0, R)


# -- covers ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CylinderCover:
    """Depth-k inner/outer approximation of an attractor.

    ``inner_points`` lie on the attractor (one per cylinder, in
    lexicographic word order), the balls ``centers[i], radii[i]`` cover
    it, and ``eps`` bounds the Hausdorff distance between the two.
    """

    depth: int
    inner_points: np.ndarray
    centers: np.ndarray
    radii: np.ndarray
    eps: float
    root: Optional[Ball] = None
    pruned: int = 0

    @property
    def dim(self) -> int:
        return self.inner_points.shape[1]

    @property
    def outer_balls(self):
        return [Ball(c, float(r)) for c, r in zip(self.centers, self.radii)]

    def __len__(self):
        return len(self.inner_points)


def cover_from_points(points, eps: float) -> CylinderCover:
    """Wrap a sample known to lie on a set E with d_H(sample, E) <= eps."""
    pts = as_points(points)
    return CylinderCover(0, pts, pts.copy(), np.full(len(pts), float(eps)), float(eps))


def _images(ifs: IFS, pts: np.ndarray, workers: int) -> np.ndarray:
    """Concatenate phi_1(pts), ..., phi_l(pts): lexicographic order of the
    extended words, first letter slowest."""
    def one(m):
        return pts @ m.linear.T + m.translation
    if workers > 1 and len(pts) * ifs.ell > 4096:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, ifs.maps))
    else:
        parts = [one(m) for m in ifs.maps]
    return np.concatenate(parts)


def expand_cover(ifs: IFS, depth: int, budget: int = DEFAULT_BUDGET, dedup: bool = False,
                 workers: int = 1) -> CylinderCover:
    """Enumerate the ell**depth cylinders of the attractor.

    The anchor is the fixed point of the first map, so inner points are
    attractor points.  Cylinder images of the root ball form the outer
    cover.  Output ordering and bits do not depend on ``workers``.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    count = ifs.ell ** depth
    if count > budget:
        raise BudgetExceeded(count, budget)
    root = root_ball(ifs)
    anchor = fixed_points(ifs).points[0]
    pts = anchor.reshape(1, -1)
    ctr = root.center.reshape(1, -1)
    scale = np.ones(1)
    ubs = np.array([m.contraction_ub for m in ifs.maps])
    for _ in range(depth):
        pts = _images(ifs, pts, workers)
        ctr = _images(ifs, ctr, workers)
        scale = np.concatenate([u * scale for u in ubs])
    radii = scale * root.radius
    eps = ifs.max_contraction ** depth * 2 * root.radius
    pruned = 0
    if dedup:
        key = np.round(pts / TOL_GEO).astype(np.int64)
        _, first = np.unique(key, axis=0, return_index=True)
        first.sort()
        pruned = len(pts) - len(first)
        pts = pts[first]
    return CylinderCover(depth, pts, ctr, radii, float(eps), root, pruned)
