"""Thickness estimates, certified lower bounds and packing witnesses.

The thickness of a compact E is the largest c in [0, 1] such that for
every x in E and 0 < r <= diam(E) the hull of E within B(x, r) contains
a ball of radius c*r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from numbers import Real

import numpy as np

from .errors import DegenerateSet, InvalidC, NotSimilitude, PreconditionViolated, WitnessFailed
from .geom import TOL_GEO, InscribedBall, chebyshev_center, convex_hull, diameter
from .ifs import IFS, CylinderCover


class BoundKind(str, Enum):
    EMPIRICAL = "EMPIRICAL"
    CERTIFIED_SELF_SIMILAR = "CERTIFIED_SELF_SIMILAR"


@dataclass(frozen=True)
class ThicknessBound:
    value: float
    kind: BoundKind
    provenance: dict = field(default_factory=dict)
    flat: bool = False


@dataclass(frozen=True, eq=False)
class PackingWitness:
    center_x: np.ndarray
    radius_r: float
    c: float
    points: np.ndarray  # padded to packing_bound rows by repeating the last selection
    n_selected: int
    packing_bound: int
    inscribed: InscribedBall

    @property
    def selected(self) -> np.ndarray:
        return self.points[:self.n_selected]


def packing_bound(c: Real, d: int) -> int:
    """Integral part of ((4 + c) / c) ** d, in exact arithmetic."""
    q = Fraction(c)
    return math.floor(((4 + q) / q) ** d)


def sum_threshold(c: Real) -> int:
    """Smallest integer n with n > 2**11 / c**3 + 1."""
    if not 0 < c <= 1:
        raise InvalidC(f"c must lie in (0, 1], got {c!r}")
    q = Fraction(c)
    return math.floor(Fraction(2 ** 11) / q ** 3 + 1) + 1


def _distinct(points: np.ndarray) -> np.ndarray:
    return np.unique(points, axis=0)


def radius_grid(diam: float, r_min: float, per_decade: int) -> np.ndarray:
    """diam, diam*q, diam*q**2, ... down to r_min with q = 10**(-1/per_decade)."""
    steps = int(math.floor(per_decade * math.log10(diam / r_min) + 1e-9))
    return diam * 10.0 ** (-np.arange(steps + 1) / per_decade)


def estimate_thickness(cover: CylinderCover, radii_per_decade: int = 8, seed: int = 0,
                       max_centers: int = 64) -> ThicknessBound:
    """Sampled estimate of the thickness from the cover's inner points.

    Centres are drawn from the inner points, radii from a geometric grid
    between diam and max(10*eps, diam/4096).  The value is an estimate:
    finite sampling over (x, r) can only overshoot the true thickness,
    while the eps-level discretization can pull it down.
    """
    pts = _distinct(cover.inner_points)
    if len(pts) < 2:
        raise DegenerateSet("all inner points coincide")
    d = pts.shape[1]
    diam = diameter(pts)
    r_min = max(10 * cover.eps, diam * 2.0 ** -12)
    radii = radius_grid(diam, r_min, radii_per_decade)[::-1]
    rng = np.random.default_rng(seed)
    if len(pts) > max_centers:
        chosen = np.sort(rng.choice(len(pts), size=max_centers, replace=False))
        centers = pts[chosen]
    else:
        centers = pts
    best = (math.inf, None, None)
    for x in centers:
        dist = np.linalg.norm(pts - x, axis=1)
        for r in radii:
            local = pts[dist <= r]
            if len(local) <= d:
                rho = 0.0
            else:
                rho = chebyshev_center(convex_hull(local)).radius
            if rho / r < best[0]:
                best = (rho / r, x.copy(), float(r))
    value = min(1.0, max(0.0, best[0]))
    prov = {
        "centers": int(len(centers)),
        "radii": radii.tolist(),
        "argmin_center": best[1].tolist(),
        "argmin_radius": best[2],
        "eps": cover.eps,
        "note": "estimate over sampled (x, r); not a certified bound",
    }
    return ThicknessBound(value, BoundKind.EMPIRICAL, prov, flat=value == 0.0)


def certified_self_similar_bound(ifs: IFS, cover: CylinderCover) -> ThicknessBound:
    """rho_min * r0 / diam_ub, a lower bound on the thickness.

    r0 is the inscribed radius of the hull of the inner points (a subset
    of E, so any ball in that hull sits in conv(E)); diam_ub bounds
    diam(E) from the outer cover.
    """
    if not ifs.is_similitude:
        raise NotSimilitude("certified bound needs similitudes with exact ratios")
    if cover.depth < 1:
        raise PreconditionViolated("cover depth >= 1", f"depth={cover.depth}")
    hull = convex_hull(cover.inner_points)
    r0 = chebyshev_center(hull).radius
    diam_ub = diameter(cover.centers) + 2 * float(cover.radii.max())
    rho_min = ifs.rho_min
    flat = r0 == 0.0 or diam_ub == 0.0
    value = 0.0 if flat else min(1.0, rho_min * r0 / diam_ub)
    prov = {"rho_min": rho_min, "r0": r0, "diam_ub": diam_ub, "depth": cover.depth, "eps": cover.eps}
    return ThicknessBound(value, BoundKind.CERTIFIED_SELF_SIMILAR, prov, flat=flat)


def _greedy_separated(points: np.ndarray, sep: float) -> list:
    """First-fit maximal subset with pairwise distances >= sep (input order)."""
    chosen = []
    buckets = {}
    d = points.shape[1]
    neigh = np.stack(np.meshgrid(*([np.arange(-1, 2)] * d), indexing="ij"), -1).reshape(-1, d)
    neigh = [tuple(int(v) for v in row) for row in neigh]
    keys = np.floor(points / sep).astype(np.int64)
    sep2 = sep * sep
    for i, (p, key) in enumerate(zip(points, keys)):
        key = tuple(key.tolist())
        ok = True
        for off in neigh:
            for j in buckets.get(tuple(a + b for a, b in zip(key, off)), ()):
                q = points[j]
                if float(((p - q) ** 2).sum()) < sep2:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            chosen.append(i)
            buckets.setdefault(key, []).append(i)
    return chosen


def witness_from_local(local: np.ndarray, x, r: float, c: float, eps: float) -> PackingWitness:
    """Packing witness from the sample points already cut to B(x, r)."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    local = _distinct(local)
    local = local[np.lexsort(local.T[::-1])]
    bound = packing_bound(c, local.shape[1])
    chosen = local[_greedy_separated(local, c * r / 2)]
    if len(chosen) > bound:
        raise WitnessFailed(f"selection of {len(chosen)} points exceeds the packing bound {bound}")
    ball = chebyshev_center(convex_hull(chosen))
    required = c * r / 2 - 2 * eps
    if ball.radius <= 0.0 or ball.radius < required:
        raise WitnessFailed("hull too thin", ball.radius, required)
    padded = np.vstack([chosen, np.repeat(chosen[-1:], bound - len(chosen), axis=0)])
    return PackingWitness(x, float(r), float(c), padded, len(chosen), bound, ball)


def extract_packing_witness(cover: CylinderCover, x, r: float, c: float) -> PackingWitness:
    """Greedy c*r/4-packing of E within B(x, r) whose hull holds B(z, c*r/2).

    The selection is a maximal c*r/2-separated subset of the inner points
    in B(x, r), taken first-fit in lexicographic order and padded to the
    packing bound by repeating its last point.  WitnessFailed means the
    selection's inscribed radius is below c*r/2 - 2*eps, i.e. c exceeds
    the thickness seen at this (x, r).
    """
    if not 0 < c <= 1:
        raise InvalidC(f"c must lie in (0, 1], got {c!r}")
    if r <= 0:
        raise PreconditionViolated("r > 0", f"r={r!r}")
    pts = cover.inner_points
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    dist = np.linalg.norm(pts - x, axis=1)
    if dist.min() > TOL_GEO:
        raise PreconditionViolated("x is an inner point of the cover")
    return witness_from_local(pts[dist <= r + TOL_GEO], x, r, c, cover.eps)
