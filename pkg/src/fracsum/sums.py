"""Sum theorems as executable checks.

* the rotation-free identity n-fold E = n conv(F), with its greedy
  word-family expansion and a raster verification;
* a certified proof that (1/2, 0) is not in the n-fold sum of the
  rotated counterexample;
* a small-n probe of the ball hierarchy behind the thick-sum theorem.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .errors import (BudgetExceeded, CertificateFailed, InvalidC, InvariantViolated,
                     NotSimilitude, PreconditionViolated, ThresholdNotMet)
from .geom import TOL_GEO, Polytope, contains_point, convex_hull, diameter, polytope_hausdorff
from .grid import (DEFAULT_MEMORY_CAP, Mode, Raster, contains_raster, count_outside, hausdorff_distance,
                   minkowski_sum, n_fold_sum, rasterize_inner, rasterize_outer, rasterize_polytope)
from .ifs import DEFAULT_BUDGET, IFS, CylinderCover, expand_cover, fixed_points, rotation_counterexample
from .thickness import PackingWitness, witness_from_local

Word = Tuple[int, ...]


# -- threshold and word families ---------------------------------------------

def theorem71_threshold(ifs: IFS) -> int:
    """Smallest integer n >= 1 + ell / rho_min."""
    if not ifs.is_similitude:
        raise NotSimilitude(f"{ifs.name}: threshold needs similitudes")
    exact = ifs.ratios(exact=True)
    if all(isinstance(q, Fraction) for q in exact):
        return math.ceil(1 + Fraction(ifs.ell) / min(exact))
    value = 1 + ifs.ell / ifs.rho_min
    near = round(value)
    # float ratios such as 0.1 land a hair off an integer; snap before ceil
    return near if abs(value - near) <= 1e-9 * max(1.0, value) else math.ceil(value)


@dataclass(frozen=True)
class WordFamilyTuple:
    families: Tuple[Tuple[Word, ...], ...]
    step: int
    ratio_stats: Tuple[float, float]
    history: Tuple[Tuple[float, float], ...] = ()

    @property
    def total_words(self) -> int:
        return sum(len(f) for f in self.families)


def expand_word_families(ifs: IFS, n: int, steps: int, force: bool = False) -> WordFamilyTuple:
    """Greedy expansion: split the word of largest ratio into its ell children.

    Ties go to the lexicographically smallest word, then the smallest
    family index.  The comparability invariant
    min ratio >= rho_min * max ratio is asserted after every step.
    """
    if not ifs.is_similitude:
        raise NotSimilitude(f"{ifs.name}: word ratios need similitudes")
    if steps < 0:
        raise ValueError("steps must be non-negative")
    threshold = theorem71_threshold(ifs)
    if n < threshold and not force:
        raise ThresholdNotMet(n, threshold)
    ratios = ifs.ratios(exact=True)
    if not all(isinstance(q, Fraction) for q in ratios):
        ratios = ifs.ratios()
    rho_min = min(ratios)
    one = ratios[0] / ratios[0]
    families: List[List[Word]] = [[()] for _ in range(n)]
    ratio_of = {(): one}
    heap = [(-one, (), j) for j in range(n)]
    heapq.heapify(heap)
    # multiset of live ratios, for the min side of the invariant
    live = {one: n}
    history = []

    def check(step):
        lo, hi = min(live), max(live)
        slack = 0 if isinstance(hi, Fraction) else 1e-12 * float(hi)
        if lo < rho_min * hi - slack:
            raise InvariantViolated(f"step {step}: min ratio {lo} < rho_min * max ratio {rho_min * hi}")
        history.append((float(lo), float(hi)))

    check(0)
    for step in range(1, steps + 1):
        neg, word, j = heapq.heappop(heap)
        families[j].remove(word)
        rho = -neg
        live[rho] -= 1
        if not live[rho]:
            del live[rho]
        for i, q in enumerate(ratios, 1):
            child = word + (i,)
            child_rho = ratio_of.setdefault(child, rho * q)
            families[j].append(child)
            heapq.heappush(heap, (-child_rho, child, j))
            live[child_rho] = live.get(child_rho, 0) + 1
        check(step)
    return WordFamilyTuple(tuple(tuple(f) for f in families), steps, history[-1], tuple(history))


# -- raster verification of the identity ---------------------------------------

@dataclass(frozen=True)
class SumIdentityReport:
    n: int
    depth: int
    delta: float
    d_H_measured: float
    tolerance: float
    verdict: str
    informational: bool
    contained: bool
    threshold: int
    eps: float
    tolerance_terms: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"

    @property
    def label(self) -> str:
        return f"INFORMATIONAL {self.verdict}" if self.informational else self.verdict


def verify_theorem71(ifs: IFS, n: int, depth: int, delta: float, force: bool = False,
                     workers: int = 1, budget: int = DEFAULT_BUDGET,
                     memory_cap: int = DEFAULT_MEMORY_CAP) -> SumIdentityReport:
    """Measure d_H(n-fold sum of the depth-k inner raster, n conv(F)).

    PASS iff the distance is at most n*eps + n*delta*sqrt(d) + delta*sqrt(d):
    the n-fold sum of P_k lies within n*eps of the n-fold sum of E, each
    summand moves by at most half a cell diagonal when rasterized, and
    the INNER raster of n conv(F) is within half a diagonal of the body.
    Containment of the sum in the OUTER raster of n conv(F) is checked
    separately and holds whenever E lies in conv(F).
    """
    threshold = theorem71_threshold(ifs)
    informational = n < threshold
    if informational and not force:
        raise ThresholdNotMet(n, threshold)
    if n < 1:
        raise ValueError("n must be at least 1")
    d = ifs.dim
    cover = expand_cover(ifs, depth, budget=budget, workers=workers)
    hull = convex_hull(fixed_points(ifs).points)
    lo, hi = hull.vertices.min(axis=0), hull.vertices.max(axis=0)
    base = rasterize_inner(cover.inner_points, delta, (lo, hi))
    total = n_fold_sum(base, n, workers=workers, memory_cap=memory_cap)
    target = hull.affine_image(n)
    frame = (total.origin, total.origin + delta * (np.array(total.dims) - 1))
    inner_target = rasterize_polytope(target, delta, frame, Mode.INNER)
    outer_target = rasterize_polytope(target, delta, frame, Mode.OUTER, margin=total.slack)
    d_h = hausdorff_distance(total, inner_target)
    diag = delta * math.sqrt(d)
    terms = {"n_eps": n * cover.eps, "n_delta_diag": n * diag, "cell_diag": diag}
    tolerance = sum(terms.values())
    return SumIdentityReport(
        n=n, depth=depth, delta=delta, d_H_measured=d_h, tolerance=tolerance,
        verdict="PASS" if d_h <= tolerance else "FAIL", informational=informational,
        contained=contains_raster(outer_target, total), threshold=threshold, eps=cover.eps,
        tolerance_terms=terms,
        counts={"inner_points": len(cover), "base_cells": base.count(), "sum_cells": total.count(),
                "target_cells": inner_target.count()},
    )


# -- rotated counterexample ---------------------------------------------------

def invariant_region_violation(ifs: IFS, p: Polytope) -> float:
    """Largest facet excess of any image vertex phi_i(v) over p."""
    worst = 0.0
    for m in ifs.maps:
        img = m(p.vertices)
        worst = max(worst, float(np.max(img @ p.normals.T - p.offsets)))
        if p.degenerate:
            rel = img - p.span_origin
            worst = max(worst, float(np.linalg.norm(rel - rel @ p.span_basis @ p.span_basis.T, axis=1).max()))
    return worst


def verify_invariant_region(ifs: IFS, p: Polytope) -> bool:
    """True iff phi_i(p) lies in p for every map, checked on vertices."""
    return all(contains_point(p, v) for m in ifs.maps for v in m(p.vertices))


def _exact_half_planes(vertices) -> List[Tuple[Fraction, Fraction, Fraction]]:
    """(a, b, c) with a*x + b*y <= c for each edge of a ccw convex polygon."""
    out = []
    for k in range(len(vertices)):
        (x0, y0), (x1, y1) = vertices[k], vertices[(k + 1) % len(vertices)]
        a, b = y1 - y0, x0 - x1
        out.append((a, b, a * x0 + b * y0))
    return out


def _exact_region_excess(ifs: IFS, vertices) -> Fraction:
    """Largest exact excess a*x + b*y - c of an image vertex over a polygon edge.

    Map entries and vertices are converted to rationals without rounding,
    so zero means the inclusion holds exactly for the maps as stored.
    """
    planes = _exact_half_planes(vertices)
    worst = Fraction(0)
    for m in ifs.maps:
        T = [[Fraction(float(v)) for v in row] for row in m.linear]
        t = [Fraction(float(v)) for v in m.translation]
        for x, y in vertices:
            ix = T[0][0] * x + T[0][1] * y + t[0]
            iy = T[1][0] * x + T[1][1] * y + t[1]
            for a, b, c in planes:
                worst = max(worst, a * ix + b * iy - c)
    return worst


@dataclass(frozen=True)
class CertificateStep:
    name: str
    margin: float
    detail: dict = field(default_factory=dict)


@dataclass(frozen=True)
class NonMembershipCertificate:
    point: Tuple[float, float]
    n: int
    depth: int
    steps: Tuple[CertificateStep, ...]
    eta: float
    eta_prime: float

    @property
    def valid(self) -> bool:
        return len(self.steps) == 4 and all(s.margin > 0 for s in self.steps)


EX73_TRIANGLE = ((Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))


def axis_slice_eta(cover: CylinderCover, pad: float = 1e-12) -> Tuple[float, int]:
    """Smallest eta' with every outer ball meeting the strip |y| <= eps
    projecting into [-eta', eta'] or [3/4 - eta', 1 + eta'].

    Each ball picks the cheaper component.  Returns eta' and the number
    of balls in the strip.
    """
    cy = cover.centers[:, 1]
    r = cover.radii + pad
    hit = np.abs(cy) <= r + cover.eps
    a = cover.centers[hit, 0] - r[hit]
    b = cover.centers[hit, 0] + r[hit]
    to_zero = np.maximum(-a, b)
    to_one = np.maximum(0.75 - a, b - 1.0)
    need = np.minimum(to_zero, to_one)
    return max(0.0, float(need.max()) if len(need) else 0.0), int(hit.sum())


def certify_nonmembership_ex73(n: int, depth: int, ifs: Optional[IFS] = None,
                               budget: int = DEFAULT_BUDGET, workers: int = 1) -> NonMembershipCertificate:
    """Certify that (1/2, 0) is not in the n-fold sum of the rotated system.

    Steps: (1) the maps send the triangle T into itself, so E lies in T;
    (2) T lies in the half-plane y >= 0, so a sum on the x-axis only uses
    points of E on the x-axis; (3) the depth-k outer cover puts those
    points in [-eta', eta'] and [3/4 - eta', 1 + eta']; (4) no sum of n
    such numbers equals 1/2 once n*eta' < 1/4.
    Steps 1 and 2 are checked in exact rational arithmetic; their margin
    is TOL_GEO minus the exact excess.
    """
    if n < 2:
        raise PreconditionViolated("n >= 2", f"n={n}")
    ifs = rotation_counterexample() if ifs is None else ifs
    steps: List[CertificateStep] = []

    def record(step: CertificateStep):
        steps.append(step)
        if not step.margin > 0:
            raise CertificateFailed(step.name, step.margin, tuple(steps))

    excess = _exact_region_excess(ifs, EX73_TRIANGLE)
    record(CertificateStep("invariant-region", TOL_GEO - float(excess),
                           {"exact_excess": str(excess), "region": "conv{(0,0),(1,0),(0,1)}"}))
    low = min(v[1] for v in EX73_TRIANGLE)
    record(CertificateStep("half-plane", TOL_GEO - float(max(Fraction(0), -low)),
                           {"min_y": str(low)}))
    cover = expand_cover(ifs, depth, budget=budget, workers=workers)
    eta_p, hits = axis_slice_eta(cover)
    record(CertificateStep("axis-slice", 0.75 - 2 * eta_p,
                           {"eta": cover.eps, "eta_prime": eta_p, "balls_on_axis": hits,
                            "components": [[-eta_p, eta_p], [0.75 - eta_p, 1 + eta_p]]}))
    zero_only = 0.5 - n * eta_p
    with_big = 0.75 - n * eta_p - 0.5
    record(CertificateStep("sumset-exclusion", min(zero_only, with_big),
                           {"zero_terms_gap": zero_only, "big_term_gap": with_big, "n": n}))
    return NonMembershipCertificate((0.5, 0.0), n, depth, tuple(steps), cover.eps, eta_p)


def ex73_hull_gap(depth: int, ifs: Optional[IFS] = None) -> Tuple[float, float]:
    """d_H(conv(P_k), T) and the bound 2 * 4**-k * diam(T)."""
    ifs = rotation_counterexample() if ifs is None else ifs
    cover = expand_cover(ifs, depth)
    tri = convex_hull([[float(x), float(y)] for x, y in EX73_TRIANGLE])
    gap = polytope_hausdorff(convex_hull(cover.inner_points), tri)
    return gap, 2 * 4.0 ** -depth * diameter(tri.vertices)


# -- ball hierarchy probe -------------------------------------------------------

@dataclass(frozen=True)
class HierarchyProbeReport:
    n: int
    c: float
    r0: float
    rho: float
    delta: float
    radius_1: float
    radius_2: float
    level1_centers: int
    level2_centers: int
    verdict: str
    cells: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"


class _WitnessSource:
    def __init__(self, cover: CylinderCover, c: float, budget: int):
        self.cover = cover
        self.tree = cKDTree(cover.inner_points)
        self.c = c
        self.budget = budget
        self.used = 0

    def witness(self, x, r) -> PackingWitness:
        self.used += 1
        if self.used > self.budget:
            raise BudgetExceeded(self.used, self.budget)
        local = self.cover.inner_points[self.tree.query_ball_point(x, r + TOL_GEO)]
        return witness_from_local(local, x, r, self.c, self.cover.eps)


def _hierarchy(cover: CylinderCover, c: float, r0: float, budget: int):
    """Inscribed centres z_j (level 1) and z_J (level 2) for one set."""
    rho = c / 4
    src = _WitnessSource(cover, c, budget)
    pts = cover.inner_points
    x_root = pts[np.lexsort(pts.T[::-1])[0]]
    top = src.witness(x_root, r0 / 2)
    z1, z2 = [], []
    for xj in top.selected:
        w1 = src.witness(xj, rho * r0 / 2)
        z1.append(w1.inscribed.center)
        for xjm in w1.selected:
            z2.append(src.witness(xjm, rho ** 2 * r0 / 2).inscribed.center)
    return np.array(z1), np.array(z2)


def _ball_union_raster(centers: np.ndarray, radius: float, delta: float, mode: Mode) -> Raster:
    """Raster of a union of equal balls on the lattice delta * Z^d.

    INNER sets cells whose centre lies in a ball; OUTER sets every cell
    whose box can meet one.
    """
    d = centers.shape[1]
    half_diag = delta * math.sqrt(d) / 2
    pad = radius + 2 * delta
    lo = np.floor((centers.min(axis=0) - pad) / delta) * delta
    hi = np.ceil((centers.max(axis=0) + pad) / delta) * delta
    # rasterize_outer tests |cell - centre| <= radius + half_diag
    shrink = half_diag if mode is Mode.INNER else 0.0
    r = rasterize_outer((centers, np.full(len(centers), radius - shrink)), delta, (lo, hi))
    slack = 0.0 if mode is Mode.INNER else r.slack
    return Raster(r.origin, r.cell, r.dims, r.words, mode, slack)


def theorem12_smallcase(sets: Sequence[CylinderCover], c: float, n: Optional[int] = None,
                        depth_budget: int = 100_000, delta: Optional[float] = None,
                        workers: int = 1, memory_cap: int = DEFAULT_MEMORY_CAP) -> HierarchyProbeReport:
    """One refinement step of the thick-sum ball hierarchy, checked on a grid.

    With r0 the least diameter and rho = c/4, packing witnesses give
    level-1 centres z_j at scale rho*r0/2 and level-2 centres z_J at scale
    rho**2*r0/2.  H1 sums the unions of B(z_j, rho*c*r0/16) over the sets,
    H2 those of B(z_J, rho**2*c*r0/16).  PASS means the INNER raster of
    H1 sits inside the OUTER raster of H2: a necessary condition for
    H2 >= H1 at resolution delta (default half the level-1 radius), not
    a proof of it.  ``depth_budget`` caps the witness extractions per set.
    """
    sets = list(sets)
    if n is None:
        n = len(sets)
    if len(sets) == 1 and n > 1:
        sets = sets * n
    if len(sets) != n or n < 2:
        raise PreconditionViolated("n >= 2 sets", f"got {len(sets)} sets for n={n}")
    if not 0 < c <= 1:
        raise InvalidC(f"c must lie in (0, 1], got {c!r}")
    r0 = min(diameter(s.inner_points) for s in sets)
    rho = c / 4
    radius_1 = rho * c * r0 / 16
    radius_2 = rho ** 2 * c * r0 / 16
    delta = radius_1 / 2 if delta is None else delta
    cache = {}
    h1, h2 = [], []
    for s in sets:
        if id(s) not in cache:
            z1, z2 = _hierarchy(s, c, r0, depth_budget)
            cache[id(s)] = (z1, z2, _ball_union_raster(z1, radius_1, delta, Mode.INNER),
                            _ball_union_raster(z2, radius_2, delta, Mode.OUTER))
        h1.append(cache[id(s)][2])
        h2.append(cache[id(s)][3])
    sum1, sum2 = h1[0], h2[0]
    for a, b in zip(h1[1:], h2[1:]):
        sum1 = minkowski_sum(sum1, a, workers, memory_cap)
        sum2 = minkowski_sum(sum2, b, workers, memory_cap)
    missing = count_outside(sum2, sum1)
    first = cache[id(sets[0])]
    return HierarchyProbeReport(
        n=n, c=c, r0=r0, rho=rho, delta=delta, radius_1=radius_1, radius_2=radius_2,
        level1_centers=len(first[0]), level2_centers=len(first[1]),
        verdict="PASS" if missing == 0 else "FAIL",
        cells={"H1": sum1.count(), "H2": sum2.count(), "missing": missing},
    )
