"""Low-dimensional convex geometry (d <= 3).

Hulls are built per affine-span rank: min/max for segments, Andrew's
monotone chain for polygons and an incremental hull with horizon repair
for polyhedra.  Inscribed balls come from a dense simplex with Bland's
rule.  The ``check_*`` functions are randomized regression guards for the
elementary convexity lemmas the sum theorems rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import math

import numpy as np

from .errors import (
    DimensionMismatch,
    EpsOutOfRange,
    PreconditionViolated,
    Unbounded,
)

TOL_GEO = 1e-9
DEFAULT_SAMPLES = 256


def as_points(points, d: Optional[int] = None) -> np.ndarray:
    """Coerce ``points`` into a finite float64 array of shape (n, d)."""
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1) if d in (None, 1) else arr.reshape(1, -1)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a point list, got shape {arr.shape}")
    if d is not None and arr.shape[1] != d:
        raise DimensionMismatch(f"points have dimension {arr.shape[1]}, expected {d}")
    if arr.shape[1] not in (1, 2, 3):
        raise DimensionMismatch(f"dimension {arr.shape[1]} not supported (1, 2 or 3 only)")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite coordinate")
    return arr


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError(f"negative radius {self.radius!r}")


@dataclass(frozen=True)
class InscribedBall:
    center: np.ndarray
    radius: float


@dataclass(frozen=True, eq=False)
class Polytope:
    """V- and H-representation of a convex polytope.

    ``normals @ x <= offsets`` describes the hull inside its affine span
    ``span_origin + span_basis @ t``.  For full-dimensional hulls the span
    is all of R^d.  Polygons keep their vertices in counter-clockwise
    order (in span coordinates); polyhedra keep triangulated boundary
    faces as index triples into ``vertices``.
    """

    vertices: np.ndarray
    normals: np.ndarray
    offsets: np.ndarray
    span_origin: np.ndarray
    span_basis: np.ndarray
    triangles: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def rank(self) -> int:
        return self.span_basis.shape[1]

    @property
    def degenerate(self) -> bool:
        return self.rank < self.dim

    @property
    def facets(self):
        return list(zip(self.normals, self.offsets))

    def contains(self, x, tol: float = TOL_GEO) -> bool:
        return contains_point(self, x, tol)

    def affine_image(self, scale: float, shift=None) -> "Polytope":
        """The polytope ``scale * P + shift`` for ``scale > 0``."""
        if scale <= 0:
            raise ValueError("scale must be positive")
        shift = np.zeros(self.dim) if shift is None else np.asarray(shift, dtype=np.float64)
        return Polytope(
            vertices=self.vertices * scale + shift,
            normals=self.normals.copy(),
            offsets=self.offsets * scale + self.normals @ shift,
            span_origin=self.span_origin * scale + shift,
            span_basis=self.span_basis.copy(),
            triangles=None if self.triangles is None else self.triangles.copy(),
        )

    def volume(self) -> float:
        """Lebesgue measure in R^d (0 for degenerate hulls)."""
        if self.degenerate:
            return 0.0
        if self.dim == 1:
            return float(self.vertices.max() - self.vertices.min())
        if self.dim == 2:
            x, y = self.vertices[:, 0], self.vertices[:, 1]
            return float(abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))) / 2)
        c = self.vertices.mean(axis=0)
        tri = self.vertices[self.triangles] - c
        return float(abs(np.einsum("ij,ij->i", tri[:, 0], np.cross(tri[:, 1], tri[:, 2])).sum()) / 6)


def _affine_span(pts: np.ndarray):
    """Smallest-rank affine subspace containing ``pts`` within TOL_GEO."""
    origin = pts.mean(axis=0)
    centered = pts - origin
    d = pts.shape[1]
    if len(pts) == 1:
        return origin, np.zeros((d, 0))
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    for r in range(d + 1):
        basis = vt[:r].T
        resid = centered - (centered @ basis) @ basis.T
        if np.max(np.linalg.norm(resid, axis=1)) <= TOL_GEO:
            return origin, basis
    return origin, vt.T


def _cross2(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _interior_filter(q: np.ndarray) -> np.ndarray:
    """Indices of points not strictly inside the polygon of the 8 directional extremes."""
    keys = np.stack([q[:, 0], q[:, 1], q[:, 0] + q[:, 1], q[:, 0] - q[:, 1]], axis=1)
    ext = np.unique(np.concatenate([keys.argmin(0), keys.argmax(0)]))
    poly = q[ext][_monotone_chain(q[ext])]
    if len(poly) < 3:
        return np.arange(len(q))
    scale = float(np.abs(q).max()) + 1.0
    inside = np.ones(len(q), dtype=bool)
    for a, b in zip(poly, np.roll(poly, -1, axis=0)):
        cross = (b[0] - a[0]) * (q[:, 1] - a[1]) - (b[1] - a[1]) * (q[:, 0] - a[0])
        inside &= cross > 1e-7 * scale * np.hypot(*(b - a))
    return np.flatnonzero(~inside)


def _monotone_chain(q: np.ndarray) -> list:
    """Indices of the strictly convex ccw hull of planar points ``q``."""
    if len(q) > 64:
        keep = _interior_filter(q)
        return [int(keep[i]) for i in _monotone_chain(q[keep])] if len(keep) < len(q) else _chain(q)
    return _chain(q)


def _chain(q: np.ndarray) -> list:
    order = np.lexsort((q[:, 1], q[:, 0]))
    pts = q.tolist()

    def half(indices):
        chain = []
        for i in indices:
            p = pts[i]
            while len(chain) >= 2:
                o, a = pts[chain[-2]], pts[chain[-1]]
                seg = math.hypot(p[0] - o[0], p[1] - o[1])
                if _cross2(o, a, p) <= TOL_GEO * seg:
                    chain.pop()
                else:
                    break
            chain.append(i)
        return chain

    lower = half(order)
    upper = half(order[::-1])
    return lower[:-1] + upper[:-1]


def _initial_simplex(q: np.ndarray):
    i0 = int(np.argmin(q[:, 0]))
    i1 = int(np.argmax(np.linalg.norm(q - q[i0], axis=1)))
    u = q[i1] - q[i0]
    u /= np.linalg.norm(u)
    rel = q - q[i0]
    i2 = int(np.argmax(np.linalg.norm(rel - np.outer(rel @ u, u), axis=1)))
    nrm = np.cross(q[i1] - q[i0], q[i2] - q[i0])
    nrm /= np.linalg.norm(nrm)
    i3 = int(np.argmax(np.abs(rel @ nrm)))
    return [i0, i1, i2, i3]


def _plane(q, a, b, c):
    n = np.cross(q[b] - q[a], q[c] - q[a])
    n /= np.linalg.norm(n)
    return n, float(n @ q[a])


def _incremental_hull3(q: np.ndarray) -> np.ndarray:
    """Outward-oriented boundary triangles of the hull of full-rank ``q``."""
    simplex = _initial_simplex(q)
    inside = q[simplex].mean(axis=0)
    faces = []
    for a, b, c in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)):
        tri = [simplex[a], simplex[b], simplex[c]]
        n, off = _plane(q, *tri)
        if n @ inside > off:
            tri = [tri[0], tri[2], tri[1]]
        faces.append(tri)
    normals = []
    offsets = []
    for tri in faces:
        n, off = _plane(q, *tri)
        normals.append(n)
        offsets.append(off)
    normals = np.array(normals)
    offsets = np.array(offsets)

    # farthest points first keeps the intermediate hulls large
    order = np.argsort(-np.linalg.norm(q - inside, axis=1), kind="stable")
    in_simplex = set(simplex)
    for p in order:
        p = int(p)
        if p in in_simplex:
            continue
        visible = normals @ q[p] - offsets > TOL_GEO
        if not visible.any():
            continue
        vis_idx = np.nonzero(visible)[0]
        edges = set()
        for f in vis_idx:
            a, b, c = faces[f]
            edges.update(((a, b), (b, c), (c, a)))
        horizon = [(a, b) for (a, b) in edges if (b, a) not in edges]
        keep = ~visible
        faces = [f for f, k in zip(faces, keep) if k]
        new_n, new_o = [], []
        for a, b in horizon:
            faces.append([a, b, p])
            n, off = _plane(q, a, b, p)
            new_n.append(n)
            new_o.append(off)
        normals = np.vstack([normals[keep], np.array(new_n)])
        offsets = np.concatenate([offsets[keep], np.array(new_o)])
    return np.array(faces, dtype=np.int64)


def _merge_planes(normals: np.ndarray, offsets: np.ndarray):
    """Collapse coplanar facets (same outward plane within TOL_GEO)."""
    keep_n, keep_o = [], []
    for n, o in zip(normals, offsets):
        dup = False
        for kn, ko in zip(keep_n, keep_o):
            if np.linalg.norm(kn - n) <= 1e-7 and abs(ko - o) <= TOL_GEO:
                dup = True
                break
        if not dup:
            keep_n.append(n)
            keep_o.append(o)
    return np.array(keep_n), np.array(keep_o)


def convex_hull(points, d: Optional[int] = None) -> Polytope:
    """Convex hull of a finite point list in dimension 1, 2 or 3.

    Affinely dependent input is handled inside its affine span; the
    resulting polytope has ``degenerate`` set and facets that describe the
    hull relative to that span.
    """
    pts = as_points(points, d)
    if len(pts) == 0:
        raise ValueError("convex hull of an empty set")
    dim = pts.shape[1]
    origin, basis = _affine_span(pts)
    r = basis.shape[1]
    q = (pts - origin) @ basis
    triangles = None

    if r == 0:
        verts = pts[:1]
        normals = np.zeros((0, dim))
        offsets = np.zeros(0)
        origin = verts[0].copy()
    elif r == 1:
        t = q[:, 0]
        lo, hi = int(np.argmin(t)), int(np.argmax(t))
        verts = pts[[lo, hi]]
        u = basis[:, 0]
        normals = np.array([-u, u])
        offsets = np.array([-(u @ pts[lo]), u @ pts[hi]])
    elif r == 2:
        idx = _monotone_chain(q)
        verts = pts[idx]
        qv = q[idx]
        edge = np.roll(qv, -1, axis=0) - qv
        n2 = np.stack([edge[:, 1], -edge[:, 0]], axis=1)
        n2 /= np.linalg.norm(n2, axis=1, keepdims=True)
        normals = n2 @ basis.T
        offsets = np.einsum("ij,ij->i", normals, verts)
    else:
        tris = _incremental_hull3(q)
        normals, offsets = [], []
        for a, b, c in tris:
            n, _ = _plane(q, a, b, c)
            n = basis @ n
            normals.append(n)
            offsets.append(float(n @ pts[a]))
        normals, offsets = _merge_planes(np.array(normals), np.array(offsets))
        used = np.unique(tris)
        # a vertex is extreme iff the planes through it span R^3
        extreme = []
        for v in used:
            on = np.abs(normals @ pts[v] - offsets) <= 1e-7
            if np.linalg.matrix_rank(normals[on], tol=1e-6) == 3:
                extreme.append(v)
        remap = {int(v): k for k, v in enumerate(extreme)}
        verts = pts[extreme]
        triangles = _retriangulate(pts, tris, remap, normals, offsets)
    return Polytope(verts.copy(), np.asarray(normals, dtype=np.float64),
                    np.asarray(offsets, dtype=np.float64), origin, basis, triangles)


def _retriangulate(pts, tris, remap, normals, offsets) -> np.ndarray:
    """Fan-triangulate each merged facet over its extreme vertices only."""
    out = []
    ext = np.array(sorted(remap, key=remap.get))
    for n, o in zip(normals, offsets):
        on = ext[np.abs(pts[ext] @ n - o) <= 1e-7]
        if len(on) < 3:
            continue
        c = pts[on].mean(axis=0)
        ref = pts[on[0]] - c
        ref /= np.linalg.norm(ref)
        perp = np.cross(n, ref)
        ang = np.arctan2((pts[on] - c) @ perp, (pts[on] - c) @ ref)
        ring = on[np.argsort(ang)]
        for k in range(1, len(ring) - 1):
            out.append([remap[int(ring[0])], remap[int(ring[k])], remap[int(ring[k + 1])]])
    return np.array(out, dtype=np.int64)


def contains_points(p: Polytope, xs, tol: float = TOL_GEO) -> np.ndarray:
    """Vectorized :func:`contains_point` over a point array."""
    xs = as_points(xs, p.dim)
    ok = np.all(xs @ p.normals.T - p.offsets <= tol, axis=1)
    if p.degenerate:
        rel = xs - p.span_origin
        resid = rel - (rel @ p.span_basis) @ p.span_basis.T
        ok &= np.linalg.norm(resid, axis=1) <= tol
    return ok


def contains_point(p: Polytope, x, tol: float = TOL_GEO) -> bool:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != p.dim:
        raise DimensionMismatch(f"point has dimension {x.shape[0]}, polytope {p.dim}")
    return bool(contains_points(p, x.reshape(1, -1), tol)[0])


def facet_slack(p: Polytope, x) -> float:
    """Signed distance from ``x`` to the nearest facet (positive inside)."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if len(p.offsets) == 0:
        return 0.0
    return float(np.min(p.offsets - p.normals @ x))


def _simplex_max(A: np.ndarray, b: np.ndarray, c: np.ndarray, max_iter: int = 10_000):
    """Maximize c@x subject to A@x <= b, x >= 0, with b >= 0 (Bland's rule)."""
    m, n = A.shape
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -c
    basis = list(range(n, n + m))
    for _ in range(max_iter):
        entering = np.nonzero(T[m, :-1] < -1e-12)[0]
        if entering.size == 0:
            break
        j = int(entering[0])
        col = T[:m, j]
        pos = col > 1e-12
        if not pos.any():
            raise Unbounded("linear program is unbounded")
        ratios = np.full(m, np.inf)
        ratios[pos] = T[:m, -1][pos] / col[pos]
        best = ratios.min()
        ties = np.nonzero(ratios <= best + 1e-15)[0]
        i = int(min(ties, key=lambda t: basis[t]))
        T[i] /= T[i, j]
        for k in range(m + 1):
            if k != i and T[k, j] != 0.0:
                T[k] -= T[k, j] * T[i]
        basis[i] = j
    else:
        raise RuntimeError("simplex iteration limit reached")
    x = np.zeros(n + m)
    x[basis] = T[:m, -1]
    return x[:n], T[m, -1]


def chebyshev_center(p: Polytope) -> InscribedBall:
    """Largest ball inside a full-dimensional polytope; radius 0 otherwise."""
    if p.degenerate:
        return InscribedBall(p.vertices.mean(axis=0), 0.0)
    d = p.dim
    g = p.vertices.mean(axis=0)
    # c = g + u - v with u, v >= 0 keeps the slack basis feasible at the origin
    h = np.maximum(p.offsets - p.normals @ g, 0.0)
    A = np.hstack([p.normals, -p.normals, np.ones((len(h), 1))])
    c = np.zeros(2 * d + 1)
    c[-1] = 1.0
    try:
        x, _ = _simplex_max(A, h, c)
    except Unbounded as exc:
        raise Unbounded("inscribed-ball LP unbounded for a vertex-derived polytope") from exc
    center = g + x[:d] - x[d:2 * d]
    radius = max(0.0, min(float(x[-1]), facet_slack(p, center)))
    return InscribedBall(center, radius)


def _segment_distance(x: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distances from each row of ``x`` to the segment [a, b]."""
    ab = b - a
    den = ab @ ab
    t = np.zeros(len(x)) if den == 0 else np.clip((x - a) @ ab / den, 0.0, 1.0)
    return np.linalg.norm(x - (a + np.outer(t, ab)), axis=1)


def _triangle_distance(x: np.ndarray, a, b, c) -> np.ndarray:
    n = np.cross(b - a, c - a)
    n /= np.linalg.norm(n)
    h = (x - a) @ n
    proj = x - np.outer(h, n)
    # barycentric sign test on the projection
    inside = np.ones(len(x), dtype=bool)
    for u, v in ((a, b), (b, c), (c, a)):
        inside &= np.cross(v - u, proj - u) @ n >= -1e-15
    edge = np.minimum(_segment_distance(x, a, b),
                      np.minimum(_segment_distance(x, b, c), _segment_distance(x, c, a)))
    return np.where(inside, np.abs(h), edge)


def distance_to_polytope(p: Polytope, xs) -> np.ndarray:
    """Euclidean distance from each point to the (closed) polytope."""
    xs = as_points(xs, p.dim)
    rel = xs - p.span_origin
    along = rel @ p.span_basis
    off = np.linalg.norm(rel - along @ p.span_basis.T, axis=1)
    v = p.vertices
    if p.rank == 0:
        return np.linalg.norm(xs - v[0], axis=1)
    if p.rank == 1:
        inplane = _segment_distance(xs - (rel - along @ p.span_basis.T), v[0], v[1])
        return np.hypot(inplane, off)
    if p.rank == 2:
        proj = p.span_origin + along @ p.span_basis.T
        inside = contains_points(p, proj, 1e-12)
        edge = np.min([_segment_distance(proj, v[i], v[(i + 1) % len(v)]) for i in range(len(v))], axis=0)
        return np.hypot(np.where(inside, 0.0, edge), off)
    inside = contains_points(p, xs, 0.0)
    dist = np.min([_triangle_distance(xs, *v[t]) for t in p.triangles], axis=0)
    return np.where(inside, 0.0, dist)


def polytope_hausdorff(p: Polytope, q: Polytope) -> float:
    """Hausdorff distance between two convex polytopes.

    Distance to a convex set is a convex function, so each directed
    supremum is attained at a vertex.
    """
    return float(max(distance_to_polytope(q, p.vertices).max(),
                     distance_to_polytope(p, q.vertices).max()))


def diameter(points) -> float:
    pts = as_points(points)
    if len(pts) > 64:
        pts = convex_hull(pts).vertices
    diff = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt((diff ** 2).sum(-1).max()))


# -- randomized lemma verifiers ------------------------------------------

def _random_weights(rng: np.random.Generator, size: int, n: int) -> np.ndarray:
    """Convex-combination weights; half dense, half supported on few points."""
    w = rng.dirichlet(np.ones(n), size=size)
    sparse = rng.random(size) < 0.5
    if n > 1 and sparse.any():
        k = int(sparse.sum())
        mask = np.zeros((k, n))
        support = rng.integers(1, min(n, 3) + 1, size=k)
        for row, s in enumerate(support):
            mask[row, rng.choice(n, size=s, replace=False)] = 1.0
        ws = rng.dirichlet(np.ones(n), size=k) * mask
        w[sparse] = ws / ws.sum(axis=1, keepdims=True)
    return w


def _ball_samples(rng: np.random.Generator, size: int, d: int, radius: float,
                  boundary_fraction: float = 0.5) -> np.ndarray:
    """Points of the closed ball B(0, radius), some pinned to its sphere."""
    g = rng.standard_normal((size, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    rad = radius * rng.random(size) ** (1.0 / d)
    rad[rng.random(size) < boundary_fraction] = radius
    return g * rad[:, None]


def check_lemma_sum_absorption(A: Sequence, eps: float, samples: int = DEFAULT_SAMPLES,
                               seed: int = 0, strict: bool = True) -> bool:
    """Sampled check of conv(A) + conv(eps A) == conv(A) + eps A for eps <= 1/|A|.

    With ``strict=False`` the check runs even when the hypothesis on eps
    fails, which is how the failure of the identity can be observed.
    """
    pts = as_points(A)
    n, d = pts.shape
    if eps < 0:
        raise PreconditionViolated("eps >= 0", f"eps={eps!r}")
    if strict and eps * n > 1 + 1e-12:
        raise EpsOutOfRange(eps, n)
    rng = np.random.default_rng(seed)
    hull = convex_hull(pts)
    x = _random_weights(rng, samples, n) @ pts
    y = eps * (_random_weights(rng, samples, n) @ pts)
    # conv(A) + conv(eps A) inside conv(A) + eps a_j for some j
    shifted = (x + y)[:, None, :] - eps * pts[None, :, :]
    forward = contains_points(hull, shifted.reshape(-1, d)).reshape(samples, n).any(axis=1)
    # conv(A) + eps A inside conv(A) + conv(eps A): x stays, eps a_j is in conv(eps A)
    small = convex_hull(eps * pts)
    j = rng.integers(0, n, size=samples)
    backward = contains_points(hull, x) & contains_points(small, eps * pts[j])
    return bool(forward.all() and backward.all())


def check_distance_bound(A: Sequence, R: float, samples: int = DEFAULT_SAMPLES, seed: int = 0) -> bool:
    """Sampled check that every z in conv(A) has |z| >= R - diam(A)^2 / (2R)."""
    pts = as_points(A)
    norms = np.linalg.norm(pts, axis=1)
    if R <= 0 or np.any(norms < R - TOL_GEO):
        raise PreconditionViolated("|a| >= R for all a in A", f"min |a| = {norms.min()!r}, R = {R!r}")
    rng = np.random.default_rng(seed)
    z = _random_weights(rng, samples, len(pts)) @ pts
    bound = R - diameter(pts) ** 2 / (2 * R)
    return bool(np.all(np.linalg.norm(z, axis=1) >= bound - TOL_GEO))


def check_perturbation_lemma(A: Sequence, F: Sequence, z, r: float, delta: float,
                             samples: int = DEFAULT_SAMPLES, seed: int = 0) -> bool:
    """Sampled check that U(z, r - delta) lies in conv(F).

    Hypotheses: B(z, r) inside conv(A), every point of A strictly within
    ``delta`` of F, and 0 < delta < r.
    """
    A = as_points(A)
    d = A.shape[1]
    F = as_points(F, d)
    z = np.asarray(z, dtype=np.float64).reshape(-1)
    if not 0 < delta < r:
        raise PreconditionViolated("0 < delta < r", f"delta={delta!r}, r={r!r}")
    hull_a = convex_hull(A)
    if hull_a.degenerate or facet_slack(hull_a, z) < r - TOL_GEO:
        raise PreconditionViolated("B(z, r) inside conv(A)",
                                   f"facet slack {facet_slack(hull_a, z)!r} < r = {r!r}")
    gap = np.min(np.linalg.norm(A[:, None, :] - F[None, :, :], axis=2), axis=1)
    if np.any(gap >= delta):
        raise PreconditionViolated("A inside the open delta-neighbourhood of F",
                                   f"max distance {gap.max()!r} >= delta = {delta!r}")
    rng = np.random.default_rng(seed)
    ys = z + _ball_samples(rng, samples, d, (r - delta) * (1 - 1e-12))
    return bool(contains_points(convex_hull(F), ys).all())


def check_ball_sum_cover(A: Sequence, y, r: float, R: float, z=None,
                         samples: int = DEFAULT_SAMPLES, seed: int = 0) -> bool:
    """Sampled check of B(z, R) + A  containing  B(z, R) + B(y, r/2).

    Hypotheses: conv(A) contains B(y, r) and R > diam(A)^2 / r.  A sample
    point p of the right-hand side is covered when some translate
    z + a lies within R of it.
    """
    A = as_points(A)
    d = A.shape[1]
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    z = np.zeros(d) if z is None else np.asarray(z, dtype=np.float64).reshape(-1)
    hull = convex_hull(A)
    if hull.degenerate or facet_slack(hull, y) < r - TOL_GEO:
        raise PreconditionViolated("B(y, r) inside conv(A)")
    if not R > diameter(A) ** 2 / r:
        raise PreconditionViolated("R > diam(A)^2 / r", f"R={R!r}, diam^2/r={diameter(A) ** 2 / r!r}")
    rng = np.random.default_rng(seed)
    p = z + y + _ball_samples(rng, samples, d, R + r / 2)
    nearest = np.min(np.linalg.norm(p[:, None, :] - (z + A)[None, :, :], axis=2), axis=1)
    return bool(np.all(nearest <= R + TOL_GEO))
