"""Bit-packed rasters and Minkowski sums by shift-OR dilation.

A raster is a uniform grid of cells of side ``cell``; cell ``(i0, ..., i_{d-1})``
is centred at ``origin + cell * i``.  Bits live in ``uint64`` words packed
along axis 0 (x), least-significant bit first, with the remaining axes in
reversed order in front: the word array of a 2-D raster has shape
``(ny, ceil(nx / 64))``, so each image row is a contiguous run of words.
Padding bits past ``dims[0]`` are always zero.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from .errors import AllocationLimit, BoxTooSmall, CellMismatch, EmptyRaster, MisalignedOrigins
from .geom import TOL_GEO, Ball, Polytope, as_points, contains_points

DEFAULT_MEMORY_CAP = 2 * 1024 ** 3
WORD = 64
_U64 = np.dtype("<u8")


class Mode(str, Enum):
    INNER = "INNER"
    OUTER = "OUTER"


def _nwords(n: int) -> int:
    return (n + WORD - 1) // WORD


def _word_shape(dims: Sequence[int]) -> Tuple[int, ...]:
    return tuple(reversed(dims[1:])) + (_nwords(dims[0]),)


def pack_cells(cells: np.ndarray) -> np.ndarray:
    """Boolean array indexed in coordinate order -> packed words."""
    cells = np.asarray(cells, dtype=bool)
    rows = np.transpose(cells, tuple(reversed(range(cells.ndim))))
    nx = cells.shape[0]
    pad = _nwords(nx) * WORD - nx
    if pad:
        rows = np.concatenate([rows, np.zeros(rows.shape[:-1] + (pad,), dtype=bool)], axis=-1)
    packed = np.packbits(rows, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view(_U64)


def unpack_words(words: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`pack_cells`."""
    bits = np.unpackbits(np.ascontiguousarray(words).view(np.uint8), axis=-1, bitorder="little")
    bits = bits[..., :dims[0]].astype(bool)
    return np.transpose(bits, tuple(reversed(range(bits.ndim))))


@dataclass(frozen=True, eq=False)
class Raster:
    origin: np.ndarray
    cell: float
    dims: Tuple[int, ...]
    words: np.ndarray
    mode: Mode = Mode.INNER
    slack: float = 0.0

    @property
    def dim(self) -> int:
        return len(self.dims)

    @classmethod
    def from_cells(cls, cells, origin, cell: float, mode: Mode = Mode.INNER, slack: float = 0.0) -> "Raster":
        cells = np.asarray(cells, dtype=bool)
        origin = np.asarray(origin, dtype=np.float64).reshape(-1)
        return cls(origin, float(cell), tuple(int(n) for n in cells.shape), pack_cells(cells), Mode(mode), float(slack))

    @classmethod
    def empty(cls, origin, cell: float, dims, mode: Mode = Mode.INNER, slack: float = 0.0) -> "Raster":
        dims = tuple(int(n) for n in dims)
        return cls(np.asarray(origin, dtype=np.float64).reshape(-1), float(cell), dims,
                   np.zeros(_word_shape(dims), dtype=_U64), Mode(mode), float(slack))

    def cells(self) -> np.ndarray:
        return unpack_words(self.words, self.dims)

    def count(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    def indices(self) -> np.ndarray:
        """Set-cell indices, shape (count, d), in coordinate order."""
        return np.argwhere(self.cells())

    def centers(self) -> np.ndarray:
        return self.origin + self.cell * self.indices()

    def translated(self, shift) -> "Raster":
        return Raster(self.origin + np.asarray(shift, dtype=np.float64), self.cell, self.dims,
                      self.words, self.mode, self.slack)

    def same_bits(self, other: "Raster") -> bool:
        return self.dims == other.dims and np.array_equal(self.words, other.words)


# -- rasterization ----------------------------------------------------------

def _frame(bbox, delta: float, d: int):
    lo, hi = (np.asarray(v, dtype=np.float64).reshape(-1) for v in bbox)
    if lo.shape[0] != d or hi.shape[0] != d:
        raise BoxTooSmall(f"bounding box dimension does not match d={d}")
    if np.any(hi < lo) or delta <= 0:
        raise BoxTooSmall("empty bounding box or non-positive cell")
    dims = tuple(int(n) + 1 for n in np.rint((hi - lo) / delta))
    return lo, dims


def rasterize_inner(points, delta: float, bbox) -> Raster:
    """Set the cell containing each point.

    ``slack`` records the largest distance from a point to its cell
    centre (at most delta * sqrt(d) / 2).
    """
    lo, hi = bbox
    d = np.asarray(lo).reshape(-1).shape[0]
    origin, dims = _frame(bbox, delta, d)
    pts = np.asarray(points, dtype=np.float64).reshape(-1, d)
    cells = np.zeros(dims, dtype=bool)
    if len(pts) == 0:
        return Raster.from_cells(cells, origin, delta, Mode.INNER, 0.0)
    idx = np.rint((pts - origin) / delta).astype(np.int64)
    if np.any(idx < 0) or np.any(idx >= np.array(dims)):
        raise BoxTooSmall("points fall outside the bounding box")
    cells[tuple(idx.T)] = True
    slack = float(np.max(np.linalg.norm(pts - (origin + delta * idx), axis=1)))
    return Raster.from_cells(cells, origin, delta, Mode.INNER, slack)


def _ball_arrays(balls):
    if hasattr(balls, "centers") and hasattr(balls, "radii"):
        return np.asarray(balls.centers, dtype=np.float64), np.asarray(balls.radii, dtype=np.float64)
    if isinstance(balls, tuple) and len(balls) == 2 and not isinstance(balls[0], Ball):
        c, r = balls
        return np.asarray(c, dtype=np.float64), np.asarray(r, dtype=np.float64).reshape(-1)
    balls = list(balls)
    if not balls:
        return None, None
    return (np.array([np.asarray(b.center, dtype=np.float64).reshape(-1) for b in balls]),
            np.array([b.radius for b in balls], dtype=np.float64))


def rasterize_outer(balls, delta: float, bbox, chunk: int = 1 << 20) -> Raster:
    """Set every cell whose box can meet one of the balls.

    A cell is set when its centre lies within ``radius + delta*sqrt(d)/2``
    of a ball centre.  ``balls`` is a list of :class:`Ball`, a
    ``(centers, radii)`` pair, or anything with ``centers``/``radii``.
    """
    lo, _ = bbox
    d = np.asarray(lo).reshape(-1).shape[0]
    origin, dims = _frame(bbox, delta, d)
    cells = np.zeros(dims, dtype=bool)
    centers, radii = _ball_arrays(balls)
    half_diag = delta * math.sqrt(d) / 2
    if centers is None or len(centers) == 0:
        return Raster.from_cells(cells, origin, delta, Mode.OUTER, delta * math.sqrt(d))
    centers = centers.reshape(len(radii), d)
    reach = radii + half_diag
    k = int(math.ceil(reach.max() / delta)) + 1
    rng = np.arange(-k, k + 1)
    offsets = np.stack(np.meshgrid(*([rng] * d), indexing="ij"), axis=-1).reshape(-1, d)
    base = np.rint((centers - origin) / delta).astype(np.int64)
    dims_arr = np.array(dims)
    per = max(1, chunk // len(offsets))
    for s in range(0, len(centers), per):
        idx = base[s:s + per, None, :] + offsets[None, :, :]
        ctr = origin + delta * idx
        dist = np.linalg.norm(ctr - centers[s:s + per, None, :], axis=2)
        hit = dist <= reach[s:s + per, None] + 1e-12 * delta
        sel = idx[hit]
        if np.any(sel < 0) or np.any(sel >= dims_arr):
            raise BoxTooSmall("a ball reaches outside the bounding box")
        cells[tuple(sel.T)] = True
    return Raster.from_cells(cells, origin, delta, Mode.OUTER, delta * math.sqrt(d))


def rasterize_polytope(p: Polytope, delta: float, bbox, mode: Mode = Mode.INNER,
                       margin: float = 0.0) -> Raster:
    """Raster of a polytope on the grid fixed by ``bbox``.

    INNER sets cells whose centres lie in ``p`` (within TOL_GEO); OUTER
    sets cells whose centres satisfy every facet inequality relaxed by
    ``delta*sqrt(d)/2 + margin``, a superset of the cells meeting ``p``.
    """
    d = p.dim
    origin, dims = _frame(bbox, delta, d)
    mode = Mode(mode)
    relax = TOL_GEO if mode is Mode.INNER else delta * math.sqrt(d) / 2 + margin + TOL_GEO
    axes = [origin[i] + delta * np.arange(dims[i]) for i in range(d)]
    cells = np.zeros(dims, dtype=bool)
    # evaluate one x-column slab at a time to bound memory
    for i0 in range(0, dims[0], 256):
        sub = [axes[0][i0:i0 + 256]] + axes[1:]
        grid = np.stack(np.meshgrid(*sub, indexing="ij"), axis=-1)
        flat = grid.reshape(-1, d)
        ok = np.all(flat @ p.normals.T - p.offsets <= relax, axis=1)
        if p.degenerate:
            rel = flat - p.span_origin
            resid = rel - (rel @ p.span_basis) @ p.span_basis.T
            ok &= np.linalg.norm(resid, axis=1) <= relax
        cells[i0:i0 + 256] = ok.reshape(grid.shape[:-1])
    slack = 0.0 if mode is Mode.INNER else delta * math.sqrt(d) + margin
    return Raster.from_cells(cells, origin, delta, mode, slack)


# -- shift-OR kernel --------------------------------------------------------

def _shift_words(words: np.ndarray, s: int, wout: int) -> np.ndarray:
    """Shift each packed row by ``s`` bits toward higher x (``s`` may be
    negative); bits leaving ``[0, 64*wout)`` are dropped."""
    w = words.shape[-1]
    out = np.zeros(words.shape[:-1] + (wout,), dtype=_U64)
    q, r = divmod(s, WORD)
    src_lo = max(0, -q)
    src_hi = min(w, wout - q)
    if src_lo < src_hi:
        seg = words[..., src_lo:src_hi]
        if r == 0:
            out[..., src_lo + q:src_hi + q] = seg
        else:
            out[..., src_lo + q:src_hi + q] = seg << np.uint64(r)
    if r:
        src_lo = max(0, -q - 1)
        src_hi = min(w, wout - q - 1)
        if src_lo < src_hi:
            out[..., src_lo + q + 1:src_hi + q + 1] |= words[..., src_lo:src_hi] >> np.uint64(WORD - r)
    return out


def _check_compatible(a: Raster, b: Raster):
    if a.dim != b.dim:
        raise CellMismatch(f"dimension {a.dim} vs {b.dim}")
    if abs(a.cell - b.cell) > 1e-12 * max(a.cell, b.cell):
        raise CellMismatch(f"cell sizes differ: {a.cell!r} vs {b.cell!r}")


def _dilate_groups(a_words, groups, out_shape, wout, da_rows):
    out = np.zeros(out_shape, dtype=_U64)
    for sx, rows in groups:
        shifted = _shift_words(a_words, sx, wout)
        if not da_rows:
            out |= shifted
            continue
        for off in rows:
            sl = tuple(slice(o, o + n) for o, n in zip(off, da_rows)) + (slice(None),)
            out[sl] |= shifted
    return out


def minkowski_sum(a: Raster, b: Raster, workers: int = 1, memory_cap: int = DEFAULT_MEMORY_CAP) -> Raster:
    """Bitwise Minkowski sum of two rasters on the same cell size.

    For every set cell of the sparser operand the other operand's rows
    are shifted into place and OR-ed into the output.  Workers split the
    x-shifts and their partial outputs are OR-reduced, so the result is
    identical for any worker count.
    """
    _check_compatible(a, b)
    if a.mode != b.mode:
        raise CellMismatch(f"mode mismatch: {a.mode.value} vs {b.mode.value}")
    dims = tuple(x + y - 1 for x, y in zip(a.dims, b.dims))
    origin = a.origin + b.origin
    slack = a.slack + b.slack
    out_shape = _word_shape(dims)
    nbytes = int(np.prod(out_shape)) * 8
    workers = max(1, int(workers))
    if nbytes * (workers + 1) > memory_cap:
        raise AllocationLimit(nbytes * (workers + 1), memory_cap)
    if b.count() > a.count():
        a, b = b, a
    idx = b.indices()
    if len(idx) == 0 or a.count() == 0:
        return Raster(origin, a.cell, dims, np.zeros(out_shape, dtype=_U64), a.mode, slack)
    # rows of b offset by (i_{d-1}, ..., i_1); x index drives the bit shift
    order = np.lexsort(tuple(idx[:, k] for k in range(idx.shape[1] - 1, -1, -1)))
    idx = idx[order]
    groups = []
    xs, starts = np.unique(idx[:, 0], return_index=True)
    bounds = list(starts) + [len(idx)]
    for g, sx in enumerate(xs):
        block = idx[bounds[g]:bounds[g + 1], 1:][:, ::-1]
        groups.append((int(sx), [tuple(int(v) for v in row) for row in block]))
    da_rows = tuple(reversed(a.dims[1:]))
    wout = out_shape[-1]
    if workers == 1 or len(groups) == 1:
        words = _dilate_groups(a.words, groups, out_shape, wout, da_rows)
    else:
        parts = [groups[w::workers] for w in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partial = list(pool.map(lambda gs: _dilate_groups(a.words, gs, out_shape, wout, da_rows), parts))
        words = partial[0]
        for extra in partial[1:]:
            words |= extra
    return Raster(origin, a.cell, dims, words, a.mode, slack)


def n_fold_sum(a: Raster, n: int, workers: int = 1, memory_cap: int = DEFAULT_MEMORY_CAP) -> Raster:
    """A + ... + A (n terms) by repeated doubling."""
    if n < 1:
        raise ValueError("n must be at least 1")
    result: Optional[Raster] = None
    power = a
    while n:
        if n & 1:
            result = power if result is None else minkowski_sum(result, power, workers, memory_cap)
        n >>= 1
        if n:
            power = minkowski_sum(power, power, workers, memory_cap)
    return result


# -- comparisons --------------------------------------------------------------

def _integral_offset(a: Raster, b: Raster) -> np.ndarray:
    """Index offset of b's frame relative to a's, required to be integral."""
    raw = (b.origin - a.origin) / a.cell
    off = np.rint(raw)
    if np.any(np.abs(raw - off) * a.cell > TOL_GEO):
        raise MisalignedOrigins(f"origin offset {b.origin - a.origin} is not a multiple of {a.cell!r}")
    return off.astype(np.int64)


def _reframe(r: Raster, offset: np.ndarray, dims: Tuple[int, ...]) -> Tuple[np.ndarray, int]:
    """Move r's bits into a frame whose cell 0 is r's cell ``-offset``.

    Returns the new words and the number of set bits that fell outside.
    """
    shape = _word_shape(dims)
    moved = _shift_words(r.words, int(offset[0]), shape[-1])
    out = np.zeros(shape, dtype=_U64)
    src, dst = [], []
    for ax in range(r.dim - 1, 0, -1):
        o, n_src, n_dst = int(offset[ax]), r.dims[ax], dims[ax]
        lo, hi = max(0, -o), min(n_src, n_dst - o)
        src.append(slice(lo, max(lo, hi)))
        dst.append(slice(lo + o, max(lo, hi) + o))
    out[tuple(dst) + (slice(None),)] = moved[tuple(src) + (slice(None),)]
    # clear padding bits beyond dims[0]
    tail = dims[0] % WORD
    if tail:
        out[..., -1] &= np.uint64((1 << tail) - 1)
    lost = r.count() - int(np.bitwise_count(out).sum())
    return out, lost


def count_outside(outer: Raster, inner: Raster) -> int:
    """Number of set cells of ``inner`` that are clear in ``outer``."""
    _check_compatible(outer, inner)
    offset = _integral_offset(outer, inner)
    words, lost = _reframe(inner, offset, outer.dims)
    return lost + int(np.bitwise_count(words & ~outer.words).sum())


def contains_raster(outer: Raster, inner: Raster) -> bool:
    """True iff every set cell of ``inner`` is set in ``outer``."""
    return count_outside(outer, inner) == 0


def hausdorff_distance(a: Raster, b: Raster) -> float:
    """Hausdorff distance between the set-cell centres of two rasters.

    Computed with an exact Euclidean distance transform on a common
    frame; the result is in spatial units.
    """
    _check_compatible(a, b)
    if a.count() == 0 or b.count() == 0:
        raise EmptyRaster("Hausdorff distance needs non-empty rasters")
    off = _integral_offset(a, b)
    lo = np.minimum(0, off)
    hi = np.maximum(np.array(a.dims), off + np.array(b.dims))
    dims = tuple(int(v) for v in hi - lo)

    def place(r, o):
        grid = np.zeros(dims, dtype=bool)
        sl = tuple(slice(int(s), int(s) + n) for s, n in zip(o, r.dims))
        grid[sl] = r.cells()
        return grid

    ga, gb = place(a, -lo), place(b, off - lo)
    h_ab = ndimage.distance_transform_edt(~gb)[ga].max()
    h_ba = ndimage.distance_transform_edt(~ga)[gb].max()
    return float(max(h_ab, h_ba) * a.cell)


def to_pbm(r: Raster) -> bytes:
    """Binary PBM (P4) of a 2-D raster (1-D rasters become one row).

    Image columns follow x; the top image row is the largest y.
    """
    if r.dim == 1:
        cells = r.cells()[:, None]
    elif r.dim == 2:
        cells = r.cells()
    else:
        raise ValueError("use per-slice export for 3-D rasters")
    img = cells.T[::-1]
    payload = np.packbits(img, axis=1, bitorder="big")
    header = f"P4\n{img.shape[1]} {img.shape[0]}\n".encode("ascii")
    return header + payload.tobytes()


def slices(r: Raster):
    """Yield (z index, 2-D raster) pairs of a 3-D raster."""
    cells = r.cells()
    for k in range(r.dims[2]):
        yield k, Raster.from_cells(cells[:, :, k], r.origin[:2], r.cell, r.mode, r.slack)
