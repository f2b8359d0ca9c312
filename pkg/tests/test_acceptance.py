"""End-to-end acceptance checks. Each test prints one PASS/FAIL line."""
import math
import os
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np

from fracsum.geom import contains_points, convex_hull
from fracsum.grid import Raster, minkowski_sum, n_fold_sum
from fracsum.ifs import cantor, cover_from_points, expand_cover, rotation_counterexample, sierpinski, unit_square
from fracsum.lemmas import TRIALS, run_trials
from fracsum.sums import (EX73_TRIANGLE, certify_nonmembership_ex73, ex73_hull_gap, theorem12_smallcase,
                          theorem71_threshold, verify_invariant_region, verify_theorem71)
from fracsum.thickness import certified_self_similar_bound, extract_packing_witness, packing_bound, sum_threshold


@contextmanager
def criterion(capsys, label, limit):
    """Time the block, print one verdict line, then fail loudly if needed."""
    state = {"ok": False, "detail": ""}
    t0 = time.perf_counter()
    try:
        yield state
    finally:
        dt = time.perf_counter() - t0
        within = dt < limit
        ok = state["ok"] and within
        note = state["detail"] + ("" if within else f" (over {limit}s budget)")
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {dt:.2f}s {note}".rstrip())
    assert state["ok"], state["detail"]
    assert within, f"{label} took {dt:.2f}s"


def test_criterion_1_cantor_sum(capsys):
    with criterion(capsys, "1 cantor seven-fold sum", 5.0) as st:
        n = theorem71_threshold(cantor())
        delta = 3.0 ** -8
        rep = verify_theorem71(cantor(), n, 8, delta)
        bound = 7 * 3.0 ** -8 + 2 * delta
        st["ok"] = n == 7 and rep.passed and rep.d_H_measured <= bound
        st["detail"] = f"n={n} d_H={rep.d_H_measured:.3e} bound={bound:.3e} verdict={rep.verdict}"


def test_criterion_2_sierpinski_sum(capsys):
    with criterion(capsys, "2 sierpinski seven-fold sum", 60.0) as st:
        n = theorem71_threshold(sierpinski())
        rep = verify_theorem71(sierpinski(), n, 5, 2.0 ** -8, workers=os.cpu_count() or 1)
        st["ok"] = n == 7 and rep.passed and rep.contained
        st["detail"] = (f"n={n} d_H={rep.d_H_measured:.4f} tol={rep.tolerance:.4f} "
                        f"contained={rep.contained}")


def test_criterion_3_rotation_example(capsys):
    with criterion(capsys, "3 rotation example certificates", 30.0) as st:
        tri = convex_hull([[float(v) for v in p] for p in EX73_TRIANGLE])
        inv = verify_invariant_region(rotation_counterexample(), tri)
        certs = [certify_nonmembership_ex73(n, k) for n, k in ((2, 10), (4, 11))]
        margins = [s.margin for c in certs for s in c.steps]
        gap, bound = ex73_hull_gap(10)
        st["ok"] = inv and all(c.valid for c in certs) and min(margins) > 0 and gap <= bound
        st["detail"] = f"invariant={inv} min_margin={min(margins):.3g} hull_gap={gap:.2e}<={bound:.2e}"


def test_criterion_4_thickness(capsys):
    with criterion(capsys, "4 thickness bound and thresholds", 5.0) as st:
        b = certified_self_similar_bound(cantor(), expand_cover(cantor(), 10))
        t_half, t_one = sum_threshold(Fraction(1, 2)), sum_threshold(1)
        st["ok"] = 1 / 6 - 1e-3 <= b.value <= 1 / 6 and t_half == 16386 and t_one == 2050
        st["detail"] = f"tau>={b.value:.6f} n(1/2)={t_half} n(1)={t_one}"


def test_criterion_5_lemma_suites(capsys):
    with criterion(capsys, "5 lemma property suites", 30.0) as st:
        runs = [run_trials(name, d, 1000) for name in TRIALS for d in (1, 2, 3)]
        failures = sum(r.failures for r in runs)
        st["ok"] = failures == 0 and all(r.trials == 1000 for r in runs)
        st["detail"] = f"{len(runs)} suites x 1000 trials, failures={failures}"


def naive_sum(a: Raster, b: Raster) -> np.ndarray:
    """For each set cell of a, OR a shifted copy of b into the output."""
    out = np.zeros(tuple(x + y - 1 for x, y in zip(a.dims, b.dims)), dtype=bool)
    bc = b.cells()
    for i in np.argwhere(a.cells()):
        out[tuple(slice(k, k + s) for k, s in zip(i, bc.shape))] |= bc
    return out


def random_raster(rng, max_side):
    dims = tuple(int(v) for v in rng.integers(1, max_side + 1, size=2))
    return Raster.from_cells(rng.random(dims) < rng.uniform(0.01, 0.4), rng.integers(-8, 8, size=2) * 0.25, 0.25)


def test_criterion_6_grid_oracle(capsys):
    with criterion(capsys, "6 grid oracle equivalence", 30.0) as st:
        rng = np.random.default_rng(2024)
        pair_bad = fold_bad = worker_bad = 0
        for _ in range(200):
            a, b = random_raster(rng, 64), random_raster(rng, 64)
            ref = minkowski_sum(a, b, workers=1)
            pair_bad += not np.array_equal(ref.cells(), naive_sum(a, b))
            worker_bad += any(minkowski_sum(a, b, workers=w).words.tobytes() != ref.words.tobytes()
                              for w in (2, 8))
        for _ in range(50):
            a, n = random_raster(rng, 24), int(rng.integers(2, 9))
            seq = a
            for _ in range(n - 1):
                seq = minkowski_sum(seq, a)
            fold_bad += not n_fold_sum(a, n).same_bits(seq)
            worker_bad += n_fold_sum(a, n, workers=8).words.tobytes() != seq.words.tobytes()
        st["ok"] = pair_bad == fold_bad == worker_bad == 0
        st["detail"] = f"pair mismatches={pair_bad} fold mismatches={fold_bad} worker mismatches={worker_bad}"


def test_criterion_7_packing_witness(capsys):
    with criterion(capsys, "7 packing witness on unit square", 10.0) as st:
        g = np.linspace(0, 1, 101)
        pts = np.array([(a, b) for a in g for b in g])
        cov = cover_from_points(pts, 0.01 * math.sqrt(2) / 2)
        c, limit = 0.3, packing_bound(Fraction(3, 10), 2)
        rng = np.random.default_rng(11)
        bad = []
        for t in range(100):
            x = cov.inner_points[rng.integers(len(cov))]
            r = float(rng.uniform(0.05, math.sqrt(2)))
            w = extract_packing_witness(cov, x, r, c)
            rad = 0.15 * r - 2 * cov.eps
            u = rng.standard_normal((100, 2))
            u /= np.linalg.norm(u, axis=1, keepdims=True)
            ys = w.inscribed.center + u * rad * np.sqrt(rng.random((100, 1)))
            if w.n_selected > limit or not contains_points(convex_hull(w.selected), ys).all():
                bad.append(t)
        st["ok"] = limit == 205 and not bad
        st["detail"] = f"N={limit} failing pairs={bad}"


def test_probe_hierarchy_three_fold(capsys):
    # n = 3 sits far below the sufficient threshold for c = 0.3; see notes in README
    with criterion(capsys, "probe H2 contains H1 at n=3 on unit square", 120.0) as st:
        rep = theorem12_smallcase([expand_cover(unit_square(), 8)], 0.3, 3)
        st["ok"] = rep.passed
        st["detail"] = (f"verdict={rep.verdict} missing_cells={rep.cells.get('missing')} "
                        f"R1={rep.radius_1:.4g} R2={rep.radius_2:.4g}")
