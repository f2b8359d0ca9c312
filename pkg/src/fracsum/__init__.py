"""Arithmetic sums of self-similar sets: attractor covers, bit-grid
Minkowski sums, thickness bounds and certified sum checks."""

from .errors import *  # noqa: F401,F403
from .geom import (TOL_GEO, Ball, InscribedBall, Polytope, chebyshev_center, contains_point,
                   convex_hull, diameter, distance_to_polytope, polytope_hausdorff)
from .grid import (Mode, Raster, contains_raster, count_outside, hausdorff_distance, minkowski_sum, n_fold_sum,
                   rasterize_inner, rasterize_outer, rasterize_polytope, to_pbm)
from .ifs import (IFS, AffineMap, CylinderCover, apply_word, cantor, cover_from_points, expand_cover,
                  fixed_points, homogeneous, root_ball, rotation_counterexample, sierpinski, unit_square)
from .sums import (certify_nonmembership_ex73, expand_word_families, theorem12_smallcase,
                   theorem71_threshold, verify_invariant_region, verify_theorem71)
from .thickness import (certified_self_similar_bound, estimate_thickness, extract_packing_witness,
                        packing_bound, sum_threshold)

__version__ = "0.1.0"
