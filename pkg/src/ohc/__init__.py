"""Optimal hierarchical clustering of unorganised point clouds."""

from .cloud import PointCloud, Region, SpatialIndex, build_index, estimate_normals, k_nearest, nn_distance
from .engine import Dendrogram, greedy_baseline, initialize, run, run_level
from .errors import (DegenerateTetrahedron, EmptyInput, FormatError, ForbiddenEdge, NormalsUndefined,
                     OHCError, ParseError, Undefined, ZeroSpacing)
from .hull import barycentric_coeffs, classify_points, is_inside, select_hull_vertices
from .matching import BipartiteCostView, extract_merge_groups, matching_cost, solve_min_cost_perfect_matching
from .metrics import Partition, completeness, correctness, score
from .pipeline import LabeledCloud, downsample, filter_ground, propagate_labels, segment_large_scale
from .proximity import ClusterSet, OhcParams, build_proximity, dissimilarity

__version__ = "0.1.0"
