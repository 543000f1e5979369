"""Light Steiner (1+eps)-spanners for Euclidean point sets."""

from .fast_planar import base_spanner, fast_build
from .geometry import GeometryError, PointSet, spread
from .graph import GeometricGraph, SpannerReport, greedy_spanner, mst_weight, stretch_report
from .highdim import blackbox_stp, build_charging_cover_tree, build_highdim_spanner
from .nets import cover_only, greedy_net, grid_net
from .planar import build_planar_spanner, normalize_and_partition
from .steiner_trees import build_slt, build_sss_scaled, build_sss_unit

__all__ = [
    "GeometricGraph", "GeometryError", "PointSet", "SpannerReport",
    "base_spanner", "blackbox_stp", "build_charging_cover_tree", "build_highdim_spanner",
    "build_planar_spanner", "build_slt", "build_sss_scaled", "build_sss_unit", "cover_only",
    "fast_build", "greedy_net", "greedy_spanner", "grid_net", "mst_weight",
    "normalize_and_partition", "spread", "stretch_report",
]
