"""Exact orthogonal-polygon geometry on rational coordinates."""

from .extensions import (
    BlockingVertex,
    ClockwiseKey,
    DegenerateExtensionError,
    Extension,
    blocking_vertices,
    boundary_chain,
    clockwise_origin,
    critical_extensions,
    dominates,
    essential_extensions,
    extension_goal,
    foreign_cells,
    foreign_polygon,
    minimal_foreign,
)
from .paths import GeodesicGrid, geodesic_distance, path_length, point_along, rectilinear_goto, truncate_path
from .polygon import OrthoPolygon, PolygonError, format_polygon, l1, load_polygon, parse_polygon_text, point
from .visibility import OutsidePolygonError, VisibilityPolygon, sees, seen_boundary_intervals, visibility_polygon

__all__ = [
    "BlockingVertex", "ClockwiseKey", "DegenerateExtensionError", "Extension",
    "blocking_vertices", "boundary_chain", "clockwise_origin", "critical_extensions", "dominates",
    "essential_extensions", "extension_goal", "foreign_cells", "foreign_polygon", "minimal_foreign",
    "GeodesicGrid", "geodesic_distance", "path_length", "point_along", "rectilinear_goto", "truncate_path",
    "OrthoPolygon", "PolygonError", "format_polygon", "l1", "load_polygon", "parse_polygon_text", "point",
    "OutsidePolygonError", "VisibilityPolygon", "sees", "seen_boundary_intervals", "visibility_polygon",
]
