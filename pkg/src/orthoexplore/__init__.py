"""Online multi-robot exploration of orthogonal polygons and occupancy grids."""

from .explorer import ExplorationResult, Explorer, GeometricWorld, GridWorld, competitive_bound, explore
from .geometry import OrthoPolygon, load_polygon, point, visibility_polygon
from .sim import Scenario, load_scenario, run_scenario

__version__ = "0.1.0"

__all__ = [
    "ExplorationResult", "Explorer", "GeometricWorld", "GridWorld", "competitive_bound", "explore",
    "OrthoPolygon", "load_polygon", "point", "visibility_polygon",
    "Scenario", "load_scenario", "run_scenario",
]
