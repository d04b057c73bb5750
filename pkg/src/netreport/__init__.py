"""Network dataset reports: point statistics, distributions, metadata manifest, rendered document."""

__version__ = "0.1.0"

from .graph import Graph, load_attributes, load_edge_list  # noqa: E402
from .manifest import parse_manifest, validate_manifest  # noqa: E402
from .na import NA  # noqa: E402
from .point import PointStats, point_stats  # noqa: E402

__all__ = [
    "Graph",
    "NA",
    "PointStats",
    "__version__",
    "load_attributes",
    "load_edge_list",
    "parse_manifest",
    "point_stats",
    "validate_manifest",
]
