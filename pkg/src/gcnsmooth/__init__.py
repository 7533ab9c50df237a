"""Linear GCN smoothing, local averaging and weighted-walk variance analysis."""

from .errors import ConfigError, DegenerateFitError, GraphError, WalkExplosionError
from .graph import Graph, from_edge_list, is_connected, neighborhood
from .operators import PropagationOperator, VarianceProfile, apply_power, build, variance_profile

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DegenerateFitError",
    "Graph",
    "GraphError",
    "PropagationOperator",
    "VarianceProfile",
    "WalkExplosionError",
    "__version__",
    "apply_power",
    "build",
    "from_edge_list",
    "is_connected",
    "neighborhood",
    "variance_profile",
]
