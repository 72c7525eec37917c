"""Community detection in spatially embedded contact networks."""

from .graph import (
    DistanceBins,
    Particle,
    Partition,
    SpatialGraph,
    bin_distances,
    build_contact_network,
    neighbors_within,
    pairwise_distance,
)
from .metrics import (
    MetricConfig,
    MetricContext,
    MetricKind,
    build_context,
    cutoff_distance,
    delta_q,
    modularity,
)

__version__ = "0.1.0"
