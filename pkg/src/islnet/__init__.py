"""islnet: deterministic LEO inter-satellite-link network simulator."""
__version__ = "0.1.0"

from .geometry import (  # noqa: E402
    EARTH_RADIUS_KM,
    FootprintSpec,
    GeodeticCoord,
    ecef_to_geodetic,
    elevation_angle,
    footprint_boundary,
    footprint_spec,
    geodetic_to_ecef,
    great_circle_distance,
)
from .constellation import (  # noqa: E402
    Constellation,
    ConstellationKind,
    Satellite,
    generate_random,
    generate_walker_delta,
    generate_walker_star,
    nearest_satellite,
    propagate,
)
from .topology import (  # noqa: E402
    IslGraph,
    TopologyKind,
    build_cutoff,
    build_nearest_hop,
    compute_d_max,
    sphere_block_test,
)
from .routing import (  # noqa: E402
    DelayModel,
    NoPathError,
    RoutePath,
    alternate_paths,
    dijkstra,
    end_to_end_delay,
    fiber_delay,
    fspl,
    improvement,
    path_energy,
    route,
)
