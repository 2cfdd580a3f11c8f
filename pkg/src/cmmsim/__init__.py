"""Decentralized cooperative map matching: networked particle filters
sharing a common GNSS error estimate over road constraints."""

from .fusion import FusionShortfall, counts_from_weights, fuse, linear_surrogate_step
from .harness import (
    ExperimentConfig,
    RunResult,
    run_and_emit,
    run_experiment,
    run_table2_suite,
)
from .metrics import MetricsRecord, decompose_error, steady_state_mean
from .network import VehicleNetwork, radius_graph, sample_poses
from .particle_filter import (
    DegenerateWeights,
    FilterConfig,
    ParticleSet,
    estimate,
    init_particles,
    predict,
    resample,
    simulate_gnss,
    update,
)
from .roadmap import RoadMap, RoadSegment, cross_road, grid_map, single_road
from .scenario import Scenario, four_vehicle, grid_city, load_scenario, single_vehicle
from .weights import (
    Policy,
    asymptotic_convergence_rate,
    constant_alpha_weights,
    max_degree_weights,
    parse_policy,
    random_weights,
    variance_min_weights,
)

__version__ = "0.1.0"
