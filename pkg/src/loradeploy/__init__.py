"""Coverage, meta distribution and deployment optimisation for single-gateway LoRa cells."""

from .analytics import (
    LinkMetrics,
    MetaDistribution,
    beta_fit,
    coverage,
    coverage_per_sf,
    h_bounds,
    md_coverage,
    md_moments,
    meta_distribution,
    sir_moment,
    sir_moment_numeric,
    snr_success,
)
from .geometry import density, expected_count, sample
from .kernels import BACKEND
from .model import NetworkConfig, RingTable, SfRing, SpreadFunction, SpreadKind, build_rings, ring_radii
from .optimizer import SweepResult, effective_density, grid_search, objective
from .traffic import collision_probability, collision_profile, interval_bounds

__version__ = "0.1.0"
