"""Uplink grant-scheme analysis for latency-critical traffic.

The package models four uplink grant mechanisms (dynamic scheduling,
semi-persistent standing grants, soft resource reservation and grant-free
fast uplink), computes exact drop behaviour and the capacity left to
background traffic, bounds the background traffic's delay with stochastic
service envelopes, and validates everything against a slot-accurate
simulator.
"""

from .curves import (
    ArrivalCurve,
    DelayBoundResult,
    LeftoverServiceCurve,
    combined_violation_bound,
    crossing_time,
    effective_bandwidth,
    horizontal_distance,
    leftover_delay_bound,
    leftover_delay_bound_details,
    leftover_service,
    long_run_rate,
    max_stable_theta,
)
from .errors import ConfigError, DivergenceError, InfeasibleError
from .experiments import ExperimentSpec, LoadedConfig, linear_grid, load_config, run_experiment
from .radio import (
    RadioConfig,
    SchedulingScheme,
    ds_grant_latency,
    fa_grant_latency,
    haptic_access_delay,
    haptic_blocks,
)
from .scheduling import (
    DropReport,
    GrantPattern,
    drop_walk,
    ds_effective_burst_count,
    effective_burst_count,
    grant_pattern,
    remainder_of_service,
)
from .simulate import SimConfig, SimReport, empirical_quantile, run, validate_against_walk
from .traffic import (
    ArrivalTimeline,
    HapticTrafficModel,
    LeftoverTrafficModel,
    SizeDistribution,
    haptic_arrivals,
    leftover_arrivals,
    period_counters,
)

__version__ = "0.1.0"
