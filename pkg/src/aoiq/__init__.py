"""Two-stream status-update queue: closed forms, CTMC oracle, simulator, CLI."""

from .params import (
    InvalidConfig,
    InvalidRate,
    ModelParams,
    NearBoundary,
    OutOfDomain,
    SingularDenominator,
    SingularSystem,
    UnstableSystem,
)
from .analytic import (
    SpectralDecomposition,
    StabilityReport,
    StationaryDistribution,
    check_stability,
    expected_queue_length,
    peak_age_ordinary,
    priority_age,
    queue_length_mgf,
    reference_mm1_age,
    spectral,
    stationary,
)
from .age import (
    SystemTimeLB,
    VirtualServiceLaw,
    age_lower_bound,
    clock_probabilities,
    expected_overlap,
    system_time_lb,
    virtual_service_moments,
)
from .ctmc import build_generator, oracle_expected_n, solve_stationary
from .sim import SimConfig, SimResult, occupancy_check, run

__all__ = [
    "ModelParams", "UnstableSystem", "NearBoundary", "OutOfDomain", "InvalidRate",
    "SingularDenominator", "SingularSystem", "InvalidConfig",
    "StabilityReport", "SpectralDecomposition", "StationaryDistribution",
    "check_stability", "spectral", "stationary", "queue_length_mgf",
    "expected_queue_length", "peak_age_ordinary", "priority_age",
    "reference_mm1_age",
    "VirtualServiceLaw", "SystemTimeLB", "clock_probabilities",
    "virtual_service_moments", "system_time_lb", "expected_overlap",
    "age_lower_bound",
    "build_generator", "solve_stationary", "oracle_expected_n",
    "SimConfig", "SimResult", "run", "occupancy_check",
]
