"""Monte Carlo simulator for SINR and area spectral efficiency scaling in dense cellular networks."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigurationError,
    ContractError,
    DensimError,
    DomainError,
    InfeasibleModelError,
    InsufficientDataError,
    InsufficientPointsError,
    NoServingBSError,
    NumericError,
    UnsupportedConfigurationError,
)
from .experiments import (  # noqa: E402
    AntennaScaling,
    SweepConfig,
    SweepResult,
    antenna_count,
    ase_relative_gain,
    estimate_limit,
    run_sweep,
    verify_lemma1,
)
from .geometry import NetworkRealization, SimulationWindow, sample_ppp  # noqa: E402
from .pathloss import (  # noqa: E402
    PathLossModel,
    bounded_multi_slope,
    bounded_single_slope,
    bounded_support,
    check_feasibility,
    gamma_integral,
    stretched_exponential,
)
from .seeding import SeedPath  # noqa: E402
from .sinr import NoiseSpec, ScenarioSpec, run_trial  # noqa: E402

__all__ = [
    "AntennaScaling", "ConfigurationError", "ContractError", "DensimError", "DomainError",
    "InfeasibleModelError", "InsufficientDataError", "InsufficientPointsError", "NetworkRealization",
    "NoServingBSError", "NoiseSpec", "NumericError", "PathLossModel", "ScenarioSpec", "SeedPath",
    "SimulationWindow", "SweepConfig", "SweepResult", "UnsupportedConfigurationError", "antenna_count",
    "ase_relative_gain", "bounded_multi_slope", "bounded_single_slope", "bounded_support",
    "check_feasibility", "estimate_limit", "gamma_integral", "run_sweep", "run_trial", "sample_ppp",
    "stretched_exponential", "verify_lemma1",
]
