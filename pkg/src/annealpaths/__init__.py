"""Annealing paths from quasi-arithmetic means, rho-tau Bregman divergences and AIS."""

from .deformed_math import (
    DomainError,
    NumericOverflowError,
    RangeError,
    RepresentationFn,
    RhoTauPair,
    make_pair,
    q_exp,
    q_log,
)
from .density import Density, DensitySpec, DiscreteSupport, GridSupport, integral, materialize, normalize
from .divergences import (
    DivergenceKind,
    bregman_information,
    named_divergence,
    rho_tau_bregman,
    scaled_divergence,
)
from .paths import AnnealingPath, make_path, quasi_arithmetic_mean
from .sampler import AisConfig, Schedule, run_ais

__version__ = "0.1.0"

__all__ = [
    "AisConfig",
    "AnnealingPath",
    "Density",
    "DensitySpec",
    "DiscreteSupport",
    "DivergenceKind",
    "DomainError",
    "GridSupport",
    "NumericOverflowError",
    "RangeError",
    "RepresentationFn",
    "RhoTauPair",
    "Schedule",
    "bregman_information",
    "integral",
    "make_pair",
    "make_path",
    "materialize",
    "named_divergence",
    "normalize",
    "q_exp",
    "q_log",
    "quasi_arithmetic_mean",
    "rho_tau_bregman",
    "run_ais",
    "scaled_divergence",
]
