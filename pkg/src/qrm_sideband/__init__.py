"""Two-photon sideband transitions in the driven quantum Rabi model.

Analytic matching frequencies and rates (``analytic``), RK4 propagation of the
driven Hamiltonian (``evolve``), numerical chevron sweeps and model comparison
(``sweep``) and a command-line front end (``cli``).  Frequencies are in GHz and
times in ns.
"""
from .analytic import (
    ModelVariant,
    RateBreakdown,
    SidebandKind,
    dispersive_shift,
    matching_frequency,
    modulation_amplitude,
    predict,
    sideband_rate,
    stark_shift,
)
from .errors import ConfigError, SidebandError
from .evolve import QuantumState, TimeTrace, endpoint_observable, propagate
from .model import BiDrive, DriveTone, MonoDrive, PulseSpec, SystemParams, dressed_basis
from .sweep import ScanSpec, compare_models, extract_rate, find_matching_frequency_numeric, numeric_rate

__version__ = "0.1.0"

__all__ = [
    "BiDrive", "ConfigError", "DriveTone", "ModelVariant", "MonoDrive", "PulseSpec",
    "QuantumState", "RateBreakdown", "ScanSpec", "SidebandError", "SidebandKind",
    "SystemParams", "TimeTrace", "compare_models", "dispersive_shift", "dressed_basis",
    "endpoint_observable", "extract_rate", "find_matching_frequency_numeric",
    "matching_frequency", "modulation_amplitude", "numeric_rate", "predict", "propagate",
    "sideband_rate", "stark_shift",
]
