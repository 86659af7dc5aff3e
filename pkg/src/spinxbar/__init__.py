"""Device-to-array simulator for spin-based XNOR in-memory-computing crossbars."""
from .analysis import design_rdm, sense_margin_sweep
from .config import ExperimentConfig
from .crossbar import ArrayGeometry, BiasScheme, apply_bias, build_array, solve
from .design import Design
from .errors import (
    CalibrationError,
    ConfigurationError,
    ConvergenceError,
    InvalidParameterError,
    NumericalError,
    PartialWriteError,
    SpinXbarError,
    TopologyError,
)
from .imc import calibrate_adc, golden_mac, program_weights, xnor_mac
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry",
    "BACKEND",
    "BiasScheme",
    "CalibrationError",
    "ConfigurationError",
    "ConvergenceError",
    "Design",
    "ExperimentConfig",
    "InvalidParameterError",
    "NumericalError",
    "PartialWriteError",
    "SpinXbarError",
    "TopologyError",
    "apply_bias",
    "build_array",
    "calibrate_adc",
    "design_rdm",
    "golden_mac",
    "program_weights",
    "sense_margin_sweep",
    "solve",
    "xnor_mac",
]
