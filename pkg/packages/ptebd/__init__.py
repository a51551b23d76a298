"""Process-tensor TEBD for qubits and spin chains coupled to bosonic baths."""
__version__ = "0.3.0"

from .bath import SpectralDensity, EtaTable, eta_coefficients
from .errors import (
    ArgumentError,
    CapacityError,
    ConfigurationError,
    NumericError,
    PtebdError,
    ShapeError,
    UndefinedValueError,
)
from .evolution import EvolutionRecord, closed_tebd_evolve, markov_evolve, pt_tebd_evolve
from .process_tensor import ProcessTensor, build_process_tensor
from .tensor_core import EXACT, TruncationPolicy

__all__ = [
    "__version__",
    "SpectralDensity",
    "EtaTable",
    "eta_coefficients",
    "ArgumentError",
    "CapacityError",
    "ConfigurationError",
    "NumericError",
    "PtebdError",
    "ShapeError",
    "UndefinedValueError",
    "EvolutionRecord",
    "closed_tebd_evolve",
    "markov_evolve",
    "pt_tebd_evolve",
    "ProcessTensor",
    "build_process_tensor",
    "EXACT",
    "TruncationPolicy",
]
