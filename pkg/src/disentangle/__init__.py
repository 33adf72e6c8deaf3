"""Top-level package for the disentangle simulation toolkit."""

from ._version import __version__
from .codes import QuantumCode, bit_flip_code, five_qubit_code, get_code
from .linalg import DensityMatrix, InvariantError, StateVector, UnitaryMatrix
from .period import PeriodicFunctionSpec, all_path_distributions, infer_period
from .qec import (
    EnvironmentCoupling,
    MixedErrorChannel,
    decode_and_verify,
    encode,
)

__all__ = [
    "DensityMatrix",
    "EnvironmentCoupling",
    "InvariantError",
    "MixedErrorChannel",
    "PeriodicFunctionSpec",
    "QuantumCode",
    "StateVector",
    "UnitaryMatrix",
    "all_path_distributions",
    "bit_flip_code",
    "decode_and_verify",
    "encode",
    "five_qubit_code",
    "get_code",
    "infer_period",
]
