"""Inhomogeneous discrete-time quantum walks with quasiperiodic rotation coins.

Simulation of the walk on the integer line, the finite CW eigenproblem for
alpha = P/(4Q), checks of its spectral symmetries, and the butterfly dataset.
"""

from inhomqw.core import (
    AlphaPQ,
    GeneralCoin,
    coin_angle,
    coin_matrix,
    reduce_fraction,
    validate_general_coin,
)
from inhomqw.errors import ComputationError, InvariantError, ValidationError

__all__ = [
    "AlphaPQ",
    "GeneralCoin",
    "coin_angle",
    "coin_matrix",
    "reduce_fraction",
    "validate_general_coin",
    "ComputationError",
    "InvariantError",
    "ValidationError",
]

__version__ = "0.1.0"
