"""raftlim: coupled surface phase-field / bulk diffusion simulator
with sharp-interface-limit diagnostics."""

__version__ = "0.1.0"

from .errors import (RaftlimError, InvalidArgumentError, ConfigError,
                     UnsupportedOperationError, SolverFailure,
                     NumericalBlowup)

__all__ = [
    "__version__",
    "RaftlimError", "InvalidArgumentError", "ConfigError",
    "UnsupportedOperationError", "SolverFailure", "NumericalBlowup",
]
