"""Exception hierarchy shared by every simulator module.

Each failure the simulator can report maps onto one class below so the CLI can
translate it into a diagnostic and an exit code.
"""

from typing import List, Optional


class SimulationError(Exception):
    """Base class for all simulator errors."""


class ConfigurationError(SimulationError):
    """Invalid system configuration (dimensions, SNR grid, algorithm names)."""

    def __init__(self, message: str, errors: Optional[List[str]] = None):
        self.errors = list(errors or [])
        if self.errors:
            message = f"{message}: {'; '.join(self.errors)}"
        super().__init__(message)


class ParameterError(SimulationError):
    """Invalid algorithm parameter such as a non-positive penalty."""


class PartitionError(SimulationError):
    """Antenna rows cannot be split into equal-size clusters."""


class FramingError(SimulationError):
    """Bit or symbol stream length does not match the framing rules."""


class DimensionError(SimulationError):
    """Array shapes are inconsistent with the cluster partition."""


class SingularMatrixError(SimulationError):
    """Cholesky factorization failed: the matrix is not Hermitian positive definite."""


class ContractViolationError(SimulationError):
    """A cluster program broke the decentralized execution contract."""


class ReportError(SimulationError):
    """Writing or reading a report file failed."""

    def __init__(self, path: str, reason: str):
        self.path = path
        super().__init__(f"{path}: {reason}")
