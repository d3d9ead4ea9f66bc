"""Exception hierarchy shared by every stage of the toolkit."""

from typing import Any, Optional


class OVSError(Exception):
    """Base class for toolkit failures"""


class ConfigError(OVSError, ValueError):
    """Invalid or incomplete configuration document"""

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class ConfigSyntaxError(ConfigError):
    """Malformed configuration text"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        location = f"line {line}: " if line is not None else ""
        super().__init__(f"syntax error at {location}{message}")


class MeshError(OVSError):
    """Voxelization or path sampling failed"""


class SolverError(OVSError, RuntimeError):
    """A numerical stage failed"""


class ConvergenceError(SolverError):
    """Iterative solve did not reach the requested tolerance"""

    def __init__(self, label: str, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"{label}: no convergence after {iterations} iterations "
            f"(relative residual {residual:.3e})"
        )


class SingularSystemError(SolverError):
    """System matrix has no unique solution"""


class ThermalError(SolverError):
    """Transient schedule cannot be built"""


class ElectrodeError(SolverError):
    """Electrodes missing or short-circuited"""


class HalfWaveVoltageError(SolverError):
    """Electro-optic retardation too small to scale to a half-wave"""


class ProbeError(OVSError, ValueError):
    """Probe point or time outside the simulated domain"""


class SignalFitError(OVSError, ValueError):
    """Drift fit design matrix is unusable"""


class SweepError(OVSError):
    """One or more mode evaluations failed; carries the partial report"""

    def __init__(self, message: str, report: Any = None):
        self.report = report
        super().__init__(message)
