"""Exception types and the CLI exit codes they map to."""


class TriclockError(Exception):
    """Base class for all package errors."""


class ConfigError(TriclockError):
    """Invalid or inconsistent run configuration (exit code 2)."""

    exit_code = 2


class NonHermitianError(TriclockError):
    """Operator fails the Hermiticity check."""

    exit_code = 3


class LabelingError(TriclockError):
    """Eigenstate labeling by asymptotic overlap is ambiguous (exit code 3)."""

    exit_code = 3


class DegenerateSpectrumError(TriclockError):
    """Perturbative denominator too small for a meaningful expansion."""

    exit_code = 3


class ResolutionError(TriclockError):
    """Integrator step does not resolve the fastest Hamiltonian scale."""

    exit_code = 2


class SolverError(TriclockError):
    """Root finding / Newton iteration failed (exit code 4)."""

    exit_code = 4


class CalibrationError(TriclockError):
    """Noise-strength calibration did not converge."""

    exit_code = 4


class FitError(TriclockError):
    """Nonlinear fit did not converge or input unsuitable."""

    exit_code = 4
