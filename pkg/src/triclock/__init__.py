"""Simulator and optimizer for clock transitions of a continuously driven
three-level system: double-lambda drive construction, doubly-dressed spectra
and susceptibilities, stochastic Schrodinger Monte Carlo, and the solvers for
the drive-noise- and magnetic-noise-insensitive operating points."""

__version__ = "0.1.0"

from .drive import DriveConfig, NoiseSample, ZERO_NOISE  # noqa: F401
from .drive import (clock_frame_hamiltonian, dressed_hamiltonian,  # noqa: F401
                    dressed_hamiltonian_full, drive_waveform,
                    lab_hamiltonian, lambda_hamiltonian)
from .engine import (EnsembleResult, ProtocolSpec, dressed_ramsey_shot,  # noqa: F401
                     evolve, run_protocol, survival_shot)
from .errors import (CalibrationError, ConfigError, DegenerateSpectrumError,  # noqa: F401
                     FitError, LabelingError, NonHermitianError,
                     ResolutionError, SolverError, TriclockError)
from .fitting import (CoherenceEstimate, EnvelopeEstimate, ScanCurve,  # noqa: F401
                      extract_envelope, fid_decay_time, fit_damped_sinusoid,
                      scan_detunings)
from .linalg import (State3, Unitary3, dressed_basis_transform,  # noqa: F401
                     hermitian_eig, lambda_basis_transform, step_propagator)
from .noise import (DriveNoiseParams, NoiseRealization, OUParams,  # noqa: F401
                    calibrate_sigma, draw_drive_deviation, make_realization,
                    ou_sample, ou_squared_envelope)
from .optimize import (ClockSolution, MaxCoherencePoint,  # noqa: F401
                       basic_coherence_limit, improved_coherence_limit,
                       max_coherence_scan, optimize_basic, optimize_improved)
from .spectrum import (DoublyDressedSpectrum, DriveSusceptibility,  # noqa: F401
                       amplitude_mixing, combined_coherence_time,
                       doubly_dressed_spectrum, drive_susceptibility,
                       driving_coherence_time, magnetic_second_order)
