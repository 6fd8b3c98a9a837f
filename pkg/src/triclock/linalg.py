"""Exact 3x3 complex linear algebra for the driven three-level system.

Carries the fixed basis transformations between the bare, lambda (bright/dark),
and dressed bases, plus Hermitian eigendecomposition and exact unitary
propagation steps.  All frequencies are angular (rad/s).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._eig3 import eig3_herm
from .errors import NonHermitianError

HERMITIAN_RTOL = 1e-9
UNITARY_ATOL = 1e-10
NORM_ATOL = 1e-10

# basis name -> state labels, in storage order
BASES = {
    "bare": ("-1", "0", "+1"),
    "lambda": ("0", "B", "D"),
    "dressed": ("u", "B", "d"),
    "doubly_dressed": ("u~", "B~", "d~"),
}

SQRT2 = np.sqrt(2.0)


def hermiticity_defect(h: np.ndarray) -> float:
    """Relative asymmetry ||H - H^dag|| / ||H|| (0 for exactly Hermitian)."""
    h = np.asarray(h)
    scale = np.linalg.norm(h)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(h - h.conj().T) / scale)


def require_hermitian(h: np.ndarray, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    h = np.ascontiguousarray(h, dtype=np.complex128)
    if h.shape != (3, 3):
        raise NonHermitianError(f"expected a 3x3 operator, got shape {h.shape}")
    defect = hermiticity_defect(h)
    if defect > rtol:
        raise NonHermitianError(f"operator asymmetry {defect:.3e} exceeds {rtol:.1e}")
    return h


@dataclass(frozen=True)
class State3:
    """Three complex amplitudes over an explicitly labeled basis."""

    amplitudes: np.ndarray
    basis: str

    def __post_init__(self):
        vec = np.asarray(self.amplitudes, dtype=np.complex128).reshape(3)
        object.__setattr__(self, "amplitudes", vec)
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}; one of {sorted(BASES)}")
        nrm = np.linalg.norm(vec)
        if abs(nrm * nrm - 1.0) > NORM_ATOL:
            raise ValueError(f"state norm^2 = {nrm*nrm:.12f} is not 1 within {NORM_ATOL:.0e}")

    @classmethod
    def normalized(cls, amplitudes, basis: str) -> "State3":
        vec = np.asarray(amplitudes, dtype=np.complex128).reshape(3)
        return cls(vec / np.linalg.norm(vec), basis)

    def population(self, label: str) -> float:
        idx = BASES[self.basis].index(label)
        return float(abs(self.amplitudes[idx]) ** 2)


@dataclass(frozen=True)
class Unitary3:
    """3x3 unitary with source and target basis labels."""

    matrix: np.ndarray
    source: str
    target: str

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128).reshape(3, 3)
        object.__setattr__(self, "matrix", m)
        defect = np.max(np.abs(m.conj().T @ m - np.eye(3)))
        if defect > UNITARY_ATOL:
            raise ValueError(f"U^dag U deviates from identity by {defect:.3e}")

    def apply(self, state: State3) -> State3:
        if state.basis != self.source:
            raise ValueError(f"transform maps {self.source!r} -> {self.target!r}, "
                             f"state is in {state.basis!r}")
        return State3(self.matrix @ state.amplitudes, self.target)

    def conjugate_operator(self, op: np.ndarray) -> np.ndarray:
        """Express a source-basis operator in the target basis: U A U^dag."""
        return self.matrix @ np.asarray(op, dtype=np.complex128) @ self.matrix.conj().T

    def inverse(self) -> "Unitary3":
        return Unitary3(self.matrix.conj().T, source=self.target, target=self.source)


def lambda_basis_transform() -> Unitary3:
    """Bare (-1, 0, +1) to lambda (0, B, D) basis change.

    B = (|+1> + |-1>)/sqrt(2), D = (|+1> - |-1>)/sqrt(2).
    """
    m = np.array([[0.0, 1.0, 0.0],
                  [1 / SQRT2, 0.0, 1 / SQRT2],
                  [-1 / SQRT2, 0.0, 1 / SQRT2]], dtype=np.complex128)
    return Unitary3(m, source="bare", target="lambda")


def dressed_basis_transform() -> Unitary3:
    """Lambda (0, B, D) to dressed (u, B, d) basis change.

    u = (|0> + |D>)/sqrt(2), d = (|0> - |D>)/sqrt(2).
    """
    m = np.array([[1 / SQRT2, 0.0, 1 / SQRT2],
                  [0.0, 1.0, 0.0],
                  [1 / SQRT2, 0.0, -1 / SQRT2]], dtype=np.complex128)
    return Unitary3(m, source="lambda", target="dressed")


def hermitian_eig(h: np.ndarray):
    """Eigenvalues (ascending) and orthonormal eigenvector columns of a Hermitian 3x3.

    Closed-form Cardano solver with a Jacobi fallback near degeneracy; any
    orthonormal basis of a degenerate subspace is acceptable.
    """
    h = require_hermitian(h)
    return eig3_herm(h)


def step_propagator(h: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i h dt) via eigendecomposition; exactly unitary up to rounding."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    w, v = hermitian_eig(h)
    return (v * np.exp(-1j * w * dt)) @ v.conj().T
