"""Doubly-dressed spectra and perturbative susceptibilities.

First-order drive-noise susceptibilities come from the Hellmann-Feynman
theorem on the static dressed-frame Hamiltonian; second-order magnetic
coefficients (a, b, c) from the clock-frame coupling with its real alpha/beta
coefficients; the amplitude-mixing fraction from first-order Floquet
contamination by the rotating parts of the magnetic term.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .drive import (DriveConfig, NoiseSample, ZERO_NOISE, coupling_sign,
                    dressed_hamiltonian_full)
from .errors import DegenerateSpectrumError, LabelingError
from .linalg import SQRT2, hermitian_eig

OVERLAP_MIN = 0.5
COHERENCE_TIME_FLOOR = 1e-18  # of omega_d, below which T2 is reported infinite

DRESSED_LABELS = ("u~", "B~", "d~")


def _magnetic_coupling_operator() -> np.ndarray:
    """K = (|B><u| - |B><d|)/sqrt(2): the delta_b S_z image per unit delta_b,
    stripped of its e^{i delta t} phase (dressed-basis coordinates)."""
    k = np.zeros((3, 3), dtype=np.complex128)
    k[1, 0] = 1.0 / SQRT2
    k[1, 2] = -1.0 / SQRT2
    return k


def _fix_column_phases(vecs: np.ndarray) -> np.ndarray:
    """Make the first nonzero component of each eigenvector real positive."""
    out = vecs.copy()
    for k in range(3):
        col = out[:, k]
        idx = int(np.argmax(np.abs(col) > 1e-12))
        ph = col[idx]
        out[:, k] = col * (np.conj(ph) / abs(ph))
    return out


@dataclass(frozen=True)
class DoublyDressedSpectrum:
    """Labeled eigensystem of the static dressed-frame Hamiltonian.

    energies and the eigenvector columns are ordered (u~, B~, d~); labels are
    assigned by maximum squared overlap with the asymptotic (u, B, d) states.
    alpha/beta are the real coefficients of the magnetic coupling conjugated
    into this eigenbasis.
    """

    energies: np.ndarray          # (3,) rad/s
    vectors: np.ndarray           # (3, 3) columns in dressed coordinates
    alpha: float
    beta: float
    overlaps: np.ndarray          # (3,) labeling scores, each > 1/2
    delta: float                  # frame detuning carried for the clock frame

    @property
    def omega_rq(self) -> float:
        """Robust-qubit energy gap |E_B~ - E_d~|."""
        return float(abs(self.energies[1] - self.energies[2]))

    def gap(self, a: str, b: str) -> float:
        ia = DRESSED_LABELS.index(a)
        ib = DRESSED_LABELS.index(b)
        return float(self.energies[ia] - self.energies[ib])


def doubly_dressed_spectrum(cfg: DriveConfig,
                            noise: NoiseSample = ZERO_NOISE) -> DoublyDressedSpectrum:
    """Diagonalize the static dressed-frame Hamiltonian and label the states.

    Raises LabelingError when any overlap with the asymptotic basis drops to
    1/2 or below (near the level crossing at delta ~ +-omega_d); callers
    scanning detunings should treat that as a hole in the scan range.
    """
    # static part of the full dressed-frame Hamiltonian: at delta_b = 0 the
    # builder is time independent and includes the one-photon detuning
    static_noise = NoiseSample(0.0, noise.delta1, noise.delta2)
    h = dressed_hamiltonian_full(0.0, cfg, static_noise)
    w, v = hermitian_eig(h)
    order = np.full(3, -1, dtype=int)
    taken = set()
    scores = np.zeros(3)
    for j in range(3):  # j indexes the asymptotic basis state (u, B, d)
        ov = np.abs(v[j, :]) ** 2
        k = int(np.argmax(ov))
        if ov[k] <= OVERLAP_MIN:
            raise LabelingError(
                f"overlap {ov[k]:.3f} with asymptotic state {DRESSED_LABELS[j]!r} "
                "is ambiguous; perturb delta away from the level crossing")
        if k in taken:
            raise LabelingError("two labels claim the same eigenvector")
        taken.add(k)
        order[j] = k
        scores[j] = ov[k]
    energies = w[order]
    vecs = _fix_column_phases(v[:, order])
    kt = vecs.conj().T @ _magnetic_coupling_operator() @ vecs
    alpha_c = SQRT2 * kt[1, 0]
    beta_c = SQRT2 * kt[1, 2]
    if max(abs(alpha_c.imag), abs(beta_c.imag)) > 1e-9:
        raise LabelingError("magnetic coupling coefficients are not real after "
                            "the global phase convention")
    return DoublyDressedSpectrum(energies=energies, vectors=vecs,
                                 alpha=float(alpha_c.real), beta=float(beta_c.real),
                                 overlaps=scores, delta=cfg.delta)


def _perturbation_operators(cfg: DriveConfig):
    s = coupling_sign(cfg)
    d1 = np.zeros((3, 3), dtype=np.complex128)
    d1[0, 0] = s * cfg.omega_d
    d1[2, 2] = -s * cfg.omega_d
    g = cfg.omega_b / SQRT2
    d2 = np.zeros((3, 3), dtype=np.complex128)
    d2[0, 1] = d2[1, 0] = g
    d2[1, 2] = d2[2, 1] = g
    return d1, d2


@dataclass(frozen=True)
class DriveSusceptibility:
    """First-order eigenvalue derivatives along a drive-noise direction."""

    e_u: float
    e_b: float
    e_d: float
    direction: tuple

    def pair_difference(self, pair=("B~", "d~")) -> float:
        vals = {"u~": self.e_u, "B~": self.e_b, "d~": self.e_d}
        return vals[pair[0]] - vals[pair[1]]


def drive_susceptibility(cfg: DriveConfig, direction=(1.0, 1.0),
                         spectrum: DoublyDressedSpectrum | None = None) -> DriveSusceptibility:
    """Hellmann-Feynman first-order response e_k = <k| w1 dH/ddelta1 + w2 dH/ddelta2 |k>."""
    if spectrum is None:
        spectrum = doubly_dressed_spectrum(cfg)
    w1, w2 = direction
    d1, d2 = _perturbation_operators(cfg)
    pert = w1 * d1 + w2 * d2
    es = np.real(np.einsum("ik,ij,jk->k", spectrum.vectors.conj(), pert, spectrum.vectors))
    return DriveSusceptibility(e_u=float(es[0]), e_b=float(es[1]), e_d=float(es[2]),
                               direction=(float(w1), float(w2)))


def second_order_drive_gap(cfg: DriveConfig, direction=(1.0, 1.0),
                           pair=("B~", "d~"),
                           spectrum: DoublyDressedSpectrum | None = None) -> float:
    """Second-order response of the pair gap to the drive-noise direction.

    Standard sum over intermediate states; per unit squared deviation.
    """
    if spectrum is None:
        spectrum = doubly_dressed_spectrum(cfg)
    w1, w2 = direction
    d1, d2 = _perturbation_operators(cfg)
    pt = spectrum.vectors.conj().T @ (w1 * d1 + w2 * d2) @ spectrum.vectors
    shifts = np.zeros(3)
    for k in range(3):
        for m in range(3):
            if m == k:
                continue
            den = spectrum.energies[k] - spectrum.energies[m]
            shifts[k] += abs(pt[k, m]) ** 2 / den
    ia = DRESSED_LABELS.index(pair[0])
    ib = DRESSED_LABELS.index(pair[1])
    return float(shifts[ia] - shifts[ib])


def driving_coherence_time(cfg: DriveConfig, direction=(1.0, 1.0),
                           delta_magnitude: float = 0.005,
                           pair=("B~", "d~")) -> float:
    """Drive-noise-limited coherence time sqrt(2)/(|e_k - e_j| * delta).

    Returns math.inf when the susceptibility difference underflows
    1e-18 * omega_d, so detuning scans cross the clock point smoothly.
    """
    if pair[0] not in DRESSED_LABELS or pair[1] not in DRESSED_LABELS:
        raise ValueError(f"unknown pair {pair}")
    sus = drive_susceptibility(cfg, direction)
    diff = abs(sus.pair_difference(pair))
    if diff < COHERENCE_TIME_FLOOR * cfg.omega_d:
        return math.inf
    return SQRT2 / (diff * delta_magnitude)


def combined_coherence_time(cfg: DriveConfig, direction=(1.0, 1.0),
                            delta_magnitude: float = 0.005,
                            t_limit: float = 190e-6,
                            pair=("B~", "d~")) -> float:
    """sqrt(2) / (sqrt(2)/t_limit + |e_B~ - e_d~| * delta): the coherence-time
    model with a hard background limit t_limit (seconds)."""
    if not t_limit > 0:
        raise ValueError("t_limit must be positive")
    sus = drive_susceptibility(cfg, direction)
    diff = abs(sus.pair_difference(pair))
    return SQRT2 / (SQRT2 / t_limit + diff * delta_magnitude)


def magnetic_second_order(cfg: DriveConfig, frame_shift: bool = True,
                          spectrum: DoublyDressedSpectrum | None = None):
    """Second-order magnetic coefficients (a, b, c) per unit delta_b^2.

    Level shifts under the clock-frame coupling: shift_u~ = +a*delta_b^2,
    shift_d~ = -b*delta_b^2, shift_B~ = -c*delta_b^2.  With frame_shift the
    B~ energy carries its +delta offset (the clock-frame form used for the
    improved-scheme b = c condition); frame_shift=False gives the unshifted
    dressed-basis approximation used for the basic-scheme coherence limits.
    """
    if spectrum is None:
        spectrum = doubly_dressed_spectrum(cfg)
    e = spectrum.energies
    dvec = np.array([e[0], e[1] + (cfg.delta if frame_shift else 0.0), e[2]])
    w = np.zeros((3, 3))
    w[1, 0] = w[0, 1] = spectrum.alpha / SQRT2
    w[1, 2] = w[2, 1] = spectrum.beta / SQRT2
    shifts = np.zeros(3)
    for k in range(3):
        for m in range(3):
            if m == k or w[k, m] == 0.0:
                continue
            den = dvec[k] - dvec[m]
            if abs(den) < 1e-6 * cfg.omega_d:
                raise DegenerateSpectrumError(
                    f"clock-frame levels {DRESSED_LABELS[k]}/{DRESSED_LABELS[m]} "
                    f"separated by only {den:.3e} rad/s")
            shifts[k] += w[k, m] ** 2 / den
    return float(shifts[0]), float(-shifts[2]), float(-shifts[1])


def magnetic_gap_expansion(cfg: DriveConfig, delta_b_scale: float,
                           pair=("B~", "d~")):
    """Quadratic and quartic coefficients of the pair gap versus delta_b.

    Dense diagonalization of the clock-frame Hamiltonian on a stencil of
    static delta_b values, followed by an even polynomial fit.
    """
    from .drive import clock_frame_hamiltonian
    spectrum = doubly_dressed_spectrum(cfg)
    ia = DRESSED_LABELS.index(pair[0])
    ib = DRESSED_LABELS.index(pair[1])
    base = None
    xs = delta_b_scale * np.array([-1.0, -0.5, 0.5, 1.0])
    gaps = []
    for db in np.concatenate(([0.0], xs)):
        h = clock_frame_hamiltonian(cfg, db, spectrum=spectrum)
        w, v = hermitian_eig(h)
        # reassign by overlap with the noiseless basis vectors (identity here)
        idx = [int(np.argmax(np.abs(v[j, :]) ** 2)) for j in range(3)]
        gap = w[idx[ia]] - w[idx[ib]]
        if base is None:
            base = gap
        else:
            gaps.append(gap - base)
    a_mat = np.vstack([xs ** 2, xs ** 4]).T
    coef, *_ = np.linalg.lstsq(a_mat, np.array(gaps), rcond=None)
    return float(coef[0]), float(coef[1])


def amplitude_mixing(cfg: DriveConfig, delta_b_rms: float,
                     spectrum: DoublyDressedSpectrum | None = None) -> float:
    """First-order contamination of the eigenstates by the rotating magnetic terms.

    For each pair and each e^{+-i delta t} component of the coupling, the
    mixing weight is |<j|V|k> / (E_k - E_j +- delta)|^2 evaluated at
    delta_b = delta_b_rms; the returned fraction is the largest per-state
    total.  Raises on resonant denominators (< 1e-3 * delta).
    """
    if spectrum is None:
        spectrum = doubly_dressed_spectrum(cfg)
    kt = spectrum.vectors.conj().T @ _magnetic_coupling_operator() @ spectrum.vectors
    e = spectrum.energies
    weights = np.zeros((3, 3))
    for mat, nu in ((kt, cfg.delta), (kt.conj().T, -cfg.delta)):
        for j in range(3):
            for k in range(3):
                if j == k or abs(mat[j, k]) < 1e-12:
                    continue
                den = e[k] - e[j] - nu
                if abs(den) < 1e-3 * abs(cfg.delta):
                    raise DegenerateSpectrumError(
                        f"rotating magnetic term resonant with the "
                        f"{DRESSED_LABELS[j]}/{DRESSED_LABELS[k]} transition")
                amp = delta_b_rms / SQRT2 * mat[j, k] / den
                weights[j, k] += abs(amp) ** 2
    return float(weights.sum(axis=0).max())
