"""Numba trial kernels for the Monte Carlo engine.

Each kernel integrates one noise realization with midpoint-exponential steps
(psi <- exp(-i H(t + dt/2) dt) psi, exactly unitary per step).  The magnetic
noise value is held per step at its grid-node value; deterministic phases are
evaluated at the step midpoint.  Pulses run on their own sub-grid so the
nominal pulse area is exact regardless of the master step; the noise value is
held fixed across a pulse (pulse duration << correlation time).
"""
import numpy as np
from numba import njit

from ._eig3 import eigh3

SQRT2 = np.sqrt(2.0)


@njit(cache=True, nogil=True)
def _apply_step(h, dt, psi, w, v):
    eigh3(h, w, v)
    c0 = np.conj(v[0, 0]) * psi[0] + np.conj(v[1, 0]) * psi[1] + np.conj(v[2, 0]) * psi[2]
    c1 = np.conj(v[0, 1]) * psi[0] + np.conj(v[1, 1]) * psi[1] + np.conj(v[2, 1]) * psi[2]
    c2 = np.conj(v[0, 2]) * psi[0] + np.conj(v[1, 2]) * psi[1] + np.conj(v[2, 2]) * psi[2]
    e0 = np.exp(-1j * w[0] * dt) * c0
    e1 = np.exp(-1j * w[1] * dt) * c1
    e2 = np.exp(-1j * w[2] * dt) * c2
    psi[0] = v[0, 0] * e0 + v[0, 1] * e1 + v[0, 2] * e2
    psi[1] = v[1, 0] * e0 + v[1, 1] * e1 + v[1, 2] * e2
    psi[2] = v[2, 0] * e0 + v[2, 1] * e1 + v[2, 2] * e2


@njit(cache=True, nogil=True)
def _lambda_h(h, t, om_d, om_b, delta, delta0, sign, d1, d2, db):
    """Lambda-basis (0, B, D) Hamiltonian into the buffer h."""
    gd = sign * om_d * (1.0 + d1) * np.exp(-1j * delta0 * t)
    gb = om_b * (1.0 + d2) * np.exp(1j * (delta - delta0) * t)
    h[0, 0] = 0.0
    h[1, 1] = 0.0
    h[2, 2] = 0.0
    h[0, 2] = gd
    h[2, 0] = np.conj(gd)
    h[0, 1] = gb
    h[1, 0] = np.conj(gb)
    h[1, 2] = db
    h[2, 1] = db


@njit(cache=True, nogil=True)
def _pulse(psi, om_d, delta0, sign, d1, db, t_pulse, nsub, h, w, v):
    """On-resonant lambda pulse of exact nominal duration t_pulse.

    The pulse tone is 90 degrees out of phase with the free-evolution drive,
    so a quarter-period pulse maps |0> onto the drive eigenstate (|0>+|D>)/sqrt(2)
    that the continuous drive then freezes.
    """
    dt = t_pulse / nsub
    for k in range(nsub):
        tm = (k + 0.5) * dt
        gd = -1j * sign * om_d * (1.0 + d1) * np.exp(-1j * delta0 * tm)
        h[0, 0] = 0.0
        h[1, 1] = 0.0
        h[2, 2] = 0.0
        h[0, 1] = 0.0
        h[1, 0] = 0.0
        h[0, 2] = gd
        h[2, 0] = np.conj(gd)
        h[1, 2] = db
        h[2, 1] = db
        _apply_step(h, dt, psi, w, v)


# the pulse Hamiltonian is static apart from the slow one-photon-detuning
# phase, so the midpoint exponential needs only a few substeps
PULSE_SUBSTEPS = 8


@njit(cache=True, nogil=True)
def ramsey_trial(om_d, om_b, delta, delta0, sign, d1, d2, db_path, dt,
                 tau_steps, t_pulse, out):
    """Dressed-basis Ramsey sequence in the lambda frame.

    pi/2 pulse - free evolution for tau - pi/2 pulse - measure P0, recorded
    for every tau in tau_steps (integer multiples of dt).  The free-evolution
    prefix is shared: the second pulse acts on a snapshot of the state.
    Returns the final norm deviation of the longest-evolved state.
    """
    h = np.zeros((3, 3), dtype=np.complex128)
    w = np.empty(3)
    v = np.empty((3, 3), dtype=np.complex128)
    psi = np.zeros(3, dtype=np.complex128)
    psi[0] = 1.0
    probe = np.empty(3, dtype=np.complex128)

    _pulse(psi, om_d, delta0, sign, d1, db_path[0], t_pulse, PULSE_SUBSTEPS, h, w, v)

    n_tau = tau_steps.shape[0]
    i_rec = 0
    k = 0
    max_step = tau_steps[n_tau - 1]
    while True:
        while i_rec < n_tau and tau_steps[i_rec] == k:
            probe[0] = psi[0]
            probe[1] = psi[1]
            probe[2] = psi[2]
            _pulse(probe, om_d, delta0, sign, d1, db_path[k], t_pulse,
                   PULSE_SUBSTEPS, h, w, v)
            out[i_rec] = abs(probe[0]) ** 2
            i_rec += 1
        if k >= max_step:
            break
        tm = (k + 0.5) * dt
        _lambda_h(h, tm, om_d, om_b, delta, delta0, sign, d1, d2, db_path[k])
        _apply_step(h, dt, psi, w, v)
        k += 1
    nrm = abs(psi[0]) ** 2 + abs(psi[1]) ** 2 + abs(psi[2]) ** 2
    return abs(nrm - 1.0)


@njit(cache=True, nogil=True)
def _dressed_h(h, t, om_d, om_b, delta, delta0, sign, d1, d2, db):
    """Dressed-basis (u, B, d) Hamiltonian with the rotating magnetic term."""
    g = om_b * (1.0 + d2) / SQRT2
    half = delta0 / 2.0
    h[0, 0] = sign * om_d * (1.0 + d1) - half
    h[2, 2] = -sign * om_d * (1.0 + d1) - half
    h[1, 1] = -delta
    h[0, 2] = -half
    h[2, 0] = -half
    cb = db / SQRT2 * np.exp(1j * delta * t)
    h[1, 0] = g + cb
    h[0, 1] = g + np.conj(cb)
    h[1, 2] = g - cb
    h[2, 1] = g - np.conj(cb)


@njit(cache=True, nogil=True)
def survival_trial(om_d, om_b, delta, delta0, sign, d1, d2, db_path, dt,
                   tau_steps, psi0, out):
    """Survival probability |<psi0|psi(tau)>|^2 under the full dressed-frame
    Hamiltonian, recorded at tau_steps (integer multiples of dt)."""
    h = np.zeros((3, 3), dtype=np.complex128)
    w = np.empty(3)
    v = np.empty((3, 3), dtype=np.complex128)
    psi = psi0.astype(np.complex128).copy()

    n_tau = tau_steps.shape[0]
    i_rec = 0
    k = 0
    max_step = tau_steps[n_tau - 1]
    while True:
        while i_rec < n_tau and tau_steps[i_rec] == k:
            ov = (np.conj(psi0[0]) * psi[0] + np.conj(psi0[1]) * psi[1]
                  + np.conj(psi0[2]) * psi[2])
            out[i_rec] = abs(ov) ** 2
            i_rec += 1
        if k >= max_step:
            break
        tm = (k + 0.5) * dt
        _dressed_h(h, tm, om_d, om_b, delta, delta0, sign, d1, d2, db_path[k])
        _apply_step(h, dt, psi, w, v)
        k += 1
    nrm = abs(psi[0]) ** 2 + abs(psi[1]) ** 2 + abs(psi[2]) ** 2
    return abs(nrm - 1.0)


@njit(cache=True, nogil=True)
def fid_trial(db_path, dt, tau_steps, s_weight, out):
    """Bare-transition free-induction decay: ideal instantaneous preparation
    of (|0> + |t>)/sqrt(2), diagonal evolution, projection back.

    The accumulated relative phase is s_weight * sum(delta_b dt); the
    recorded signal is (1 + cos(phase))/2.
    """
    n_tau = tau_steps.shape[0]
    i_rec = 0
    k = 0
    max_step = tau_steps[n_tau - 1]
    phase = 0.0
    while True:
        while i_rec < n_tau and tau_steps[i_rec] == k:
            out[i_rec] = 0.5 * (1.0 + np.cos(phase))
            i_rec += 1
        if k >= max_step:
            break
        phase += s_weight * db_path[k] * dt
        k += 1
    return 0.0


@njit(cache=True, nogil=True)
def rabi_trial(rabi, d_drive, db_path, dt, tau_steps, db_sign, out):
    """Bare Rabi drive of one transition in its rotating frame.

    Two-level block (0, target): coupling rabi*(1+d_drive), target level
    shifted by db_sign * delta_b(t); records the target population.
    """
    g = rabi * (1.0 + d_drive)
    a0 = 1.0 + 0j  # |0>
    a1 = 0.0 + 0j  # target level
    n_tau = tau_steps.shape[0]
    i_rec = 0
    k = 0
    max_step = tau_steps[n_tau - 1]
    while True:
        while i_rec < n_tau and tau_steps[i_rec] == k:
            out[i_rec] = abs(a1) ** 2
            i_rec += 1
        if k >= max_step:
            break
        eps = db_sign * db_path[k]
        # exact 2x2 step for H = [[0, g], [g, eps]]
        mean = eps / 2.0
        om = np.sqrt(g * g + mean * mean)
        cw = np.cos(om * dt)
        sw = np.sin(om * dt) / om if om > 0.0 else dt
        ph = np.exp(-1j * mean * dt)
        b0 = ph * ((cw + 1j * mean * sw) * a0 - 1j * g * sw * a1)
        b1 = ph * (-1j * g * sw * a0 + (cw - 1j * mean * sw) * a1)
        a0 = b0
        a1 = b1
        k += 1
    nrm = abs(a0) ** 2 + abs(a1) ** 2
    return abs(nrm - 1.0)


@njit(cache=True, nogil=True)
def lab_trial(rabi1, rabi2, delta, delta0, omega1, omega2, s1, s2,
              d1, d2, db_path, dt, record_every, out_pops):
    """Lab-frame four-tone propagation from |0>, recording bare populations."""
    h = np.zeros((3, 3), dtype=np.complex128)
    w = np.empty(3)
    v = np.empty((3, 3), dtype=np.complex128)
    psi = np.zeros(3, dtype=np.complex128)
    psi[1] = 1.0
    a1 = 2.0 * rabi1 * (1.0 + d1)
    a2 = 2.0 * rabi2 * (1.0 + d2)
    w1r = omega1 - delta0
    w2r = omega2 - delta0
    n = db_path.shape[0]
    i_rec = 0
    for k in range(n):
        if k % record_every == 0:
            out_pops[i_rec, 0] = abs(psi[0]) ** 2
            out_pops[i_rec, 1] = abs(psi[1]) ** 2
            out_pops[i_rec, 2] = abs(psi[2]) ** 2
            i_rec += 1
        tm = (k + 0.5) * dt
        c_m1 = s1 * a1 * np.cos(w1r * tm) + a2 * np.cos((w1r + delta) * tm)
        c_p1 = s2 * a1 * np.cos(w2r * tm) + a2 * np.cos((w2r + delta) * tm)
        db = db_path[k]
        h[0, 0] = omega1 - db
        h[1, 1] = 0.0
        h[2, 2] = omega2 + db
        h[1, 0] = c_m1
        h[0, 1] = c_m1
        h[1, 2] = c_p1
        h[2, 1] = c_p1
        h[0, 2] = 0.0
        h[2, 0] = 0.0
        _apply_step(h, dt, psi, w, v)
    nrm = abs(psi[0]) ** 2 + abs(psi[1]) ** 2 + abs(psi[2]) ** 2
    return abs(nrm - 1.0)
