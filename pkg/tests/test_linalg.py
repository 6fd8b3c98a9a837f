import numpy as np
import pytest

from triclock import (NonHermitianError, State3, Unitary3, hermitian_eig,
                      lambda_basis_transform, dressed_basis_transform,
                      step_propagator)
from triclock.linalg import BASES

from conftest import MHZ, assert_unitary, coupling_config, random_hermitian

SQRT2 = np.sqrt(2.0)


def taylor_expm(m, cutoff=1e-14):
    """Scaling-and-squaring Taylor-series exponential (independent oracle)."""
    norm = np.linalg.norm(m)
    squarings = max(0, int(np.ceil(np.log2(max(norm, 1e-300)))) + 2)
    a = m / (2 ** squarings)
    out = np.eye(3, dtype=complex)
    term = np.eye(3, dtype=complex)
    k = 0
    while np.linalg.norm(term) > cutoff * max(np.linalg.norm(out), 1.0):
        k += 1
        term = term @ a / k
        out = out + term
        if k > 200:
            break
    for _ in range(squarings):
        out = out @ out
    return out


class TestBasisTransforms:
    def test_lambda_on_plus_one(self):
        plus = State3([0, 0, 1], "bare")
        out = lambda_basis_transform().apply(plus)
        # |+1> = (|B> + |D>)/sqrt(2)
        np.testing.assert_allclose(out.amplitudes, [0, 1 / SQRT2, 1 / SQRT2],
                                   atol=1e-15)

    def test_lambda_on_zero(self):
        zero = State3([0, 1, 0], "bare")
        out = lambda_basis_transform().apply(zero)
        np.testing.assert_allclose(out.amplitudes, [1, 0, 0], atol=1e-15)

    def test_lambda_conjugates_sz_to_bright_dark_coupling(self):
        sz = np.diag([-1.0, 0.0, 1.0])
        out = lambda_basis_transform().conjugate_operator(sz)
        expected = np.zeros((3, 3))
        expected[1, 2] = expected[2, 1] = 1.0
        np.testing.assert_allclose(out, expected, atol=1e-15)

    def test_dressed_on_dark_state(self):
        dark = State3([0, 0, 1], "lambda")
        out = dressed_basis_transform().apply(dark)
        np.testing.assert_allclose(out.amplitudes, [1 / SQRT2, 0, -1 / SQRT2],
                                   atol=1e-15)

    def test_dressed_diagonalizes_resonant_coupling(self):
        # sqrt(2)*rabi1 (|0><D| + |D><0|) -> diag(+coupling, 0, -coupling)
        g = MHZ * 3.0
        h = np.zeros((3, 3), dtype=complex)
        h[0, 2] = h[2, 0] = g
        out = dressed_basis_transform().conjugate_operator(h)
        np.testing.assert_allclose(out, np.diag([g, 0.0, -g]), atol=1e-6)

    def test_bright_state_untouched(self):
        bright = State3([0, 1, 0], "lambda")
        out = dressed_basis_transform().apply(bright)
        np.testing.assert_allclose(out.amplitudes, [0, 1, 0], atol=1e-15)

    def test_round_trip(self):
        rng = np.random.default_rng(5)
        for t in (lambda_basis_transform(), dressed_basis_transform()):
            for _ in range(20):
                vec = rng.standard_normal(3) + 1j * rng.standard_normal(3)
                psi = State3.normalized(vec, t.source)
                back = t.inverse().apply(t.apply(psi))
                np.testing.assert_allclose(back.amplitudes, psi.amplitudes,
                                           atol=1e-12)

    def test_basis_labels(self):
        assert BASES["bare"] == ("-1", "0", "+1")
        assert BASES["dressed"] == ("u", "B", "d")

    def test_state_norm_enforced(self):
        with pytest.raises(ValueError):
            State3([1.0, 1.0, 0.0], "bare")

    def test_unitary_validated(self):
        with pytest.raises(ValueError):
            Unitary3(np.diag([1.0, 2.0, 1.0]), "bare", "bare")


class TestStepPropagator:
    def test_zero_hamiltonian(self):
        u = step_propagator(np.zeros((3, 3)), dt=1e-6)
        np.testing.assert_allclose(u, np.eye(3), atol=1e-15)

    def test_diagonal_case(self):
        e = np.array([1.0, -2.0, 3.0]) * MHZ
        dt = 37e-9
        u = step_propagator(np.diag(e), dt)
        np.testing.assert_allclose(u, np.diag(np.exp(-1j * e * dt)), atol=1e-12)

    def test_matches_taylor_series_oracle(self):
        rng = np.random.default_rng(11)
        dt = 1e-9
        for _ in range(40):
            h = random_hermitian(rng, scale=MHZ * 5.0)
            u = step_propagator(h, dt)
            oracle = taylor_expm(-1j * h * dt)
            assert np.max(np.abs(u - oracle)) < 1e-10

    def test_unitarity_sweep(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            h = random_hermitian(rng, scale=MHZ * rng.uniform(0.1, 20.0))
            u = step_propagator(h, dt=rng.uniform(1e-10, 1e-6))
            assert_unitary(u, atol=1e-10)

    def test_norm_preservation(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            h = random_hermitian(rng, scale=MHZ)
            u = step_propagator(h, dt=5e-8)
            psi = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            psi /= np.linalg.norm(psi)
            assert abs(np.linalg.norm(u @ psi) - 1.0) < 1e-10

    def test_composition(self):
        rng = np.random.default_rng(14)
        h = random_hermitian(rng, scale=MHZ * 2.0)
        a, b = 7.3e-8, 2.9e-8
        u_ab = step_propagator(h, a + b)
        u_comp = step_propagator(h, a) @ step_propagator(h, b)
        assert np.max(np.abs(u_ab - u_comp)) < 1e-9

    def test_rejects_non_hermitian(self):
        m = np.zeros((3, 3), dtype=complex)
        m[0, 1] = 1.0
        with pytest.raises(NonHermitianError):
            step_propagator(m, 1e-9)

    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError):
            step_propagator(np.eye(3), 0.0)


class TestHermitianEig:
    def test_identity(self):
        w, _ = hermitian_eig(np.eye(3))
        np.testing.assert_allclose(w, [1.0, 1.0, 1.0], atol=1e-14)

    def test_decoupled_dressed_hamiltonian(self):
        # bright drive off: eigenvalues (-delta, -omega_d, +omega_d), delta largest
        from triclock import dressed_hamiltonian
        cfg = coupling_config(6.0, 0.0, 19.0)
        w, _ = hermitian_eig(dressed_hamiltonian(cfg))
        expected = np.sort([cfg.omega_d, -cfg.omega_d, -cfg.delta])
        np.testing.assert_allclose(w, expected, rtol=1e-12)

    def test_against_characteristic_polynomial_roots(self):
        # cubic-formula oracle via the characteristic polynomial
        from triclock import dressed_hamiltonian
        cfg = coupling_config(6.0, 6.0, 19.35)
        h = dressed_hamiltonian(cfg)
        w, _ = hermitian_eig(h)
        coeffs = np.poly(h)  # characteristic polynomial coefficients
        roots = np.sort(np.roots(coeffs).real)
        np.testing.assert_allclose(w, roots, rtol=1e-9)

    def test_reconstruction_and_orthonormality(self):
        rng = np.random.default_rng(21)
        for _ in range(200):
            h = random_hermitian(rng, scale=MHZ * rng.uniform(0.01, 30.0))
            w, v = hermitian_eig(h)
            assert np.all(np.diff(w) >= 0)
            assert np.max(np.abs(v.conj().T @ v - np.eye(3))) < 1e-10
            rec = (v * w) @ v.conj().T
            assert np.linalg.norm(rec - h) < 1e-9 * max(np.linalg.norm(h), 1e-30)

    def test_degenerate_spectrum_accepted(self):
        h = np.diag([1.0, 1.0, 2.0]).astype(complex)
        rng = np.random.default_rng(3)
        q, _ = np.linalg.qr(rng.standard_normal((3, 3))
                            + 1j * rng.standard_normal((3, 3)))
        hr = q @ h @ q.conj().T
        hr = (hr + hr.conj().T) / 2
        w, v = hermitian_eig(hr)
        np.testing.assert_allclose(w, [1.0, 1.0, 2.0], atol=1e-12)
        assert np.max(np.abs(v.conj().T @ v - np.eye(3))) < 1e-10
        rec = (v * w) @ v.conj().T
        assert np.linalg.norm(rec - hr) < 1e-9 * np.linalg.norm(hr)

    def test_near_degenerate_gap(self):
        rng = np.random.default_rng(4)
        for eps in (1e-7, 1e-9, 1e-11):
            h = np.diag([1.0, 1.0 + eps, 2.0]).astype(complex)
            q, _ = np.linalg.qr(rng.standard_normal((3, 3))
                                + 1j * rng.standard_normal((3, 3)))
            hr = q @ h @ q.conj().T
            hr = (hr + hr.conj().T) / 2
            w, v = hermitian_eig(hr)
            assert np.max(np.abs(v.conj().T @ v - np.eye(3))) < 1e-10
            rec = (v * w) @ v.conj().T
            assert np.linalg.norm(rec - hr) < 1e-9 * np.linalg.norm(hr)
