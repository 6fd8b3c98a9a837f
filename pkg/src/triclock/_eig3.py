"""Closed-form eigensolver for 3x3 complex Hermitian matrices.

Eigenvalues via the trigonometric (Cardano) solution of the characteristic
cubic; eigenvectors from cross products of rows of (H - w I), which span the
null space for a rank-2 shifted matrix.  Near-degenerate spectra (relative
gap below GAP_TOL) fall back to a cyclic complex Jacobi iteration, avoiding
the catastrophic cancellation of the cross-product route.  A final
Gram-Schmidt pass in index order makes the basis orthonormal and
deterministic.

Everything here is numba-compiled; the time-stepping kernels call eigh3
directly with preallocated buffers.
"""
import numpy as np
from numba import njit

GAP_TOL = 1e-8
JACOBI_SWEEPS = 40


@njit(cache=True, nogil=True)
def _jacobi3(h, w, v):
    """Cyclic complex Jacobi diagonalization; fills w (unsorted) and v."""
    a = h.copy()
    for i in range(3):
        for j in range(3):
            v[i, j] = 1.0 + 0j if i == j else 0.0 + 0j
    scale = 0.0
    for i in range(3):
        for j in range(3):
            m = abs(a[i, j])
            if m > scale:
                scale = m
    if scale == 0.0:
        for i in range(3):
            w[i] = 0.0
        return
    for _ in range(JACOBI_SWEEPS):
        off = abs(a[0, 1]) + abs(a[0, 2]) + abs(a[1, 2])
        if off < 1e-15 * scale:
            break
        for p in range(2):
            for q in range(p + 1, 3):
                apq = a[p, q]
                if abs(apq) < 1e-18 * scale:
                    continue
                phase = apq / abs(apq)
                theta = 0.5 * np.arctan2(2.0 * abs(apq), (a[p, p] - a[q, q]).real)
                c = np.cos(theta)
                s = np.sin(theta) * phase
                # A <- J^dag A J with J acting on the (p, q) plane
                for k in range(3):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp + np.conj(s) * akq
                    a[k, q] = -s * akp + c * akq
                for k in range(3):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk + s * aqk
                    a[q, k] = -np.conj(s) * apk + c * aqk
                for k in range(3):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp + np.conj(s) * vkq
                    v[k, q] = -s * vkp + c * vkq
    for i in range(3):
        w[i] = a[i, i].real


@njit(cache=True, nogil=True)
def _sort3(w, v):
    """Sort eigenvalues ascending, permuting eigenvector columns along."""
    for i in range(2):
        for j in range(i + 1, 3):
            if w[j] < w[i]:
                w[i], w[j] = w[j], w[i]
                for k in range(3):
                    tmp = v[k, i]
                    v[k, i] = v[k, j]
                    v[k, j] = tmp


@njit(cache=True, nogil=True)
def _gram_schmidt3(v):
    for k in range(3):
        for m in range(k):
            ov = (np.conj(v[0, m]) * v[0, k] + np.conj(v[1, m]) * v[1, k]
                  + np.conj(v[2, m]) * v[2, k])
            v[0, k] -= ov * v[0, m]
            v[1, k] -= ov * v[1, m]
            v[2, k] -= ov * v[2, m]
        nrm = np.sqrt(abs(v[0, k]) ** 2 + abs(v[1, k]) ** 2 + abs(v[2, k]) ** 2)
        v[0, k] /= nrm
        v[1, k] /= nrm
        v[2, k] /= nrm


@njit(cache=True, nogil=True)
def eigh3(h, w, v):
    """Eigendecomposition of a 3x3 Hermitian matrix into (w ascending, v columns).

    h is read only; w (float64[3]) and v (complex128[3,3]) are overwritten.
    """
    h00 = h[0, 0].real
    h11 = h[1, 1].real
    h22 = h[2, 2].real
    q = (h00 + h11 + h22) / 3.0
    p1 = abs(h[0, 1]) ** 2 + abs(h[0, 2]) ** 2 + abs(h[1, 2]) ** 2
    d0 = h00 - q
    d1 = h11 - q
    d2 = h22 - q
    p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * p1
    scale = max(abs(h00), abs(h11), abs(h22), np.sqrt(p1))
    if p2 <= 1e-30 * (scale * scale + 1e-300):
        # H is (numerically) a multiple of the identity
        w[0] = q
        w[1] = q
        w[2] = q
        for i in range(3):
            for j in range(3):
                v[i, j] = 1.0 + 0j if i == j else 0.0 + 0j
        return
    p = np.sqrt(p2 / 6.0)
    # det((H - q I) / p) for the Hermitian layout
    b00 = d0 / p
    b11 = d1 / p
    b22 = d2 / p
    b01 = h[0, 1] / p
    b02 = h[0, 2] / p
    b12 = h[1, 2] / p
    detb = (b00 * (b11 * b22 - abs(b12) ** 2) - abs(b01) ** 2 * b22
            + 2.0 * (b01 * b12 * np.conj(b02)).real - abs(b02) ** 2 * b11)
    r = detb / 2.0
    if r < -1.0:
        r = -1.0
    elif r > 1.0:
        r = 1.0
    phi = np.arccos(r) / 3.0
    w[2] = q + 2.0 * p * np.cos(phi)
    w[0] = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    w[1] = 3.0 * q - w[0] - w[2]
    _sort3_values(w)

    gap = min(w[1] - w[0], w[2] - w[1])
    if gap < GAP_TOL * max(scale, 1e-300):
        _jacobi3(h, w, v)
        _sort3(w, v)
        _gram_schmidt3(v)
        return

    for k in range(3):
        wk = w[k]
        # rows of (H - wk I)
        r00 = h[0, 0] - wk
        r11 = h[1, 1] - wk
        r22 = h[2, 2] - wk
        # candidate null vectors: cross products of row pairs
        best = -1.0
        bv0 = 0j
        bv1 = 0j
        bv2 = 0j
        for pair in range(3):
            if pair == 0:
                a0, a1, a2 = r00, h[0, 1], h[0, 2]
                b0, b1, b2 = h[1, 0], r11, h[1, 2]
            elif pair == 1:
                a0, a1, a2 = h[0, 0] - wk, h[0, 1], h[0, 2]
                b0, b1, b2 = h[2, 0], h[2, 1], r22
            else:
                a0, a1, a2 = h[1, 0], r11, h[1, 2]
                b0, b1, b2 = h[2, 0], h[2, 1], r22
            c0 = a1 * b2 - a2 * b1
            c1 = a2 * b0 - a0 * b2
            c2 = a0 * b1 - a1 * b0
            n = abs(c0) ** 2 + abs(c1) ** 2 + abs(c2) ** 2
            if n > best:
                best = n
                bv0, bv1, bv2 = c0, c1, c2
        nrm = np.sqrt(best)
        if nrm < 1e-14 * scale * scale:
            _jacobi3(h, w, v)
            _sort3(w, v)
            _gram_schmidt3(v)
            return
        v[0, k] = bv0 / nrm
        v[1, k] = bv1 / nrm
        v[2, k] = bv2 / nrm
    _gram_schmidt3(v)


@njit(cache=True, nogil=True)
def _sort3_values(w):
    for i in range(2):
        for j in range(i + 1, 3):
            if w[j] < w[i]:
                w[i], w[j] = w[j], w[i]


def eig3_herm(h):
    """Allocate-and-solve wrapper around eigh3."""
    w = np.empty(3)
    v = np.empty((3, 3), dtype=np.complex128)
    eigh3(np.ascontiguousarray(h, dtype=np.complex128), w, v)
    return w, v
