"""Shared test helpers: random draws and independent dense oracles."""

import numpy as np

from cdplift.diffraction import dft_vector


def unit_signal(rng, d):
    x = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return x / np.linalg.norm(x)


def random_hermitian(rng, d):
    Z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (Z + Z.conj().T) / 2


def random_tangent(rng, x):
    """A random element x z* + z x* of the tangent space at x x*."""
    z = rng.standard_normal(x.size) + 1j * rng.standard_normal(x.size)
    return np.outer(x, z.conj()) + np.outer(z, x.conj())


def dense_frame_element(eps_row, k):
    """F_{k,l} = D_l f_k f_k* D_l built with no FFT shortcuts."""
    u = eps_row * dft_vector(len(eps_row), k)
    return np.outer(u, u.conj())


def dense_apply_A(eps, Z):
    """tr(F_{k,l} Z) for every (l, k), flat row-major over l then k = 1..d."""
    L, d = eps.shape
    out = np.empty(L * d)
    for l in range(L):
        for k in range(1, d + 1):
            out[l * d + k - 1] = np.trace(dense_frame_element(eps[l], k) @ Z).real
    return out


def dense_apply_A_adjoint(eps, c):
    L, d = eps.shape
    out = np.zeros((d, d), dtype=complex)
    for l in range(L):
        for k in range(1, d + 1):
            out += c[l * d + k - 1] * dense_frame_element(eps[l], k)
    return (out + out.conj().T) / 2


def tangent_basis_gram_schmidt(x):
    """Orthonormal basis of {x z* + z x*} built by raw Gram-Schmidt.

    Deliberately avoids the package's QR-based construction: spans the same
    space, so projections must agree even if individual basis elements differ.
    """
    d = x.size
    candidates = []
    for j in range(d):
        e = np.zeros(d, dtype=complex)
        e[j] = 1.0
        candidates.append(np.outer(x, e.conj()) + np.outer(e, x.conj()))
        candidates.append(1j * np.outer(x, e.conj()) - 1j * np.outer(e, x.conj()))
    basis = []
    for cand in candidates:
        v = cand.astype(complex)
        for b in basis:
            v = v - np.trace(b.conj().T @ v) * b
        nrm = np.linalg.norm(v)
        if nrm > 1e-10:
            basis.append(v / nrm)
    assert len(basis) == 2 * d - 1
    return basis
