"""Brute-force Fock-space references that share no code with the package.

* ``mixture_covariance``: the coherent-state mixture over the two source
  amplitudes, integrated by Gauss-Hermite quadrature, with every state held as
  a truncated two-mode Fock vector and the ladder operators as matrices.
* ``passive_fock_unitary`` / ``aligned_counts``: a two-mode passive transform
  represented on fixed-total-photon-number subspaces, applied to a product of
  thermal states to produce photon-count statistics.
"""
import math

import numpy as np


def annihilation(cutoff):
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1)


def coherent_vector(beta, cutoff):
    k = np.arange(cutoff + 1)
    logfact = np.array([math.lgamma(j + 1) for j in k])
    beta = np.asarray(beta, dtype=complex)[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        amp = np.where(k == 0, 1.0, beta**k)
    return np.exp(-0.5 * np.abs(beta) ** 2) * amp / np.exp(0.5 * logfact)


def mixture_covariance(strength, phi1, phi2, cutoff=20, nodes=8):
    """Ladder-ordered covariance of the telescope modes from the Fock-space density matrix."""
    x, w = np.polynomial.hermite_e.hermegauss(nodes)
    w = w / w.sum()
    s = math.sqrt(strength / 2)
    grid = np.array(np.meshgrid(x, x, x, x, indexing="ij")).reshape(4, -1) * s
    weight = np.prod(np.array(np.meshgrid(w, w, w, w, indexing="ij")).reshape(4, -1), axis=0)
    a1 = grid[0] + 1j * grid[1]
    a2 = grid[2] + 1j * grid[3]
    tel1 = a1 + a2
    tel2 = a1 * np.exp(-1j * phi1) + a2 * np.exp(-1j * phi2)
    v1 = coherent_vector(tel1, cutoff)
    v2 = coherent_vector(tel2, cutoff)
    psi = (v1[:, :, None] * v2[:, None, :]).reshape(len(weight), -1)
    rho = (psi.T * weight) @ psi.conj()
    a = annihilation(cutoff)
    eye = np.eye(cutoff + 1)
    ops = [np.kron(a, eye), np.kron(a.T, eye), np.kron(eye, a), np.kron(eye, a.T)]
    cov = np.empty((4, 4), dtype=complex)
    for i, A in enumerate(ops):
        for j, B in enumerate(ops):
            cov[i, j] = 0.5 * np.trace(rho @ (A @ B + B @ A))
    return cov, float(np.trace(rho).real)


def passive_fock_unitary(W, total):
    """Matrix of the passive transform with output modes ``d = W a`` on the subspace m + n = total.

    Basis index ``j`` stands for ``|j, total - j>``.
    """
    W = np.asarray(W, dtype=complex)
    U = np.zeros((total + 1, total + 1), dtype=complex)
    for j in range(total + 1):
        k = total - j
        # (W11 a1^dag + W21 a2^dag)^j (W12 a1^dag + W22 a2^dag)^k |0> / sqrt(j! k!)
        coeff = np.zeros(total + 1, dtype=complex)  # by power of a1^dag
        for p in range(j + 1):
            for q in range(k + 1):
                coeff[p + q] += (math.comb(j, p) * W[0, 0] ** p * W[1, 0] ** (j - p)
                                 * math.comb(k, q) * W[0, 1] ** q * W[1, 1] ** (k - q))
        for s in range(total + 1):
            U[s, j] = coeff[s] * math.sqrt(math.factorial(s) * math.factorial(total - s)
                                           / (math.factorial(j) * math.factorial(k)))
    return U


def thermal_counts(cov, W_out, Mmax, Nmax, cutoff=25):
    """P(m, n) of the output modes ``d = W_out a`` for a zero-mean phase-insensitive two-mode state."""
    C = cov[1::2, 0::2] - 0.5 * np.eye(2)  # <a_i^dag a_j>
    lam, V = np.linalg.eigh(C)
    # state = passive transform conj(V) of two independent thermal modes
    X = np.asarray(W_out) @ V.conj()
    lam = np.clip(lam, 0, None)
    P = np.zeros((Mmax + 1, Nmax + 1))
    for total in range(cutoff + 1):
        j = np.arange(total + 1)
        pin = lam[0] ** j / (1 + lam[0]) ** (j + 1) * lam[1] ** (total - j) / (1 + lam[1]) ** (total - j + 1)
        U = passive_fock_unitary(X, total)
        pout = np.abs(U) ** 2 @ pin
        for m in range(total + 1):
            n = total - m
            if m <= Mmax and n <= Nmax:
                P[m, n] = pout[m]
    return P


def beam_splitter(delta):
    e = np.exp(1j * delta)
    return np.array([[1, e], [1, -e]]) / math.sqrt(2)
