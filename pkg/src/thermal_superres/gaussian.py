"""Zero-mean bosonic Gaussian states in ladder-operator ordering.

The operator vector is ``(a1, a1^dag, a2, a2^dag, ...)`` and the covariance is
``Sigma_{mu nu} = <a_mu a_nu + a_nu a_mu>/2`` (complex, symmetric, no
conjugation). Passive transforms ``d = U a`` act as ``Sigma -> S Sigma S^T``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scene import SceneParams, phases_from_positions

PHYSICALITY_FLOOR = -1e-10


def symplectic_form(n_modes: int) -> np.ndarray:
    """Commutator matrix ``Omega_{mu nu} = [a_mu, a_nu]`` = direct sum of i*sigma_y."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def dagger_swap(n_modes: int) -> np.ndarray:
    """Permutation sending the ordering (a, a^dag) to (a^dag, a) in each mode."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [1.0, 0.0]]))


@dataclass(frozen=True)
class GaussianState:
    n_modes: int
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        dim = 2 * self.n_modes
        if self.mean.shape != (dim,) or self.cov.shape != (dim, dim):
            raise ValueError(
                f"expected mean ({dim},) and cov ({dim}, {dim}), got {self.mean.shape} and {self.cov.shape}"
            )

    @classmethod
    def vacuum(cls, n_modes: int) -> "GaussianState":
        return cls.from_cov(0.5 * dagger_swap(n_modes).astype(complex))

    @classmethod
    def from_cov(cls, cov) -> "GaussianState":
        cov = np.asarray(cov, dtype=complex)
        return cls(cov.shape[0] // 2, np.zeros(cov.shape[0], dtype=complex), cov)

    def moment_matrix(self) -> np.ndarray:
        """Ordered second moments ``<a_mu a_nu>`` (zero-mean part)."""
        return self.cov + 0.5 * symplectic_form(self.n_modes)


@dataclass(frozen=True)
class ModeTransform:
    U: np.ndarray

    def __post_init__(self):
        U = np.asarray(self.U, dtype=complex)
        if U.ndim != 2 or U.shape[0] != U.shape[1]:
            raise ValueError("mode transform must be a square matrix")
        if not np.allclose(U.conj().T @ U, np.eye(U.shape[0]), atol=1e-12, rtol=0):
            raise ValueError("mode transform is not unitary")
        object.__setattr__(self, "U", U)

    @property
    def n_modes(self) -> int:
        return self.U.shape[0]

    def ladder_matrix(self) -> np.ndarray:
        """Action on the ladder vector: a_i -> U_ij a_j and a_i^dag -> conj(U_ij) a_j^dag."""
        n = self.n_modes
        S = np.zeros((2 * n, 2 * n), dtype=complex)
        S[0::2, 0::2] = self.U
        S[1::2, 1::2] = self.U.conj()
        return S

    @classmethod
    def beam_splitter(cls, delta: float) -> "ModeTransform":
        """``d1 = (a1 + e^{i delta} a2)/sqrt2``, ``d2 = (a1 - e^{i delta} a2)/sqrt2``."""
        e = np.exp(1j * delta)
        return cls(np.array([[1.0, e], [1.0, -e]]) / np.sqrt(2.0))


def two_telescope_state(scene: SceneParams) -> GaussianState:
    """Covariance of the light collected by the two telescopes.

    Diagonal blocks carry ``p = 2 eta nbar + 1/2``, the cross blocks carry
    ``q = (e^{i phi1} + e^{i phi2}) eta nbar``.
    """
    ph = phases_from_positions(scene)
    eps = scene.strength
    return state_from_phases(eps, ph.phi1, ph.phi2)


def state_from_phases(strength, phi1, phi2) -> GaussianState:
    p = 2.0 * strength + 0.5
    # e^{i phi1} + e^{i phi2} in product form keeps relative precision near dphi = pi
    q = 2 * strength * np.cos(0.5 * (phi1 - phi2)) * np.exp(0.5j * (phi1 + phi2))
    qc = np.conj(q)
    cov = np.array(
        [
            [0, p, 0, q],
            [p, 0, qc, 0],
            [0, qc, 0, p],
            [q, 0, p, 0],
        ],
        dtype=complex,
    )
    return GaussianState.from_cov(cov)


def apply_transform(state: GaussianState, t: ModeTransform) -> GaussianState:
    if t.n_modes != state.n_modes:
        raise ValueError(f"transform acts on {t.n_modes} modes, state has {state.n_modes}")
    S = t.ladder_matrix()
    return GaussianState(state.n_modes, S @ state.mean, S @ state.cov @ S.T)


def physicality_matrix(state: GaussianState) -> np.ndarray:
    """Hermitian matrix ``<A_mu^dag A_nu>`` whose positivity is the uncertainty principle.

    In ladder ordering ``Sigma + Omega/2`` is the ordered moment matrix; row-swapping
    each (a, a^dag) pair turns it into the Gram matrix of the operators a_mu.
    """
    G = dagger_swap(state.n_modes) @ state.moment_matrix()
    return 0.5 * (G + G.conj().T)


def physicality_check(state: GaussianState) -> bool:
    return bool(np.linalg.eigvalsh(physicality_matrix(state)).min() >= PHYSICALITY_FLOOR)


def mode_occupations(state: GaussianState) -> np.ndarray:
    """Mean photon numbers <a_i^dag a_i>."""
    idx = np.arange(state.n_modes)
    return state.cov[2 * idx, 2 * idx + 1].real - 0.5 + np.abs(state.mean[2 * idx]) ** 2
