"""Quantum Fisher information and symmetric logarithmic derivatives of Gaussian states.

The generic route solves against ``M = Sigma (x) Sigma + (Omega (x) Omega)/4``
(a ``4n^2 x 4n^2`` system) with finite-difference derivatives of the covariance.
The closed forms for the two-telescope family serve as its regression oracle.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .gaussian import GaussianState, ModeTransform, symplectic_form
from .scene import SceneParams, phases_from_positions

FD_STEP = 1e-5
COND_LIMIT = 1e12
SLD_SINGULAR_TOL = 1e-8


class SingularMetricError(np.linalg.LinAlgError):
    """The metric M is singular, typically because some mode is exactly in vacuum."""


@dataclass(frozen=True)
class QuadraticObservable:
    """Operator ``sum_{g,k} coeff[g,k] a_g a_k + constant`` with symmetric ``coeff``.

    For symmetric coefficients the operator equals the symmetrically ordered
    form, so the expectation value in a zero-mean state is ``sum(coeff*Sigma) + constant``.
    """

    coeff: np.ndarray
    constant: float

    @classmethod
    def from_terms(cls, coeff, constant=0.0) -> "QuadraticObservable":
        """Symmetrize an arbitrarily ordered coefficient matrix, moving commutators into the constant."""
        coeff = np.asarray(coeff, dtype=complex)
        omega = symplectic_form(coeff.shape[0] // 2)
        sym = 0.5 * (coeff + coeff.T)
        shift = 0.5 * np.sum(coeff * omega)
        return cls(sym, complex(constant + shift).real)

    def expectation(self, state: GaussianState) -> complex:
        m = state.mean
        return np.sum(self.coeff * state.cov) + m @ self.coeff @ m + self.constant

    def second_moment(self, state: GaussianState) -> complex:
        """``<O^2>`` for a zero-mean Gaussian state, by Wick contraction."""
        if np.any(state.mean != 0):
            raise NotImplementedError("Wick evaluation is implemented for zero-mean states")
        G = state.moment_matrix()
        K = self.coeff
        first = np.sum(K * G)
        # <a_g a_k a_m a_n> = G_gk G_mn + G_gm G_kn + G_gn G_km
        pairs = np.einsum("gk,mn,gm,kn->", K, K, G, G) + np.einsum("gk,mn,gn,km->", K, K, G, G)
        c = self.constant
        return first**2 + pairs + 2 * c * first + c**2

    def in_basis(self, t: ModeTransform) -> "QuadraticObservable":
        """Rewrite in terms of ``d = U a``: coefficients become ``S^{-T} K S^{-1}``."""
        Sinv = np.linalg.inv(t.ladder_matrix())
        return QuadraticObservable(Sinv.T @ self.coeff @ Sinv, self.constant)


def metric(cov: np.ndarray) -> np.ndarray:
    omega = symplectic_form(cov.shape[0] // 2)
    return np.kron(cov, cov) + 0.25 * np.kron(omega, omega)


def _solve_metric(cov, rhs):
    M = metric(cov)
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularMetricError(
            f"metric is singular (cond={cond:.3g}); add a thermal floor to vacuum modes"
        )
    return np.linalg.solve(M, rhs)


def qfi_from_derivatives(state: GaussianState, dcovs: Sequence[np.ndarray], dmeans=None) -> np.ndarray:
    """QFI matrix from covariance (and optional mean) derivatives at a fixed state."""
    dim = state.cov.shape[0]
    D = np.stack([np.asarray(d).reshape(dim * dim) for d in dcovs], axis=1)
    X = _solve_metric(state.cov, D)
    F = 0.5 * (D.T @ X)
    if dmeans is not None:
        L = np.stack(dmeans, axis=1)
        F = F + L.T @ np.linalg.solve(state.cov, L)
    if np.abs(F.imag).max() > 1e-8 * max(1.0, np.abs(F.real).max()):
        raise ArithmeticError("QFI came out complex; covariance derivatives break the ladder structure")
    F = F.real
    return 0.5 * (F + F.T)


def covariance_derivatives(state_at: Callable, params, step: float):
    """Central differences of the covariance and mean with respect to each parameter."""
    params = np.asarray(params, dtype=float)
    dcovs, dmeans = [], []
    for i in range(params.size):
        e = np.zeros_like(params)
        e[i] = step
        hi, lo = state_at(params + e), state_at(params - e)
        dcovs.append((hi.cov - lo.cov) / (2 * step))
        dmeans.append((hi.mean - lo.mean) / (2 * step))
    return dcovs, dmeans


def qfi_numeric(state_at: Callable, params, step: float = FD_STEP) -> np.ndarray:
    """QFI matrix of the family ``state_at(params)`` by the generic Gaussian formula."""
    state = state_at(np.asarray(params, dtype=float))
    dcovs, dmeans = covariance_derivatives(state_at, params, step)
    if all(not np.any(dm) for dm in dmeans):
        dmeans = None
    return qfi_from_derivatives(state, dcovs, dmeans)


def sld_numeric(state: GaussianState, dSigma) -> QuadraticObservable:
    """SLD ``(1/2) M^{-1} dSigma`` contracted with ``a_g a_k - Sigma_gk``."""
    dSigma = np.asarray(dSigma, dtype=complex)
    dim = state.cov.shape[0]
    if not np.any(dSigma):
        return QuadraticObservable(np.zeros((dim, dim), dtype=complex), 0.0)
    K = 0.5 * _solve_metric(state.cov, dSigma.reshape(dim * dim)).reshape(dim, dim)
    K = 0.5 * (K + K.T)
    return QuadraticObservable(K, -np.sum(K * state.cov).real)


# -- closed forms for the two-telescope family ------------------------------------------


def _strength_and_dphi(scene: SceneParams):
    ph = phases_from_positions(scene)
    return scene.strength, ph.dphi, ph


def qfi_separation(strength, dphi, u0=1.0):
    """Separation QFI as a function of strength and phase difference."""
    e = strength
    c = np.cos(dphi)
    num = e * (1 + 3 * e + e * c)
    den = -1 - 2 * e * (2 + e) + 2 * e**2 * c
    return -(u0**2) * num / den


def qfi_centroid(strength, dphi, u0=1.0):
    e = strength
    c = np.cos(dphi)
    # 1 + cos(dphi) written as 2 cos^2(dphi/2): no cancellation near dphi = pi
    return -2 * u0**2 * e * (2 * np.cos(0.5 * dphi) ** 2) / (-1 - e + e * c)


def qfi_separation_closed(scene: SceneParams) -> float:
    e, dphi, _ = _strength_and_dphi(scene)
    return float(qfi_separation(e, dphi, scene.u0))


def qfi_centroid_closed(scene: SceneParams) -> float:
    e, dphi, _ = _strength_and_dphi(scene)
    return float(qfi_centroid(e, dphi, scene.u0))


def sld_separation_coeffs(scene: SceneParams):
    """Coefficients ``(l1, l2, C)`` of ``2 l1 (n_1 + n_2) + 2 l2 a1 a2^dag + 2 l2* a1^dag a2 + C``."""
    e, dphi, ph = _strength_and_dphi(scene)
    half = 0.5 * dphi
    if abs(np.sin(half)) < SLD_SINGULAR_TOL:
        raise ZeroDivisionError("separation SLD coefficients diverge at dphi = 0 mod 2pi")
    u0, c = scene.u0, np.cos(dphi)
    den = -1 - 2 * e * (2 + e) + 2 * e**2 * c
    # sign fixed by d<O>/d(x1 - x2) = <{L, O}>/2 for quadratic O
    l1 = -u0 * (1 + 4 * e) / np.tan(half) / (4 * den)
    l2 = u0 * np.exp(-0.5j * (ph.phi1 + ph.phi2)) * (1 + 3 * e + e * c) / np.sin(half) / (4 * den)
    s = np.exp(1j * ph.phi1) + np.exp(1j * ph.phi2)
    C = -e * (8 * l1 + 2 * l2 * s + 2 * np.conj(l2) * np.conj(s))
    return float(l1), complex(l2), float(C.real)


def sld_centroid_coeffs(scene: SceneParams):
    """Coefficients ``(l3, C)`` of ``2 l3 a1 a2^dag + 2 l3* a1^dag a2 + C``."""
    e, dphi, ph = _strength_and_dphi(scene)
    s = np.exp(1j * ph.phi1) + np.exp(1j * ph.phi2)
    l3 = 1j * scene.u0 * np.conj(s) / (-4 - 4 * e + 4 * e * np.cos(dphi))
    C = -e * (2 * l3 * s + 2 * np.conj(l3) * np.conj(s))
    return complex(l3), float(C.real)


def separation_observable(scene: SceneParams) -> QuadraticObservable:
    l1, l2, C = sld_separation_coeffs(scene)
    K = np.zeros((4, 4), dtype=complex)
    # 2 l1 a_i^dag a_i, 2 l2 a1 a2^dag, 2 l2* a1^dag a2
    K[1, 0] = K[3, 2] = 2 * l1
    K[0, 3] = 2 * l2
    K[1, 2] = 2 * np.conj(l2)
    return QuadraticObservable.from_terms(K, C)


def centroid_observable(scene: SceneParams) -> QuadraticObservable:
    l3, C = sld_centroid_coeffs(scene)
    K = np.zeros((4, 4), dtype=complex)
    K[0, 3] = 2 * l3
    K[1, 2] = 2 * np.conj(l3)
    return QuadraticObservable.from_terms(K, C)


def optimal_delay(scene: SceneParams, which: str = "separation") -> float:
    ph = phases_from_positions(scene)
    if which == "separation":
        delta = ph.centroid_phase
    elif which == "centroid":
        delta = ph.centroid_phase - 0.5 * np.pi
    else:
        raise ValueError(f"which must be 'separation' or 'centroid', got {which!r}")
    return float(np.mod(delta, 2 * np.pi))


def two_telescope_family(scene: SceneParams):
    """``(theta1, theta2) -> GaussianState`` at the scene's strength and baseline."""
    from .gaussian import two_telescope_state

    def state_at(params):
        return two_telescope_state(scene.with_centroid_separation(params[0], params[1]))

    return state_at


def two_telescope_qfi(scene: SceneParams, step: float = FD_STEP) -> np.ndarray:
    """Numeric QFI over (centroid, separation); ``step`` is in phase units."""
    params = np.array([scene.centroid, scene.separation])
    return qfi_numeric(two_telescope_family(scene), params, step / scene.u0)
