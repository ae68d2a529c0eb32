"""Beam-splitter + photon-number-resolving measurement: outcome statistics and Fisher information.

Two routes to the distribution of counts ``(m, n)`` in the output modes
``d1, d2``:

* ``aligned_pmn``: at the optimal delay the output modes are independent
  thermal modes, so ``P(m, n)`` is a product of Bose-Einstein laws.
* ``misaligned_pmn``: for an arbitrary delay, the coherent-state mixture is
  integrated numerically, with Gauss-Legendre nodes over the two amplitudes
  and a periodic trapezoid rule over their relative phase.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .fisher import qfi_separation
from .scene import SceneParams, phases_from_positions

CUTOFF_TAIL = 1e-12


class ConvergenceError(RuntimeError):
    """Quadrature did not reach the requested accuracy."""


@dataclass(frozen=True)
class IntegrationConfig:
    b: float | None = None
    radial_nodes: int = 64
    phase_nodes: int = 128
    fd_step: float = 1e-5
    prob_floor: float = 1e-15
    check_convergence: bool = True
    convergence_tol: float = 1e-6

    def __post_init__(self):
        if self.b is not None and self.b <= 0:
            raise ValueError("amplitude cutoff b must be positive")
        if self.radial_nodes < 8 or self.phase_nodes < 8:
            raise ValueError("node counts must be at least 8")
        if not 0 < self.fd_step <= 1e-2:
            raise ValueError("fd_step must lie in (0, 1e-2]")
        if self.prob_floor < 0:
            raise ValueError("prob_floor must be non-negative")

    def cutoff(self, strength: float) -> float:
        """Amplitude cutoff; by default the radius where the Gaussian weight falls to 1e-12."""
        if self.b is not None:
            return self.b
        return max(0.5, math.sqrt(strength * math.log(1.0 / CUTOFF_TAIL)))


@dataclass(frozen=True)
class PhotonCountDistribution:
    probs: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def tail_mass(self) -> float:
        return float(1.0 - self.probs.sum())

    @property
    def shape(self):
        return self.probs.shape

    def __getitem__(self, mn):
        return self.probs[mn]

    def window(self, M: int, N: int) -> "PhotonCountDistribution":
        return replace(self, probs=self.probs[: M + 1, : N + 1])


def bose_einstein(mean, j):
    """Thermal photon-number law ``x^j / (1 + x)^(j + 1)``."""
    mean = np.asarray(mean, dtype=float)
    j = np.asarray(j)
    return np.power(mean / (1 + mean), j) / (1 + mean)


def aligned_occupations(strength, dphi):
    half = np.cos(0.5 * dphi)
    return 2 * strength * (1 + half), 2 * strength * (1 - half)


def aligned_pmn_from_phases(strength, dphi, Mmax, Nmax, meta=None) -> PhotonCountDistribution:
    n1, n2 = aligned_occupations(strength, dphi)
    m = np.arange(Mmax + 1)[:, None]
    n = np.arange(Nmax + 1)[None, :]
    return PhotonCountDistribution(bose_einstein(n1, m) * bose_einstein(n2, n), meta or {})


def aligned_pmn(scene: SceneParams, Mmax: int, Nmax: int) -> PhotonCountDistribution:
    """Counts at the optimal delay ``(phi1 + phi2)/2``: independent thermal modes."""
    ph = phases_from_positions(scene)
    meta = {"method": "aligned", "delta": ph.centroid_phase, "strength": scene.strength, "dphi": ph.dphi}
    return aligned_pmn_from_phases(scene.strength, ph.dphi, Mmax, Nmax, meta)


# -- misaligned route -----------------------------------------------------------------


def fock_projection_amplitude(m, n, alpha1, alpha2, phi1, phi2, delta):
    """Overlap ``<m, n|_d`` with the telescope coherent state for source amplitudes alpha1, alpha2.

    Expanded over the telescope Fock basis by the binomial theorem; includes the
    ``1/sqrt(m! n!)`` normalization of the output Fock state.
    """
    A = alpha1 + alpha2
    Bv = alpha1 * np.exp(-1j * phi1) + alpha2 * np.exp(-1j * phi2)
    return _amplitude(m, n, A, Bv, delta)


def _amplitude(m, n, A, Bv, delta, powers=None):
    if powers is None:
        powers = _PowerTable(A, Bv, m + n)
    total = 0
    for j in range(m + 1):
        for k in range(n + 1):
            w = math.comb(m, j) * math.comb(n, k) * (-1) ** k
            total = total + w * np.exp(1j * (j + k) * delta) * powers.get(m + n - j - k, j + k)
    norm = 2.0 ** (-0.5 * (m + n)) / math.sqrt(math.factorial(m) * math.factorial(n))
    return norm * powers.envelope * total


class _PowerTable:
    """Cached powers ``A^p Bv^q`` and the Gaussian envelope of the coherent overlap."""

    def __init__(self, A, Bv, order):
        self.envelope = np.exp(-0.5 * (np.abs(A) ** 2 + np.abs(Bv) ** 2))
        self._a = [np.ones_like(A)]
        self._b = [np.ones_like(Bv)]
        for _ in range(order):
            self._a.append(self._a[-1] * A)
            self._b.append(self._b[-1] * Bv)

    def get(self, p, q):
        return self._a[p] * self._b[q]


def phase_integral(m, n, r1, r2, phi1, phi2, delta, phase_nodes):
    """``g(m, n, |alpha1|, |alpha2|)``: integral of |f|^2 over both source phases.

    The integrand only depends on the relative phase, so one trapezoid sum over
    it times ``2 pi`` is the full double integral.
    """
    beta = 2 * np.pi * np.arange(phase_nodes) / phase_nodes
    r1 = np.asarray(r1, dtype=float)[..., None]
    r2 = np.asarray(r2, dtype=float)[..., None]
    f = fock_projection_amplitude(m, n, r1 + 0j, r2 * np.exp(1j * beta), phi1, phi2, delta)
    return (2 * np.pi) ** 2 * np.mean(np.abs(f) ** 2, axis=-1)


def phase_integral_full(m, n, r1, r2, phi1, phi2, delta, phase_nodes):
    """Same integral by a full two-dimensional trapezoid rule (reference path)."""
    beta = 2 * np.pi * np.arange(phase_nodes) / phase_nodes
    b1, b2 = np.meshgrid(beta, beta, indexing="ij")
    f = fock_projection_amplitude(m, n, r1 * np.exp(1j * b1), r2 * np.exp(1j * b2), phi1, phi2, delta)
    return (2 * np.pi) ** 2 * np.mean(np.abs(f) ** 2)


def _quadrature_pmn(strength, phi1, phi2, delta, b, radial_nodes, phase_nodes, Mmax, Nmax):
    x, w = np.polynomial.legendre.leggauss(radial_nodes)
    r = 0.5 * b * (x + 1)
    wr = 0.5 * b * w * r * np.exp(-(r**2) / strength)
    beta = 2 * np.pi * np.arange(phase_nodes) / phase_nodes
    rot = np.exp(1j * delta)
    # first source amplitude is real (global phase removed); second carries the relative phase
    a1 = r[:, None, None]
    a2 = r[None, :, None] * np.exp(1j * beta)[None, None, :]
    A = a1 + a2
    Bv = a1 * np.exp(-1j * phi1) + a2 * np.exp(-1j * phi2)
    # |<m,n|_d coherent>|^2 is the binomial sum of fock_projection_amplitude, resummed
    x1 = 0.5 * np.abs(A + rot * Bv) ** 2
    x2 = 0.5 * np.abs(A - rot * Bv) ** 2
    env = np.exp(-(x1 + x2))
    ww = wr[:, None] * wr[None, :] / phase_nodes
    probs = np.empty((Mmax + 1, Nmax + 1))
    pm = env
    for m in range(Mmax + 1):
        if m:
            pm = pm * x1 / m
        pmn = pm
        for n in range(Nmax + 1):
            if n:
                pmn = pmn * x2 / n
            probs[m, n] = np.einsum("ij,ijk->", ww, pmn)
    # (2 pi)^2 from the phase integrals against 1 / (pi strength)^2
    return probs * 4.0 / strength**2


def misaligned_pmn(scene: SceneParams, delta: float, cfg: IntegrationConfig | None = None,
                   Mmax: int = 3, Nmax: int = 3) -> PhotonCountDistribution:
    """Counts for an arbitrary beam-splitter delay by quadrature over the source mixture."""
    cfg = cfg or IntegrationConfig()
    ph = phases_from_positions(scene)
    return misaligned_pmn_from_phases(scene.strength, ph.phi1, ph.phi2, delta, cfg, Mmax, Nmax)


def misaligned_pmn_from_phases(strength, phi1, phi2, delta, cfg, Mmax=3, Nmax=3) -> PhotonCountDistribution:
    meta = {"method": "quadrature", "delta": delta, "strength": strength,
            "dphi": phi1 - phi2, "misalignment": 0.5 * (phi1 + phi2) - delta}
    if strength == 0:
        probs = np.zeros((Mmax + 1, Nmax + 1))
        probs[0, 0] = 1.0
        return PhotonCountDistribution(probs, meta)
    b = cfg.cutoff(strength)
    meta["b"] = b
    probs = _quadrature_pmn(strength, phi1, phi2, delta, b, cfg.radial_nodes, cfg.phase_nodes, Mmax, Nmax)
    if cfg.check_convergence:
        fine = _quadrature_pmn(strength, phi1, phi2, delta, b, 2 * cfg.radial_nodes, cfg.phase_nodes, Mmax, Nmax)
        kept = probs >= cfg.prob_floor * probs.sum()
        rel = np.abs(fine - probs)[kept] / probs[kept]
        if rel.size and rel.max() > cfg.convergence_tol:
            raise ConvergenceError(
                f"doubling radial nodes moved a probability by {rel.max():.3g} (relative)"
            )
    return PhotonCountDistribution(probs, meta)


# -- Fisher information ------------------------------------------------------------------


def fisher_from_distributions(lo: PhotonCountDistribution, mid: PhotonCountDistribution,
                              hi: PhotonCountDistribution, step: float, prob_floor: float = 1e-15,
                              overflow: bool = False) -> float:
    """Classical FI from a central difference of the retained outcome probabilities.

    With ``overflow`` the discarded mass ``1 - sum(P)`` is treated as one more outcome.
    """
    p, plo, phi = mid.probs.ravel(), lo.probs.ravel(), hi.probs.ravel()
    if overflow:
        p = np.append(p, 1 - p.sum())
        plo = np.append(plo, 1 - plo.sum())
        phi = np.append(phi, 1 - phi.sum())
    dp = (phi - plo) / (2 * step)
    keep = p > prob_floor * mid.probs.sum()
    return float(np.sum(dp[keep] ** 2 / p[keep]))


def classical_fi(dist_at: Callable[[float], PhotonCountDistribution], theta2: float,
                 cfg: IntegrationConfig | None = None, u0: float = 1.0, overflow: bool = False) -> float:
    """Fisher information for the separation from a family of count distributions.

    ``dist_at(theta2)`` returns the distribution; ``cfg.fd_step`` is in phase units
    and converted to length with ``u0``.
    """
    cfg = cfg or IntegrationConfig()
    h = cfg.fd_step / u0
    return fisher_from_distributions(dist_at(theta2 - h), dist_at(theta2), dist_at(theta2 + h),
                                     h, cfg.prob_floor, overflow)


def aligned_family(scene: SceneParams, Mmax: int, Nmax: int):
    """theta2 -> aligned distribution at the scene's centroid; the delay tracks the centroid only."""

    def dist_at(theta2):
        return aligned_pmn(scene.with_centroid_separation(scene.centroid, theta2), Mmax, Nmax)

    return dist_at


def misaligned_family(scene: SceneParams, delta: float, cfg: IntegrationConfig, Mmax=3, Nmax=3):
    """theta2 -> quadrature distribution at a fixed delay."""

    def dist_at(theta2):
        return misaligned_pmn(scene.with_centroid_separation(scene.centroid, theta2), delta, cfg, Mmax, Nmax)

    return dist_at


def aligned_fi(scene: SceneParams, M: int, N: int, cfg: IntegrationConfig | None = None,
               overflow: bool = False) -> float:
    return classical_fi(aligned_family(scene, M, N), scene.separation, cfg, scene.u0, overflow)


def misaligned_fi(scene: SceneParams, c: float, cfg: IntegrationConfig | None = None,
                  M: int = 3, N: int = 3) -> float:
    """FI at misalignment ``c = (phi1 + phi2)/2 - delta``, outcomes ``m <= M``, ``n <= N``."""
    cfg = cfg or IntegrationConfig()
    delta = phases_from_positions(scene).centroid_phase - c
    h = cfg.fd_step / scene.u0
    side = misaligned_family(scene, delta, replace(cfg, check_convergence=False), M, N)
    mid = misaligned_family(scene, delta, cfg, M, N)(scene.separation)
    return fisher_from_distributions(side(scene.separation - h), mid, side(scene.separation + h),
                                     h, cfg.prob_floor)


def full_counting_window(strength: float, tail: float = 1e-10) -> int:
    """Smallest per-mode cutoff whose Bose-Einstein tail at the largest occupation is below ``tail``."""
    nmax = 4.0 * strength
    if nmax == 0:
        return 0
    ratio = nmax / (1 + nmax)
    return int(math.ceil(math.log(tail / 2) / math.log(ratio)))


# -- scans ---------------------------------------------------------------------------------


def truncated_fi_scan(strength, theta2_values, M, N, u0=1.0, theta1=0.0, overflow=False, cfg=None):
    """Rows ``(theta2, FI, QFI)`` for detectors resolving ``m <= M``, ``n <= N``."""
    rows = []
    for t2 in theta2_values:
        scene = SceneParams.reduced(strength, theta1, t2, u0)
        fi = aligned_fi(scene, M, N, cfg, overflow)
        rows.append((float(t2), fi, float(qfi_separation(strength, u0 * t2, u0))))
    return rows


def misalignment_scan(strength, theta2_values, c_values, cfg=None, M=3, N=3, u0=1.0, theta1=0.0):
    """Rows ``(theta2, c, FI, QFI)`` over the product of the two ranges."""
    cfg = cfg or IntegrationConfig()
    rows = []
    for t2 in theta2_values:
        scene = SceneParams.reduced(strength, theta1, t2, u0)
        q = float(qfi_separation(strength, u0 * t2, u0))
        for c in c_values:
            rows.append((float(t2), float(c), misaligned_fi(scene, c, cfg, M, N), q))
    return rows
