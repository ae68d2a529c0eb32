"""Reference limits: weak sources, the conventional fixed-delay measurement, and the dirty beam."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fisher import qfi_centroid, qfi_separation
from .povm import IntegrationConfig, aligned_pmn_from_phases, misaligned_fi
from .scene import SceneParams, phases_from_positions

ARCSEC = math.pi / (180 * 3600)

# Delays of the conventional two-setting coherence measurement. With the centroid
# phase at 2pi/3 these give misalignments 2pi/3 and -pi/3.
CONVENTIONAL_DELAYS = (0.0, math.pi)
QUADRATURE_DELAYS = (0.0, 0.5 * math.pi)


# -- weak sources ------------------------------------------------------------------------


@dataclass(frozen=True)
class WeakSourceResult:
    D1: float
    D2: float
    qfi: np.ndarray
    fi_misaligned: tuple


def weak_eigenweights(dphi):
    """Weights of the one-photon density matrix in its eigenbasis."""
    half = 0.5 * np.cos(0.5 * dphi)
    return 0.5 + half, 0.5 - half


def weak_qfi(scene: SceneParams) -> np.ndarray:
    dphi = phases_from_positions(scene).dphi
    return scene.u0**2 * np.array([[np.cos(0.5 * dphi) ** 2, 0.0], [0.0, 0.25]])


def weak_fi_misaligned(scene: SceneParams, xi: float, delta: float | None = None):
    """``(I11, I22, I12)`` of the one-photon projective measurements offset by ``xi``.

    ``I12`` is evaluated for the projector pair with delay ``delta`` (default:
    the optimal delay offset by ``xi``).
    """
    ph = phases_from_positions(scene)
    u2 = scene.u0**2
    cd = np.cos(0.5 * ph.dphi) ** 2
    sd = np.sin(0.5 * ph.dphi) ** 2
    cx, sx = np.cos(xi) ** 2, np.sin(xi) ** 2
    I22 = cx * sd / (1 - cx * cd) * u2 / 4
    I11 = cx * cd / (1 - sx * cd) * u2
    if delta is None:
        delta = ph.centroid_phase + xi
    off = ph.centroid_phase - delta
    I12 = u2 / 8 * np.sin(ph.dphi) * np.sin(2 * off) / (1 - cd * np.cos(off) ** 2)
    return float(I11), float(I22), float(I12)


def weak_source_result(scene: SceneParams, xi: float = 0.0) -> WeakSourceResult:
    D1, D2 = weak_eigenweights(phases_from_positions(scene).dphi)
    return WeakSourceResult(float(D1), float(D2), weak_qfi(scene), weak_fi_misaligned(scene, xi))


def strong_weak_consistency(strengths, dphis, u0=1.0):
    """Rows comparing the arbitrary-strength results with their one-photon limits.

    Columns: strength, dphi, F22/(strength u0^2), conditional one-photon weight
    P(1,0)/(P(1,0)+P(0,1)), D1, and the fitted photon-number constants
    F_strong / (strength * F_weak) for both parameters.
    """
    rows = []
    for e in strengths:
        for dphi in dphis:
            scene = SceneParams.reduced(e, 0.0, dphi / u0, u0)
            p = aligned_pmn_from_phases(e, dphi, 1, 1).probs
            cond = p[1, 0] / (p[1, 0] + p[0, 1])
            D1, _ = weak_eigenweights(dphi)
            wq = weak_qfi(scene)
            f22 = float(qfi_separation(e, dphi, u0))
            f11 = float(qfi_centroid(e, dphi, u0))
            k22 = f22 / (e * wq[1, 1])
            k11 = f11 / (e * wq[0, 0]) if wq[0, 0] > 1e-12 * u0**2 else float("nan")
            rows.append((e, dphi, f22 / (e * u0**2), cond, float(D1), k22, k11))
    return rows


# -- conventional measurement -------------------------------------------------------------


def conventional_fi_settings(scene: SceneParams, cfg: IntegrationConfig | None = None,
                             delays=CONVENTIONAL_DELAYS, M: int = 3, N: int = 3):
    """Per-setting FI of fixed-delay photon counting with ``m <= M``, ``n <= N``."""
    cfg = cfg or IntegrationConfig()
    centroid = phases_from_positions(scene).centroid_phase
    return tuple(misaligned_fi(scene, centroid - d, cfg, M, N) for d in delays)


def conventional_fi(scene: SceneParams, cfg: IntegrationConfig | None = None,
                    delays=CONVENTIONAL_DELAYS, M: int = 3, N: int = 3) -> float:
    """FI of the conventional measurement with the photons split equally between the settings."""
    return float(np.mean(conventional_fi_settings(scene, cfg, delays, M, N)))


def observation_time_ratio(scene: SceneParams, cfg: IntegrationConfig | None = None,
                           delays=CONVENTIONAL_DELAYS) -> float:
    """Optimal-measurement FI (the separation QFI) over the conventional FI."""
    dphi = phases_from_positions(scene).dphi
    return float(qfi_separation(scene.strength, dphi, scene.u0)) / conventional_fi(scene, cfg, delays)


def array_scene(angle_arcsec, wavelength=5e-3, baseline=1e4, strength=0.01,
                centroid_phase=2 * math.pi / 3, eta=0.5) -> SceneParams:
    """Two sources at angular separation ``angle_arcsec`` seen by a radio array.

    Lengths in metres with ``s0 = 1``, so positions are angles in radians.
    """
    k = 2 * math.pi / wavelength
    u0 = k * baseline
    sep = angle_arcsec * ARCSEC
    x1, x2 = centroid_phase / u0 + 0.5 * sep, centroid_phase / u0 - 0.5 * sep
    return SceneParams(k=k, B=baseline, s0=1.0, eta=eta, nbar=strength / eta, x1=x1, x2=x2)


# -- dirty beam ------------------------------------------------------------------------------


@dataclass(frozen=True)
class SamplingPattern:
    """Boolean (u, v) sampling grid on cell-centred coordinates ``(j - N/2 + 1/2) * spacing``."""

    mask: np.ndarray
    spacing: float = 1.0

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        if mask.ndim != 2 or not mask.any():
            raise ValueError("sampling pattern must be a 2-D grid with at least one sampled point")
        object.__setattr__(self, "mask", mask)

    def coords(self, axis: int) -> np.ndarray:
        n = self.mask.shape[axis]
        return (np.arange(n) - n / 2 + 0.5) * self.spacing

    def frequencies(self, axis: int) -> np.ndarray:
        """Image-plane coordinates conjugate to the sampling grid (spacing 2 pi / (N du))."""
        n = self.mask.shape[axis]
        return (np.arange(n) - n // 2) * (2 * np.pi / (n * self.spacing))

    @classmethod
    def rectangle(cls, half_width: float, n: int = 256, spacing: float = 1.0) -> "SamplingPattern":
        u = (np.arange(n) - n / 2 + 0.5) * spacing
        inside = np.abs(u) <= half_width
        return cls(inside[:, None] & inside[None, :], spacing)

    @classmethod
    def full(cls, n: int = 256, spacing: float = 1.0) -> "SamplingPattern":
        return cls(np.ones((n, n), dtype=bool), spacing)


def dirty_beam(pattern: SamplingPattern) -> np.ndarray:
    """``B(l, m) = sum_{u,v} S(u, v) e^{i(l u + m v)} du dv`` on the conjugate grid."""
    u, v = pattern.coords(0), pattern.coords(1)
    l, m = pattern.frequencies(0), pattern.frequencies(1)
    Eu = np.exp(1j * np.outer(l, u))
    Ev = np.exp(1j * np.outer(m, v))
    beam = Eu @ pattern.mask.astype(float) @ Ev.T * pattern.spacing**2
    return beam.real if np.allclose(beam.imag, 0, atol=1e-9 * np.abs(beam).max()) else beam


def dirty_image(image: np.ndarray, beam: np.ndarray) -> np.ndarray:
    """Circular convolution of the true image with the beam (beam centre at index N//2)."""
    kernel = np.fft.ifftshift(beam)
    out = np.fft.ifft2(np.fft.fft2(image) * np.fft.fft2(kernel))
    return out.real if np.isrealobj(beam) and np.isrealobj(image) else out


def first_null(pattern: SamplingPattern, beam: np.ndarray | None = None, axis: int = 0) -> float:
    """Distance from the beam centre to the first zero crossing along one axis."""
    beam = dirty_beam(pattern) if beam is None else beam
    l = pattern.frequencies(axis)
    c0, c1 = pattern.mask.shape[0] // 2, pattern.mask.shape[1] // 2
    cut = np.real(beam[c0:, c1] if axis == 0 else beam[c0, c1:])
    coord = l[c0:] if axis == 0 else pattern.frequencies(1)[c1:]
    tol = 1e-12 * abs(cut[0])
    for i in range(1, cut.size):
        if abs(cut[i]) <= tol:
            return float(coord[i])
        if np.sign(cut[i]) != np.sign(cut[i - 1]):
            t = cut[i - 1] / (cut[i - 1] - cut[i])
            return float(coord[i - 1] + t * (coord[i] - coord[i - 1]))
    raise ValueError("beam has no zero crossing on the grid")
