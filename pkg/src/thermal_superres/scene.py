"""Observation geometry: two thermal point sources seen by a two-telescope baseline.

Source positions enter every downstream quantity only through the phases
``phi_i = k B sin(tilt) + k B cos(tilt) x_i / s0``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

PARAXIAL_LIMIT = 0.01


class ParaxialWarning(UserWarning):
    """Raised (as a warning) when |x_i|/s0 leaves the first-order regime."""


@dataclass(frozen=True)
class SceneParams:
    k: float
    B: float
    s0: float
    tilt: float = 0.0
    eta: float = 0.5
    nbar: float = 0.0
    x1: float = 0.0
    x2: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.eta <= 0.5:
            raise ValueError(f"eta must lie in [0, 1/2], got {self.eta}")
        if self.nbar < 0:
            raise ValueError(f"nbar must be non-negative, got {self.nbar}")
        if self.k <= 0 or self.B <= 0 or self.s0 <= 0:
            raise ValueError("k, B and s0 must be positive")

    @classmethod
    def reduced(cls, strength, theta1=0.0, theta2=0.0, u0=1.0, eta=0.5):
        """Scene in reduced units where ``k B / s0 = u0`` and ``eta * nbar = strength``.

        ``s0`` is set large so that positions of order 2*pi/u0 stay paraxial.
        """
        s0 = 1e6
        x1, x2 = positions_from_centroid_separation(theta1, theta2)
        nbar = strength / eta if eta > 0 else 0.0
        return cls(k=1.0, B=u0 * s0, s0=s0, eta=eta, nbar=nbar, x1=x1, x2=x2)

    @property
    def strength(self) -> float:
        """Effective per-source coupling eta * nbar."""
        return self.eta * self.nbar

    @property
    def u0(self) -> float:
        """Phase gradient k B cos(tilt) / s0 [rad/length]."""
        return self.k * self.B * math.cos(self.tilt) / self.s0

    @property
    def centroid(self) -> float:
        return 0.5 * (self.x1 + self.x2)

    @property
    def separation(self) -> float:
        return self.x1 - self.x2

    @property
    def paraxial(self) -> bool:
        return max(abs(self.x1), abs(self.x2)) / self.s0 <= PARAXIAL_LIMIT

    def with_positions(self, x1, x2) -> "SceneParams":
        return replace(self, x1=x1, x2=x2)

    def with_centroid_separation(self, theta1, theta2) -> "SceneParams":
        return self.with_positions(*positions_from_centroid_separation(theta1, theta2))

    def with_strength(self, strength) -> "SceneParams":
        if self.eta == 0:
            raise ValueError("cannot set a non-zero strength with eta = 0")
        return replace(self, nbar=strength / self.eta)


@dataclass(frozen=True)
class PhasePair:
    phi1: float
    phi2: float
    paraxial: bool = True

    @property
    def dphi(self) -> float:
        return self.phi1 - self.phi2

    @property
    def centroid_phase(self) -> float:
        return 0.5 * (self.phi1 + self.phi2)


def phases_from_positions(scene: SceneParams) -> PhasePair:
    """First-order interferometer phases of the two sources (no wrapping)."""
    offset = scene.k * scene.B * math.sin(scene.tilt)
    slope = scene.u0
    ok = scene.paraxial
    if not ok:
        warnings.warn(
            f"source offset exceeds {PARAXIAL_LIMIT} s0; first-order phases are unreliable",
            ParaxialWarning,
            stacklevel=2,
        )
    return PhasePair(offset + slope * scene.x1, offset + slope * scene.x2, ok)


def positions_from_centroid_separation(theta1, theta2):
    return theta1 + 0.5 * theta2, theta1 - 0.5 * theta2


def centroid_separation_from_positions(x1, x2):
    return 0.5 * (x1 + x2), x1 - x2
