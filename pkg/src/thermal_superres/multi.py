"""Many thermal sources observed by many detectors.

Far-field phases ``phi_sj = k (u_j x_s + v_j y_s) / s0``; detector ``l``'s
diagonal block carries ``1/2 + sum_s eta_sl N_s`` and the cross block between
detectors ``l`` and ``m`` carries ``sum_s sqrt(eta_sl eta_sm) N_s e^{i(phi_sm - phi_sl)}``
at position (a_l, a_m^dag).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .fisher import FD_STEP, qfi_numeric
from .gaussian import GaussianState


@dataclass(frozen=True)
class MultiScene:
    sources: np.ndarray    # (M, 3): x, y, N
    detectors: np.ndarray  # (n, 2): u, v
    eta: np.ndarray        # (M, n)
    k: float = 1.0
    s0: float = 1.0

    def __post_init__(self):
        src = np.atleast_2d(np.asarray(self.sources, dtype=float))
        det = np.atleast_2d(np.asarray(self.detectors, dtype=float))
        eta = np.atleast_2d(np.asarray(self.eta, dtype=float))
        object.__setattr__(self, "sources", src)
        object.__setattr__(self, "detectors", det)
        object.__setattr__(self, "eta", eta)
        if src.shape[1] != 3 or det.shape[1] != 2:
            raise ValueError("sources are (x, y, N) rows and detectors are (u, v) rows")
        if src.shape[0] < 1 or det.shape[0] < 2:
            raise ValueError("need at least one source and two detectors")
        if eta.shape != (src.shape[0], det.shape[0]):
            raise ValueError(f"eta must have shape {(src.shape[0], det.shape[0])}, got {eta.shape}")
        if np.any(eta < 0) or np.any(eta.sum(axis=1) > 1 + 1e-12):
            raise ValueError("transmissivities must be non-negative with per-source total <= 1")
        if np.any(src[:, 2] < 0):
            raise ValueError("source strengths must be non-negative")

    @property
    def n_detectors(self) -> int:
        return self.detectors.shape[0]

    @property
    def n_sources(self) -> int:
        return self.sources.shape[0]

    def phases(self) -> np.ndarray:
        """``phi[s, j]`` in the far-field limit."""
        x, y = self.sources[:, 0], self.sources[:, 1]
        u, v = self.detectors[:, 0], self.detectors[:, 1]
        return self.k * (np.outer(x, u) + np.outer(y, v)) / self.s0

    def with_coordinates(self, coords) -> "MultiScene":
        src = self.sources.copy()
        src[:, :2] = np.asarray(coords, dtype=float).reshape(self.n_sources, 2)
        return replace(self, sources=src)

    @classmethod
    def from_dict(cls, doc: dict) -> "MultiScene":
        sources = [(s["x"], s.get("y", 0.0), s["N"]) for s in doc["sources"]]
        detectors = [(d["u"], d.get("v", 0.0)) for d in doc["detectors"]]
        return cls(np.array(sources), np.array(detectors), np.array(doc["eta"]),
                   float(doc.get("k", 1.0)), float(doc.get("s0", 1.0)))

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "s0": self.s0,
            "sources": [{"x": x, "y": y, "N": N} for x, y, N in self.sources.tolist()],
            "detectors": [{"u": u, "v": v} for u, v in self.detectors.tolist()],
            "eta": self.eta.tolist(),
        }

    @classmethod
    def from_json(cls, path) -> "MultiScene":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def multi_covariance(ms: MultiScene, thermal_floor: float = 0.0) -> GaussianState:
    """Detector covariance; ``thermal_floor`` adds that occupation to every detector mode.

    Detector modes left in exact vacuum (more detectors than sources, or zero
    strengths) make the QFI metric singular; a small floor such as 1e-9 lifts that.
    """
    if thermal_floor < 0:
        raise ValueError("thermal floor must be non-negative")
    n = ms.n_detectors
    N = ms.sources[:, 2]
    x, y = ms.sources[:, 0], ms.sources[:, 1]
    du = ms.detectors[None, :, 0] - ms.detectors[:, None, 0]  # u_m - u_l
    dv = ms.detectors[None, :, 1] - ms.detectors[:, None, 1]
    # phi_sm - phi_sl from baseline differences, so a shared detector coordinate drops out exactly
    rel = ms.k * (x[:, None, None] * du + y[:, None, None] * dv) / ms.s0
    w = np.sqrt(ms.eta[:, :, None] * ms.eta[:, None, :])
    # C[l, m] = <a_l a_m^dag> - delta_lm = sum_s N_s sqrt(eta_sl eta_sm) e^{i(phi_sm - phi_sl)}
    C = np.einsum("s,slm->lm", N, w * np.exp(1j * rel))
    cov = np.zeros((2 * n, 2 * n), dtype=complex)
    for l in range(n):
        for m in range(n):
            if l == m:
                p = 0.5 + thermal_floor + C[l, l].real
                cov[2 * l, 2 * l + 1] = cov[2 * l + 1, 2 * l] = p
            else:
                cov[2 * l, 2 * m + 1] = C[l, m]
                cov[2 * l + 1, 2 * m] = np.conj(C[l, m])
    return GaussianState.from_cov(cov)


def _selector_index(sel, n_sources):
    """``(s, 'x'|'y')`` or a flat index into the (x0, y0, x1, y1, ...) coordinate vector."""
    if isinstance(sel, (tuple, list)):
        s, axis = sel
        if not 0 <= s < n_sources:
            raise IndexError(f"source {s} out of range")
        return 2 * s + {"x": 0, "y": 1}[axis]
    return int(sel)


def multi_qfi(ms: MultiScene, params, step: float | None = None, thermal_floor: float = 0.0) -> np.ndarray:
    """QFI matrix over the selected source coordinates, by the generic Gaussian formula."""
    idx = [_selector_index(p, ms.n_sources) for p in params]
    base = ms.sources[:, :2].reshape(-1).copy()
    if step is None:
        # FD_STEP in phase units
        span = np.abs(ms.detectors).max()
        step = FD_STEP * ms.s0 / (ms.k * span) if span > 0 else FD_STEP

    def state_at(values):
        coords = base.copy()
        coords[idx] = values
        return multi_covariance(ms.with_coordinates(coords), thermal_floor)

    return qfi_numeric(state_at, base[idx], step)


def centroid_separation_qfi(ms: MultiScene, axis: str = "x", step: float | None = None,
                            thermal_floor: float = 0.0) -> np.ndarray:
    """For two sources: QFI over (centroid, separation) along ``axis`` via the linear reparametrization."""
    if ms.n_sources != 2:
        raise ValueError("centroid/separation parametrization needs exactly two sources")
    F = multi_qfi(ms, [(0, axis), (1, axis)], step, thermal_floor)
    J = np.array([[1.0, 0.5], [1.0, -0.5]])  # d(x1, x2)/d(theta1, theta2)
    return J.T @ F @ J
