"""Consistency and oracle checks bundled for the ``verify`` subcommand."""
from __future__ import annotations

import numpy as np

from . import fisher, limits, multi, oracle, povm
from .gaussian import physicality_check, two_telescope_state
from .scene import SceneParams, phases_from_positions


def _random_scenes(rng, count, lo=0.01, hi=5.0):
    for _ in range(count):
        e = rng.uniform(lo, hi)
        dphi = rng.uniform(0.1, 2 * np.pi - 0.1)
        yield SceneParams.reduced(e, rng.uniform(-np.pi, np.pi), dphi)


def check_qfi_closed_forms(seed, count=100):
    rng = np.random.default_rng(seed)
    worst, off = 0.0, 0.0
    for scene in _random_scenes(rng, count):
        F = fisher.two_telescope_qfi(scene)
        f11, f22 = fisher.qfi_centroid_closed(scene), fisher.qfi_separation_closed(scene)
        worst = max(worst, abs(F[1, 1] / f22 - 1), abs(F[0, 0] - f11) / max(f11, 1e-300))
        off = max(off, abs(F[0, 1]) / F[1, 1])
    return [("qfi_numeric_vs_closed_rel", worst, 1e-7), ("qfi_offdiag_over_F22", off, 1e-9)]


def check_sld_saturation(seed, count=10):
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    for scene in _random_scenes(rng, count, 0.01, 0.5):
        M = povm.full_counting_window(scene.strength)
        fi = povm.aligned_fi(scene, M, M)
        worst = max(worst, abs(fi / fisher.qfi_separation_closed(scene) - 1))
    return [("aligned_fi_vs_qfi_rel", worst, 1e-4)]


def check_oracle(seed, n_samples=10**6):
    rows = []
    cfg = povm.IntegrationConfig()
    for strength in (0.05, 0.3):
        scene = SceneParams.reduced(strength, 0.3, 1.0)
        centre = phases_from_positions(scene).centroid_phase
        for c in (0.0, 0.5):
            delta = centre - c
            if c == 0:
                ref = povm.aligned_pmn(scene, 12, 12)
            else:
                ref = povm.misaligned_pmn(scene, delta, cfg, 12, 12)
            batch = oracle.sample_counts(scene, delta, n_samples, seed)
            z = oracle.binomial_z_scores(ref, batch)
            rows.append((f"oracle_max_abs_z[strength={strength},c={c}]", float(np.abs(z).max()), 4.0))
    return rows


def check_quadrature_reduction():
    cfg = povm.IntegrationConfig()
    worst = 0.0
    for strength in (0.01, 0.1, 0.5):
        scene = SceneParams.reduced(strength, 0.2, 1.3)
        a = povm.aligned_pmn(scene, 3, 3).probs
        q = povm.misaligned_pmn(scene, 0.2, cfg, 3, 3).probs
        worst = max(worst, float(np.abs(q - a).max()))
    return [("quadrature_c0_vs_aligned_abs", worst, 1e-6)]


def check_multi_reduction():
    scene = SceneParams.reduced(0.3, 0.4, 1.2, eta=0.4)
    ms = multi.MultiScene([[scene.x1, 0, scene.nbar], [scene.x2, 0, scene.nbar]],
                          [[0, 0], [scene.B, 0]], [[0.4, 0.4], [0.4, 0.4]], k=scene.k, s0=scene.s0)
    cov_err = float(np.abs(multi.multi_covariance(ms).cov - two_telescope_state(scene).cov).max())
    F = multi.centroid_separation_qfi(ms)
    rel = abs(F[1, 1] / fisher.qfi_separation_closed(scene) - 1)
    return [("multi_cov_vs_two_telescope_abs", cov_err, 1e-12), ("multi_qfi_vs_closed_rel", rel, 1e-6)]


def check_physicality(seed, count=100):
    rng = np.random.default_rng(seed + 2)
    bad = sum(not physicality_check(two_telescope_state(s)) for s in _random_scenes(rng, count))
    return [("unphysical_states", float(bad), 0.0)]


def check_weak_limit():
    scene = SceneParams.reduced(1e-3, 0.0, 1.0)
    I11, I22, I12 = limits.weak_fi_misaligned(scene, 0.0)
    return [("weak_I22_at_xi0_minus_quarter", abs(I22 - 0.25), 1e-12),
            ("weak_I12_at_optimal_delay", abs(I12), 1e-12)]


def check_dirty_beam():
    pattern = limits.SamplingPattern.rectangle(8.0)
    null = limits.first_null(pattern)
    cell = pattern.frequencies(0)[1] - pattern.frequencies(0)[0]
    return [("dirty_beam_null_error_cells", abs(null - np.pi / 8.0) / cell, 1.0)]


def run_checks(seed: int = 0, n_samples: int = 10**6):
    """Rows ``(check, value, tolerance, passed)`` with the value required to be ``<= tolerance``."""
    rows = []
    for batch in (
        check_qfi_closed_forms(seed),
        check_sld_saturation(seed),
        check_physicality(seed),
        check_quadrature_reduction(),
        check_oracle(seed, n_samples),
        check_multi_reduction(),
        check_weak_limit(),
        check_dirty_beam(),
    ):
        for name, value, tol in batch:
            rows.append((name, float(value), float(tol), bool(value <= tol)))
    return rows
