"""Monte-Carlo photon counting straight from the coherent-state mixture.

Conditional on the two source amplitudes, both telescope modes hold coherent
states, so the beam-splitter outputs are coherent too and their counts are
independent Poisson draws. Nothing here uses the covariance machinery.

Seeding: ``numpy.random.SeedSequence(seed).spawn`` yields one PCG64 stream per
chunk of ``CHUNK`` samples, so a batch is bit-identical for a given
``(seed, n_samples)`` regardless of how many workers process the chunks.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .povm import PhotonCountDistribution
from .scene import SceneParams, phases_from_positions

CHUNK = 1 << 16


@dataclass(frozen=True)
class SampleBatch:
    counts: dict
    n_samples: int
    seed: int

    def as_array(self, Mmax=None, Nmax=None) -> np.ndarray:
        Mmax = max(m for m, _ in self.counts) if Mmax is None else Mmax
        Nmax = max(n for _, n in self.counts) if Nmax is None else Nmax
        out = np.zeros((Mmax + 1, Nmax + 1), dtype=np.int64)
        for (m, n), c in self.counts.items():
            if m <= Mmax and n <= Nmax:
                out[m, n] = c
        return out

    def moments(self):
        """Sample means and variances of (m, n)."""
        mn = np.array(list(self.counts.keys()), dtype=float)
        w = np.array(list(self.counts.values()), dtype=float) / self.n_samples
        mean = w @ mn
        var = w @ (mn - mean) ** 2
        return mean, var


def _draw_chunk(seed_seq, size, strength, phi1, phi2, delta):
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    # E|alpha|^2 = strength
    z = rng.standard_normal((4, size)) * np.sqrt(strength / 2)
    alpha1 = z[0] + 1j * z[1]
    alpha2 = z[2] + 1j * z[3]
    A = alpha1 + alpha2
    Bv = alpha1 * np.exp(-1j * phi1) + alpha2 * np.exp(-1j * phi2)
    rot = np.exp(1j * delta)
    d1 = (A + rot * Bv) / np.sqrt(2)
    d2 = (A - rot * Bv) / np.sqrt(2)
    m = rng.poisson(np.abs(d1) ** 2)
    n = rng.poisson(np.abs(d2) ** 2)
    return m, n


def _tally(m, n):
    keys, counts = np.unique(np.stack([m, n], axis=1), axis=0, return_counts=True)
    return {(int(a), int(b)): int(c) for (a, b), c in zip(keys, counts)}


def sample_counts(scene: SceneParams, delta: float, n_samples: int, seed: int, threads: int = 1) -> SampleBatch:
    """Draw ``n_samples`` photon-count pairs for the beam splitter at ``delta``."""
    if scene.strength == 0:
        return SampleBatch({(0, 0): n_samples}, n_samples, seed)
    ph = phases_from_positions(scene)
    sizes = [CHUNK] * (n_samples // CHUNK)
    if n_samples % CHUNK:
        sizes.append(n_samples % CHUNK)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))

    def work(i):
        return _draw_chunk(streams[i], sizes[i], scene.strength, ph.phi1, ph.phi2, delta)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, range(len(sizes))))
    else:
        parts = [work(i) for i in range(len(sizes))]
    m = np.concatenate([p[0] for p in parts]) if parts else np.zeros(0, int)
    n = np.concatenate([p[1] for p in parts]) if parts else np.zeros(0, int)
    return SampleBatch(_tally(m, n), n_samples, seed)


def empirical_distribution(batch: SampleBatch, Mmax=None, Nmax=None) -> PhotonCountDistribution:
    """Relative frequencies; ``meta['stderr']`` holds binomial standard errors."""
    counts = batch.as_array(Mmax, Nmax)
    p = counts / batch.n_samples
    se = np.sqrt(p * (1 - p) / batch.n_samples)
    return PhotonCountDistribution(p, {"method": "monte-carlo", "n_samples": batch.n_samples,
                                       "seed": batch.seed, "stderr": se})


def binomial_z_scores(reference: PhotonCountDistribution, batch: SampleBatch, min_prob: float = 1e-4) -> np.ndarray:
    """``(p_hat - p)/sqrt(p(1-p)/n)`` over outcomes with ``p > min_prob``."""
    M, N = reference.shape[0] - 1, reference.shape[1] - 1
    phat = batch.as_array(M, N) / batch.n_samples
    p = reference.probs
    keep = p > min_prob
    return (phat[keep] - p[keep]) / np.sqrt(p[keep] * (1 - p[keep]) / batch.n_samples)


def write_counts_csv(batch: SampleBatch, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# n_samples={batch.n_samples}\n# seed={batch.seed}\n")
        fh.write("m,n,count\n")
        for (m, n), c in sorted(batch.counts.items()):
            fh.write(f"{m},{n},{c}\n")
