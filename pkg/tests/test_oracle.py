import numpy as np
import pytest

from thermal_superres import oracle
from thermal_superres.povm import IntegrationConfig, aligned_pmn, misaligned_pmn
from thermal_superres.scene import SceneParams, phases_from_positions

N_SAMPLES = 10**6


@pytest.fixture(scope="module")
def aligned_batch():
    scene = SceneParams.reduced(0.1, 0.3, 1.2)
    delta = phases_from_positions(scene).centroid_phase
    return scene, oracle.sample_counts(scene, delta, N_SAMPLES, seed=42)


def test_vacuum_batch():
    batch = oracle.sample_counts(SceneParams.reduced(0.0, 0, 1), 0.2, 1000, seed=1)
    assert batch.counts == {(0, 0): 1000}
    assert oracle.empirical_distribution(batch).probs[0, 0] == 1.0


def test_counts_sum_to_sample_size(aligned_batch):
    _, batch = aligned_batch
    assert sum(batch.counts.values()) == N_SAMPLES


def test_bit_exact_reproducibility_across_workers():
    scene = SceneParams.reduced(0.3, 0.1, 0.8)
    a = oracle.sample_counts(scene, 0.5, 200_000, seed=7)
    b = oracle.sample_counts(scene, 0.5, 200_000, seed=7, threads=3)
    assert a.counts == b.counts
    c = oracle.sample_counts(scene, 0.5, 200_000, seed=8)
    assert c.counts != a.counts


@pytest.mark.parametrize("c", [0.0, 0.5, 2.0])
def test_mean_counts_follow_mode_occupations(c):
    e = 0.1
    scene = SceneParams.reduced(e, 0.2, 1.3)
    ph = phases_from_positions(scene)
    batch = oracle.sample_counts(scene, ph.centroid_phase - c, N_SAMPLES, seed=3)
    mean, var = batch.moments()
    h = np.cos(0.5 * ph.dphi) * np.cos(c)
    expected = np.array([2 * e * (1 + h), 2 * e * (1 - h)])
    se = np.sqrt(var / N_SAMPLES)
    assert np.all(np.abs(mean - expected) < 4 * se)


def test_thermal_variance_when_aligned(aligned_batch):
    scene, batch = aligned_batch
    ph = phases_from_positions(scene)
    h = np.cos(0.5 * ph.dphi)
    n = np.array([2 * 0.1 * (1 + h), 2 * 0.1 * (1 - h)])
    _, var = batch.moments()
    # standard error of a sample variance: sqrt((mu4 - var^2)/N), thermal mu4 from the count array
    counts = batch.as_array()
    probs = counts / N_SAMPLES
    for axis, nbar in enumerate(n):
        k = np.arange(probs.shape[axis])
        marg = probs.sum(axis=1 - axis)
        mu4 = marg @ (k - nbar) ** 4
        se = np.sqrt((mu4 - var[axis] ** 2) / N_SAMPLES)
        assert abs(var[axis] - nbar * (1 + nbar)) < 5 * se


def test_empirical_matches_aligned(aligned_batch):
    scene, batch = aligned_batch
    z = oracle.binomial_z_scores(aligned_pmn(scene, 8, 8), batch)
    assert z.size >= 4
    assert np.abs(z).max() < 4


def test_empirical_matches_misaligned():
    scene = SceneParams.reduced(0.1, 0.3, 1.2)
    delta = phases_from_positions(scene).centroid_phase - 0.5
    batch = oracle.sample_counts(scene, delta, N_SAMPLES, seed=5)
    z = oracle.binomial_z_scores(misaligned_pmn(scene, delta, IntegrationConfig(), 6, 6), batch)
    assert np.abs(z).max() < 4


def test_dphi_symmetry_within_sampling_error():
    e = 0.2
    a = SceneParams.reduced(e, 0.0, 1.5)
    b = SceneParams.reduced(e, 0.0, 4 * np.pi - 1.5)
    pa = oracle.empirical_distribution(oracle.sample_counts(a, 0.3, 400_000, seed=1), 4, 4)
    pb = oracle.empirical_distribution(oracle.sample_counts(b, 0.3, 400_000, seed=2), 4, 4)
    se = np.sqrt(pa.meta["stderr"] ** 2 + pb.meta["stderr"] ** 2)
    keep = pa.probs > 1e-3
    assert np.all(np.abs(pa.probs - pb.probs)[keep] < 5 * se[keep])


def test_empirical_distribution_stderr():
    batch = oracle.SampleBatch({(0, 0): 75, (1, 0): 25}, 100, 0)
    d = oracle.empirical_distribution(batch, 1, 1)
    assert d.probs[1, 0] == 0.25
    assert d.meta["stderr"][1, 0] == pytest.approx(np.sqrt(0.25 * 0.75 / 100))


def test_counts_csv(tmp_path):
    batch = oracle.SampleBatch({(1, 0): 3, (0, 0): 5}, 8, 11)
    path = tmp_path / "counts.csv"
    oracle.write_counts_csv(batch, path)
    assert path.read_text() == "# n_samples=8\n# seed=11\nm,n,count\n0,0,5\n1,0,3\n"
