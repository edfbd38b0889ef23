import numpy as np
import pytest

from uraspread.codebook import Codebook, generate_codebook
from uraspread.detector import detect_active, energy_statistic


def test_energy_statistic_hand_value():
    Y = np.array([[1.0, -2.0], [0.0, 3.0]])
    a = np.array([2.0, 1.0])
    # correlations per symbol column: [2, -1] -> |.| summed = 3
    assert energy_statistic(Y, a) == pytest.approx(3.0)


def test_grouped_statistic_collapses_to_full_group_sum():
    # max over sign patterns separates per symbol, so g > 1 equals the g=1
    # statistic restricted to the first (n_c // g) * g symbols
    rng = np.random.default_rng(0)
    Y = rng.normal(size=(8, 10))
    a = rng.normal(size=8)
    corr = np.abs(a @ Y)
    assert energy_statistic(Y, a, g=3) == pytest.approx(np.sum(corr[:9]))
    assert energy_statistic(Y, a, g=1) == pytest.approx(np.sum(corr))
    with pytest.raises(ValueError):
        energy_statistic(Y, a, g=0)


def test_detect_active_orders_by_score():
    rng = np.random.default_rng(1)
    cb = generate_codebook(1, 8, 32, 1.0)
    Y = 5.0 * np.outer(cb.columns[:, 13], rng.choice([-1.0, 1.0], size=6))
    det = detect_active(Y, cb, 4)
    assert det.indices[0] == 13
    assert det.scores.shape == (32,)
    s = det.scores[det.indices]
    assert np.all(s[:-1] >= s[1:])


def test_detect_active_ties_break_to_lower_index():
    cols = np.eye(4)
    cb = Codebook(columns=cols, column_norm_sq=1.0)
    Y = np.zeros((4, 3))  # all scores tie at 0
    det = detect_active(Y, cb, 3)
    assert np.array_equal(det.indices, [0, 1, 2])


def test_detect_active_validates_k():
    cb = generate_codebook(2, 4, 8, 1.0)
    with pytest.raises(ValueError):
        detect_active(np.zeros((4, 2)), cb, 0)
    with pytest.raises(ValueError):
        detect_active(np.zeros((4, 2)), cb, 9)


def test_exact_support_recovery_without_noise():
    # K spread BPSK signals, no noise: the true columns dominate the scores
    rng = np.random.default_rng(3)
    cb = generate_codebook(3, 29, 512, 0.25)
    true = rng.choice(512, size=25, replace=False)
    v = rng.choice([-1.0, 1.0], size=(25, 1024))
    Y = np.einsum("sk,kl->sl", cb.columns[:, true], v)
    # over-selected top-(K_a + margin) list must contain every true column
    det = detect_active(Y, cb, 35)
    assert set(true.tolist()) <= set(det.indices.tolist())
