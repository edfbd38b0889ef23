import numpy as np
import pytest

from uraspread.channel import flatten, gmac, reshape, spread


def test_spread_is_outer_product():
    a = np.array([1.0, -2.0])
    v = np.array([1.0, 0.5, -1.0])
    S = spread(v, a)
    assert S.shape == (2, 3)
    assert np.array_equal(S, np.outer(a, v))
    with pytest.raises(ValueError):
        spread(np.ones((2, 2)), a)


def test_gmac_superposition_zero_noise_is_exact():
    rng = np.random.default_rng(0)
    signals = [rng.normal(size=(4, 8)) for _ in range(5)]
    Y = gmac(signals, noise_seed=1, zero_noise=True)
    # identical stacked summation must reproduce Y bit-exactly
    assert np.array_equal(Y, np.sum(np.stack(signals), axis=0))


def test_gmac_noise_is_seeded_and_unit_variance():
    Y1 = gmac([], noise_seed=7, shape=(100, 200))
    Y2 = gmac([], noise_seed=7, shape=(100, 200))
    Y3 = gmac([], noise_seed=8, shape=(100, 200))
    assert np.array_equal(Y1, Y2)
    assert not np.array_equal(Y1, Y3)
    assert abs(np.var(Y1) - 1.0) < 0.02
    assert abs(np.mean(Y1)) < 0.02


def test_gmac_shape_checks():
    with pytest.raises(ValueError):
        gmac([], noise_seed=0)
    with pytest.raises(ValueError):
        gmac([np.zeros((2, 3)), np.zeros((3, 2))], noise_seed=0)
    with pytest.raises(ValueError):
        gmac([np.zeros((2, 3))], noise_seed=0, shape=(3, 2))


def test_reshape_flatten_roundtrip():
    y = np.arange(24.0)
    Y = reshape(y, 4)
    assert Y.shape == (4, 6)
    # column l is the l-th length-4 block of the flat vector
    assert np.array_equal(Y[:, 0], y[:4])
    assert np.array_equal(Y[:, 5], y[20:])
    assert np.array_equal(flatten(Y), y)
    with pytest.raises(ValueError):
        reshape(np.arange(25.0), 4)
