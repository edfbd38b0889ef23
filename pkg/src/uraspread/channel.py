"""Transmit-signal construction and the Gaussian multiple-access channel.

A transmit signal is kept in its n_s x n_c matrix form (column l is the
l-th coded symbol times the spreading sequence); the flat length n_s*n_c
vector view is related by reshape/flatten below.
"""

from __future__ import annotations

import numpy as np


def spread(v: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Outer product a v^T: column l equals v(l) * a."""
    v = np.asarray(v, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    if v.ndim != 1 or a.ndim != 1:
        raise ValueError("spread expects 1-D symbol and sequence vectors")
    return np.outer(a, v)


def gmac(signals: list[np.ndarray], noise_seed, shape: tuple[int, int] | None = None,
         zero_noise: bool = False) -> np.ndarray:
    """Superimposes the given signals and adds unit-variance AWGN.

    Summation runs over a stacked array so that re-summing the same signals
    in the same order cancels exactly (relied on by zero-noise tests)."""
    if signals:
        shapes = {s.shape for s in signals}
        if len(shapes) != 1:
            raise ValueError(f"signal shape mismatch: {shapes}")
        if shape is not None and signals[0].shape != shape:
            raise ValueError(f"signals have shape {signals[0].shape}, expected {shape}")
        Y = np.sum(np.stack(signals), axis=0)
    else:
        if shape is None:
            raise ValueError("need an explicit shape when no signals are given")
        Y = np.zeros(shape)
    if not zero_noise:
        Y = Y + np.random.default_rng(noise_seed).standard_normal(Y.shape)
    return Y


def reshape(y: np.ndarray, n_s: int) -> np.ndarray:
    """Length n_s*n_c vector -> n_s x n_c matrix, column l = l-th symbol block."""
    y = np.asarray(y)
    if y.ndim != 1 or y.size % n_s:
        raise ValueError(f"length {y.size} is not a multiple of n_s={n_s}")
    return y.reshape(-1, n_s).T


def flatten(Y: np.ndarray) -> np.ndarray:
    """Inverse of reshape."""
    return np.asarray(Y).T.reshape(-1)
