"""Built-in fast oracle and property checks, runnable without the test tree."""

from __future__ import annotations

import dataclasses

import numpy as np

from . import harness
from .codebook import generate_codebook
from .config import preset
from .detector import detect_active
from .mmse import mmse_filter, mse_per_user
from .polar import (crc_append, crc_check, make_polar_code, polar_transform,
                    scl_decode_batch)


def _ml_oracle(llr: np.ndarray, code) -> np.ndarray:
    """Brute-force ML over all CRC-valid codewords (small codes only)."""
    n_info = code.payload_len
    best, best_metric = None, np.inf
    for msg in range(1 << n_info):
        bits = np.array([(msg >> (n_info - 1 - i)) & 1 for i in range(n_info)],
                        dtype=np.uint8)
        payload = crc_append(bits, code.crc_poly, code.crc_len)
        u = np.zeros(code.n_c, dtype=np.uint8)
        u[~code.frozen_mask] = payload
        x = polar_transform(u)
        metric = float(np.sum(np.logaddexp(0.0, -(1.0 - 2.0 * x) * llr)))
        if metric < best_metric:
            best, best_metric = bits, metric
    return best


def check_polar_ml(n_vectors: int = 200, seed: int = 1) -> bool:
    code = make_polar_code(16, 4, 4, 256, 0.0)
    rng = np.random.default_rng(seed)
    llrs = rng.normal(0.0, 2.0, size=(n_vectors, 16))
    decoded = scl_decode_batch(llrs, code)
    for llr, res in zip(llrs, decoded):
        want = _ml_oracle(llr, code)
        if res is None or not np.array_equal(res[0], want):
            return False
    return True


def check_crc() -> bool:
    text = np.unpackbits(np.frombuffer(b"123456789", dtype=np.uint8))
    word = crc_append(text, 0x11021, 16)
    rem = 0
    for b in word[-16:]:
        rem = (rem << 1) | int(b)
    return rem == 0x31C3 and crc_check(word, 0x11021, 16)


def check_mmse(n_instances: int = 50, seed: int = 2) -> bool:
    rng = np.random.default_rng(seed)
    for _ in range(n_instances):
        n_s = int(rng.integers(4, 33))
        K = int(rng.integers(1, 17))
        A = rng.normal(size=(n_s, K))
        Y = rng.normal(size=(n_s, 8))
        R_inv = np.linalg.inv(A @ A.T + np.eye(n_s))
        if np.max(np.abs(mmse_filter(A, Y) - A.T @ R_inv @ Y)) > 1e-9:
            return False
        want = 1.0 - np.diag(A.T @ R_inv @ A)
        if np.max(np.abs(mse_per_user(A) - want)) > 1e-9:
            return False
    return True


def check_zero_noise_e2e(seed: int = 3) -> bool:
    params = dataclasses.replace(preset(25, 0.55), K_a=2)
    code = harness.build_code(params)
    trial, result = harness.run_trial(params, code, seed, 0, zero_noise=True,
                                      forced_sequence_indices=[3, 7])
    return trial.pupe_realization == 0.0 and \
        result.traces[-1].residual_energy == 0.0


def check_detector(seed: int = 4) -> bool:
    params = preset(25, 0.55)
    cb = generate_codebook(seed, params.n_s, params.M_s, params.column_norm_sq)
    rng = np.random.default_rng(seed)
    true = rng.choice(params.M_s, size=5, replace=False)
    v = 1.0 - 2.0 * rng.integers(0, 2, size=(5, params.n_c))
    Y = sum(np.outer(cb.columns[:, j], v[i]) for i, j in enumerate(true))
    det = detect_active(Y, cb, 5)
    return set(det.indices.tolist()) == set(true.tolist())


CHECKS = [
    ("polar SCL matches brute-force ML", check_polar_ml),
    ("CRC long-division oracle", check_crc),
    ("MMSE dense-inversion oracle", check_mmse),
    ("zero-noise end-to-end cancellation", check_zero_noise_e2e),
    ("energy detector exact support recovery", check_detector),
]


def run(verbose: bool = False) -> int:
    failures = 0
    for name, fn in CHECKS:
        ok = fn()
        failures += not ok
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return 1 if failures else 0
