import numpy as np
import pytest

from uraspread.polar import (CRC_POLYS, _boxplus, _crc_check_batch, _scl_paths,
                             bhattacharyya, bpsk_modulate, construct_frozen_set,
                             crc_append, crc_check, make_polar_code,
                             polar_encode, polar_transform, scl_decode,
                             scl_decode_batch)

# ------------------------------------------------------------------ CRC

def test_crc16_check_value():
    # CRC-16/XMODEM of ASCII "123456789" is 0x31C3
    bits = np.unpackbits(np.frombuffer(b"123456789", dtype=np.uint8))
    word = crc_append(bits, 0x11021, 16)
    tail = 0
    for b in word[-16:]:
        tail = (tail << 1) | int(b)
    assert tail == 0x31C3
    assert crc_check(word, 0x11021, 16)


@pytest.mark.parametrize("r", sorted(CRC_POLYS))
def test_crc_detects_single_bit_errors(r):
    rng = np.random.default_rng(r)
    info = rng.integers(0, 2, size=40, dtype=np.uint8)
    word = crc_append(info, CRC_POLYS[r], r)
    assert crc_check(word, CRC_POLYS[r], r)
    for pos in range(word.size):
        bad = word.copy()
        bad[pos] ^= 1
        assert not crc_check(bad, CRC_POLYS[r], r)


def test_crc_batch_matches_scalar():
    rng = np.random.default_rng(0)
    words = rng.integers(0, 2, size=(32, 24), dtype=np.uint8)
    batch = _crc_check_batch(words, CRC_POLYS[4], 4)
    scalar = np.array([crc_check(w, CRC_POLYS[4], 4) for w in words])
    assert np.array_equal(batch, scalar)


# ------------------------------------------------------------------ encoding

def _generator_matrix(m):
    F = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    G = np.array([[1]], dtype=np.uint8)
    for _ in range(m):
        G = np.kron(F, G)
    return G


@pytest.mark.parametrize("n", [2, 8, 32])
def test_polar_transform_matches_kronecker_generator(n):
    m = int(np.log2(n))
    G = _generator_matrix(m)
    rng = np.random.default_rng(n)
    u = rng.integers(0, 2, size=(5, n), dtype=np.uint8)
    want = (u @ G) % 2
    assert np.array_equal(polar_transform(u), want)


def test_polar_transform_is_involution():
    rng = np.random.default_rng(1)
    u = rng.integers(0, 2, size=64, dtype=np.uint8)
    assert np.array_equal(polar_transform(polar_transform(u)), u)


def test_polar_encode_places_payload_on_unfrozen():
    code = make_polar_code(16, 4, 4, 8, 0.0)
    payload = np.arange(8) % 2
    x = polar_encode(payload.astype(np.uint8), code)
    # invert: u = x G^-1 = x G (involution), frozen positions must be zero
    u = polar_transform(x)
    assert np.all(u[code.frozen_mask] == 0)
    assert np.array_equal(u[~code.frozen_mask], payload)
    with pytest.raises(ValueError):
        polar_encode(np.zeros(3, dtype=np.uint8), code)


def test_bpsk_mapping():
    assert np.array_equal(bpsk_modulate(np.array([0, 1, 0])), [1.0, -1.0, 1.0])


# ------------------------------------------------------------------ construction

def test_bhattacharyya_hand_values():
    z0 = float(np.exp(-10 ** (0.0 / 10.0)))
    m = lambda z: 2 * z - z * z
    p = lambda z: z * z
    z2 = bhattacharyya(2, 0.0)
    assert np.allclose(z2, [m(z0), p(z0)], rtol=1e-15)
    # natural order: the MSB of the channel index selects the first (root)
    # transform, the LSB the last one
    z4 = bhattacharyya(4, 0.0)
    want = [m(m(z0)), p(m(z0)), m(p(z0)), p(p(z0))]
    assert np.allclose(z4, want, rtol=1e-14)


def test_bhattacharyya_extreme_indices():
    # channel 0 (all minus) is the worst, channel n-1 (all plus) the best
    z = bhattacharyya(64, 0.0)
    assert z[0] == np.max(z) and z[63] == np.min(z)


def test_frozen_sets_are_nested():
    prev = None
    for k in (4, 8, 16, 32):
        mask = construct_frozen_set(64, k, 0.0)
        unfrozen = set(np.flatnonzero(~mask).tolist())
        assert len(unfrozen) == k
        if prev is not None:
            assert prev <= unfrozen
        prev = unfrozen


def test_frozen_set_tie_break_to_lower_index():
    # huge design SNR underflows every z to 0: all channels tie, so the k
    # unfrozen ones must be the first k indices
    mask = construct_frozen_set(16, 5, 400.0)
    assert np.array_equal(np.flatnonzero(~mask), np.arange(5))


def test_construct_frozen_set_validates():
    with pytest.raises(ValueError):
        construct_frozen_set(15, 4, 0.0)
    with pytest.raises(ValueError):
        construct_frozen_set(16, 0, 0.0)
    with pytest.raises(ValueError):
        make_polar_code(16, 4, 5, 8, 0.0)   # no CRC-5 registered


# ------------------------------------------------------------------ decoding

def test_boxplus_matches_tanh_form():
    rng = np.random.default_rng(2)
    a = rng.normal(0, 3, 1000)
    b = rng.normal(0, 3, 1000)
    want = 2.0 * np.arctanh(np.tanh(a / 2) * np.tanh(b / 2))
    assert np.allclose(_boxplus(a, b), want, atol=1e-9)


def test_path_metric_equals_negative_log_likelihood():
    # with a list covering every information pattern, each surviving path's
    # metric must equal sum(log(1+exp(-(1-2x)*llr))) of its re-encoded word
    code = make_polar_code(8, 2, 4, 64, 0.0)
    rng = np.random.default_rng(3)
    llr = rng.normal(0, 2, size=8)
    u_full, pm = _scl_paths(llr[None, :], code)
    for path in range(u_full.shape[1]):
        x = polar_transform(u_full[0, path])
        want = float(np.sum(np.logaddexp(0.0, -(1.0 - 2.0 * x) * llr)))
        assert abs(pm[0, path] - want) < 1e-9


def test_scl_decodes_noiseless_codewords():
    code = make_polar_code(64, 10, 4, 8, 0.0)
    rng = np.random.default_rng(4)
    for _ in range(20):
        info = rng.integers(0, 2, size=10, dtype=np.uint8)
        x = polar_encode(crc_append(info, code.crc_poly, code.crc_len), code)
        res = scl_decode(10.0 * bpsk_modulate(x), code)
        assert res is not None and np.array_equal(res[0], info)


def test_scl_batch_matches_single():
    code = make_polar_code(32, 6, 4, 16, 0.0)
    rng = np.random.default_rng(5)
    llrs = rng.normal(0, 1.5, size=(12, 32))
    batch = scl_decode_batch(llrs, code)
    for llr, got in zip(llrs, batch):
        want = scl_decode(llr, code)
        if want is None:
            assert got is None
        else:
            assert np.array_equal(got[0], want[0])
            assert abs(got[1] - want[1]) < 1e-9


def test_scl_rejects_bad_input():
    code = make_polar_code(16, 4, 4, 8, 0.0)
    with pytest.raises(ValueError):
        scl_decode(np.zeros(15), code)
    with pytest.raises(ValueError):
        scl_decode(np.full(16, np.inf), code)


def test_scl_returns_none_without_crc_match():
    # all-frozen-adversarial LLRs: tiny list + strong noise can leave no
    # CRC-valid path; craft one deterministically with list size 1
    code = make_polar_code(16, 8, 4, 1, 0.0)
    rng = np.random.default_rng(6)
    for _ in range(100):
        llr = rng.normal(0, 1, size=16)
        res = scl_decode(llr, code)
        if res is None:
            return
    pytest.fail("expected at least one CRC rejection with list size 1")
