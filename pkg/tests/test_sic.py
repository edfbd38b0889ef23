import numpy as np
import pytest

from uraspread import channel
from uraspread.codebook import generate_codebook, invert_sequence
from uraspread.config import make_params
from uraspread.polar import crc_append, make_polar_code
from uraspread.sic import (DecodeResult, pupe, reconstruct_signal, reencode,
                           sic_decode, subtract)


def _toy_params(K_a=3, ebn0_db=8.0, **kw):
    return make_params(n=512, B=14, B_s=4, n_s=8, n_c=64, K_a=K_a, r=4,
                       list_size=8, ebn0_db=ebn0_db, K_delta=3, **kw)


def _toy_code(params):
    return make_polar_code(params.n_c, params.B_c, params.r,
                           params.list_size, 2.0)


def _transmit(params, code, cb, payloads, zero_noise, noise_seed=0):
    from uraspread.codebook import select_sequence
    signals = []
    for p in payloads:
        idx = select_sequence(p[:params.B_s], params.B_s)
        signals.append(channel.spread(reencode(p[params.B_s:], code),
                                      cb.columns[:, idx]))
    return channel.gmac(signals, noise_seed, shape=(params.n_s, params.n_c),
                        zero_noise=zero_noise)


def test_reencode_appends_crc_when_needed():
    params = _toy_params()
    code = _toy_code(params)
    info = np.array([1, 0, 1, 1, 0, 0, 1, 0, 1, 1], dtype=np.uint8)
    with_crc = crc_append(info, code.crc_poly, code.crc_len)
    assert np.array_equal(reencode(info, code), reencode(with_crc, code))
    assert reencode(info, code).shape == (params.n_c,)
    assert set(np.unique(reencode(info, code))) <= {-1.0, 1.0}


def test_reconstruct_and_subtract_are_exact():
    params = _toy_params()
    code = _toy_code(params)
    cb = generate_codebook(0, params.n_s, params.M_s, params.column_norm_sq)
    info = np.array([0, 1, 1, 0, 1, 0, 0, 1, 1, 0], dtype=np.uint8)
    S = reconstruct_signal(5, info, cb, code)
    assert S.shape == (params.n_s, params.n_c)
    left = subtract(S, [(5, info)], cb, code)
    assert np.all(left == 0.0)


def test_pupe_counts_missing_messages():
    sent = [np.array([0, 0, 1]), np.array([0, 1, 0]), np.array([0, 0, 1])]
    res = DecodeResult(recovered=[np.array([0, 0, 1])])
    # duplicate senders of one message share the single recovered entry
    assert pupe(sent, res) == pytest.approx(1.0 / 3.0)
    assert pupe(sent, DecodeResult()) == 1.0


def test_sic_zero_noise_recovers_all_and_cancels_exactly():
    params = _toy_params(K_a=3)
    code = _toy_code(params)
    cb = generate_codebook(1, params.n_s, params.M_s, params.column_norm_sq)
    rng = np.random.default_rng(2)
    payloads = rng.integers(0, 2, size=(3, params.B), dtype=np.uint8)
    payloads[:, :params.B_s] = [invert_sequence(i, params.B_s)
                                for i in (2, 9, 14)]
    Y = _transmit(params, code, cb, list(payloads), zero_noise=True)
    res = sic_decode(Y, cb, params, code)
    assert pupe(list(payloads), res) == 0.0
    assert res.traces[-1].residual_energy == 0.0


def test_sic_resolves_a_two_user_collision():
    # same spreading column, different payloads; zero noise.  Needs a real
    # CRC (the toy 4-bit one lets false paths through) and a list wide
    # enough for the half-erased first decode.
    params = make_params(n=512, B=14, B_s=4, n_s=8, n_c=64, K_a=2, r=10,
                         list_size=32, ebn0_db=8.0, K_delta=3)
    code = _toy_code(params)
    cb = generate_codebook(3, params.n_s, params.M_s, params.column_norm_sq)
    rng = np.random.default_rng(4)
    payloads = rng.integers(0, 2, size=(2, params.B), dtype=np.uint8)
    payloads[:, :params.B_s] = invert_sequence(6, params.B_s)
    while np.array_equal(payloads[0], payloads[1]):  # pragma: no cover
        payloads[1, params.B_s:] = rng.integers(0, 2, size=params.B_c)
    Y = _transmit(params, code, cb, list(payloads), zero_noise=True)
    res = sic_decode(Y, cb, params, code)
    assert pupe(list(payloads), res) == 0.0
    # the two messages cannot come out of one decoder call on one column
    assert res.iterations >= 2


def test_sic_trace_bookkeeping():
    params = _toy_params(K_a=2)
    code = _toy_code(params)
    cb = generate_codebook(5, params.n_s, params.M_s, params.column_norm_sq)
    rng = np.random.default_rng(6)
    payloads = rng.integers(0, 2, size=(2, params.B), dtype=np.uint8)
    payloads[:, :params.B_s] = [invert_sequence(i, params.B_s) for i in (1, 12)]
    Y = _transmit(params, code, cb, list(payloads), zero_noise=True)
    res = sic_decode(Y, cb, params, code)
    assert [tr.t for tr in res.traces] == list(range(1, res.iterations + 1))
    for tr in res.traces:
        assert tr.decode_attempts == len(tr.detected)
        assert tr.residual_energy >= 0.0
    assert len(res.recovered) == 2
    for msg in res.recovered:
        assert msg.shape == (params.B,)


def test_sic_rejects_wrong_shape():
    params = _toy_params()
    code = _toy_code(params)
    cb = generate_codebook(0, params.n_s, params.M_s, params.column_norm_sq)
    with pytest.raises(ValueError):
        sic_decode(np.zeros((params.n_s, params.n_c + 1)), cb, params, code)


def test_sic_respects_max_iterations():
    params = _toy_params(K_a=2, ebn0_db=-20.0)   # hopeless SNR
    code = _toy_code(params)
    cb = generate_codebook(7, params.n_s, params.M_s, params.column_norm_sq)
    Y = np.random.default_rng(8).normal(size=(params.n_s, params.n_c))
    res = sic_decode(Y, cb, params, code, max_iterations=3)
    assert res.iterations <= 3
