"""Successive interference cancellation around the detector/MMSE/decoder loop.

Each iteration: detect the K strongest sequences on the residual, MMSE-filter,
list-decode every detected index, keep the CRC-valid payloads, and rebuild the
residual.  The residual is recomputed as (original Y) minus the sum of all
signals cancelled so far, accumulated in one canonical order; algebraically
identical to the incremental update, and it makes zero-noise cancellation
exact in floating point once every user is recovered.

Already-decoded sequence indices stay eligible for re-detection: two users
colliding on one column are decoded across different iterations.

A CRC-valid candidate is cancelled only if subtracting its re-encoded signal
strictly decreases the residual energy.  Without this gate, a strong user's
codeword re-appears (scaled) on every correlated codebook column, decodes
CRC-valid there, and the resulting never-transmitted "ghost" both corrupts
the residual and consumes the K_a-message output quota.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codebook import Codebook, invert_sequence
from .config import SystemParams
from .detector import detect_active
from .mmse import mmse_estimate
from .polar import PolarCode, bpsk_modulate, polar_encode, scl_decode_batch

# cap on U*P*n_c float64 cells per decoder call, keeps peak RSS modest
_MAX_DECODE_CELLS = 24_000_000


@dataclass(frozen=True)
class IterationTrace:
    t: int
    detected: np.ndarray          # detector output D^t
    decoded: tuple                # ((column index, payload bits), ...) new this round
    residual_energy: float        # ||Y^{t+1}||_F^2
    decode_attempts: int


@dataclass
class DecodeResult:
    recovered: list[np.ndarray] = field(default_factory=list)  # full B-bit messages
    traces: list[IterationTrace] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.traces)


def reencode(payload: np.ndarray, code: PolarCode) -> np.ndarray:
    """CRC-extended payload -> modulated codeword (payload excludes the CRC
    only when shorter than k; decoded payloads come back CRC-stripped)."""
    from .polar import crc_append

    payload = np.asarray(payload, dtype=np.uint8)
    if payload.size == code.payload_len:
        payload = crc_append(payload, code.crc_poly, code.crc_len)
    return bpsk_modulate(polar_encode(payload, code))


def reconstruct_signal(index: int, payload: np.ndarray,
                       codebook: Codebook, code: PolarCode) -> np.ndarray:
    return np.outer(codebook.columns[:, index], reencode(payload, code))


def subtract(Y: np.ndarray, decoded: list[tuple[int, np.ndarray]],
             codebook: Codebook, code: PolarCode) -> np.ndarray:
    """Y minus the re-encoded signals of the given (index, payload) pairs."""
    out = np.array(Y, copy=True)
    for index, payload in decoded:
        out -= reconstruct_signal(index, payload, codebook, code)
    return out


def _bits_to_int(bits: np.ndarray) -> int:
    val = 0
    for b in bits:
        val = (val << 1) | int(b)
    return val


_FIRST_PASS_LIST = 64


def _decode_chunked(llr: np.ndarray, code: PolarCode):
    """scl_decode_batch in user chunks sized to bound decoder memory."""
    U = llr.shape[0]
    chunk = max(1, _MAX_DECODE_CELLS // (code.list_size * code.n_c))
    out = []
    for lo in range(0, U, chunk):
        out.extend(scl_decode_batch(llr[lo:lo + chunk], code))
    return out


def _decode_detected(llr: np.ndarray, code: PolarCode):
    """Adaptive-list decoding: everyone at a small list first, then only the
    CRC failures again at the full list.  A CRC-valid small-list result is
    kept (with r-bit CRCs a valid wrong word is ~2^-r improbable), so the
    output matches full-list decoding except on that negligible event."""
    if code.list_size <= _FIRST_PASS_LIST:
        return _decode_chunked(llr, code)
    import dataclasses
    first = dataclasses.replace(code, list_size=_FIRST_PASS_LIST)
    out = _decode_chunked(llr, first)
    retry = [i for i, r in enumerate(out) if r is None]
    if retry:
        full = _decode_chunked(llr[retry], code)
        for i, r in zip(retry, full):
            out[i] = r
    return out


def sic_decode(Y: np.ndarray, codebook: Codebook, params: SystemParams,
               code: PolarCode, mse_mode: str = "analytic",
               gain_compensated: bool = False,
               max_iterations: int | None = None) -> DecodeResult:
    if Y.shape != (params.n_s, params.n_c):
        raise ValueError(f"Y has shape {Y.shape}, expected "
                         f"({params.n_s}, {params.n_c})")
    if max_iterations is None:
        max_iterations = 2 * params.K_a
    Y0 = np.asarray(Y, dtype=np.float64)
    residual = np.array(Y0, copy=True)
    result = DecodeResult()
    cancelled: dict[tuple[int, int], np.ndarray] = {}  # (index, payload int) -> signal

    for t in range(1, max_iterations + 1):
        K = min(max(params.K_a - len(result.recovered), 0) + params.K_delta,
                codebook.M_s)
        K = max(K, 1)
        det = detect_active(residual, codebook, K, params.g)
        A_D = codebook.columns[:, det.indices]
        est = mmse_estimate(A_D, residual, mse_mode=mse_mode,
                            gain_compensated=gain_compensated)
        decoded = _decode_detected(est.llr, code)

        new_pairs = []
        work = residual
        for col, res in zip(det.indices, decoded):
            if res is None:
                continue
            if len(result.recovered) >= params.K_a:
                break
            payload, _metric = res
            key = (int(col), _bits_to_int(payload))
            if key in cancelled:
                continue  # identical signal already removed once
            sig = reconstruct_signal(int(col), payload, codebook, code)
            # subtraction must strictly reduce the residual energy; this
            # rejects "ghosts" (a strong user's codeword re-decoded on a
            # correlated column, CRC-valid but transmitted by nobody)
            if 2.0 * float(np.vdot(work, sig)) <= float(np.vdot(sig, sig)):
                continue
            work = work - sig
            cancelled[key] = sig
            new_pairs.append((int(col), payload))
            result.recovered.append(np.concatenate(
                [invert_sequence(int(col), params.B_s), payload]))

        if cancelled:
            stack = np.stack([cancelled[k] for k in sorted(cancelled)])
            residual = Y0 - np.sum(stack, axis=0)
        res_energy = float(np.sum(residual ** 2))
        result.traces.append(IterationTrace(
            t=t, detected=det.indices, decoded=tuple(new_pairs),
            residual_energy=res_energy, decode_attempts=K))
        if not new_pairs or len(result.recovered) >= params.K_a:
            break
    return result


def pupe(sent: list[np.ndarray], result: DecodeResult) -> float:
    """Fraction of active users whose message is missing from the recovered
    list (set membership: duplicate senders of one message share one entry)."""
    recovered = {_bits_to_int(m) for m in result.recovered}
    missing = sum(1 for m in sent if _bits_to_int(m) not in recovered)
    return missing / len(sent)
