"""CRC-aided polar code: construction, encoding, BPSK and list decoding.

Conventions (fixed artifact-wide):
  * natural bit order, generator F^(x m) with F = [[1,0],[1,1]], no
    bit-reversal; payload bits fill the unfrozen positions in ascending index
    order, frozen positions are 0;
  * positive LLR means bit 0 (BPSK maps bit 0 -> +1);
  * CRC is systematic, MSB-first, zero initial register, no reflection and
    no final XOR, appended after the information bits.

The list decoder keeps exact path metrics (log-domain box-plus and
pm += log(1+exp(-(1-2u)*llr))), so with a list covering every information
pattern its decision coincides with maximum likelihood.  It is vectorized
over both list paths and a batch of independent LLR vectors, which is what
makes the multiuser SIC loop affordable in numpy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# generator polynomials (MSB-first, including both end coefficients)
CRC_POLYS = {
    16: 0x11021,   # x^16+x^12+x^5+1
    12: 0x180F,    # x^12+x^11+x^3+x^2+x+1
    10: 0x633,     # x^10+x^9+x^5+x^4+x+1
    4: 0x13,       # x^4+x+1, used by the small-code oracle tests
}


@dataclass(frozen=True)
class PolarCode:
    n_c: int
    k: int                    # information length, payload + CRC
    frozen_mask: np.ndarray   # bool, length n_c, True = frozen
    crc_poly: int             # MSB-first generator polynomial
    crc_len: int
    list_size: int
    design_snr_db: float

    @property
    def payload_len(self) -> int:
        return self.k - self.crc_len

    def frozen_hex(self) -> str:
        return np.packbits(self.frozen_mask.astype(np.uint8)).tobytes().hex()


def bhattacharyya(n_c: int, design_snr_db: float) -> np.ndarray:
    """Bhattacharyya parameters of the n_c synthetic channels, natural order.

    z0 = exp(-snr); the minus transform (index bit 0) maps z -> 2z - z^2,
    the plus transform (index bit 1) maps z -> z^2, applied MSB-first.
    """
    snr = 10.0 ** (design_snr_db / 10.0)
    z = np.array([np.exp(-snr)], dtype=np.float64)
    m = int(np.log2(n_c))
    for _ in range(m):
        # refine every channel: new LSB 0 = minus, 1 = plus.  The index bit
        # order must match the decode schedule (MSB drives the root split).
        nxt = np.empty(2 * z.size)
        nxt[0::2] = 2.0 * z - z * z
        nxt[1::2] = z * z
        z = nxt
    return z


def construct_frozen_set(n_c: int, k: int, design_snr_db: float) -> np.ndarray:
    """Frozen mask with the k most reliable channels unfrozen.

    Ties broken toward lower index; the unfrozen sets are nested in k."""
    if n_c < 2 or n_c & (n_c - 1):
        raise ValueError(f"n_c = {n_c} is not a power of two")
    if not 0 < k <= n_c:
        raise ValueError(f"need 0 < k <= n_c, got k={k}, n_c={n_c}")
    z = bhattacharyya(n_c, design_snr_db)
    order = np.argsort(z, kind="stable")  # ascending z = descending reliability
    mask = np.ones(n_c, dtype=bool)
    mask[order[:k]] = False
    return mask


def make_polar_code(n_c: int, payload_len: int, crc_len: int, list_size: int,
                    design_snr_db: float) -> PolarCode:
    if crc_len not in CRC_POLYS:
        raise ValueError(f"no CRC polynomial registered for r={crc_len}")
    k = payload_len + crc_len
    return PolarCode(n_c=n_c, k=k,
                     frozen_mask=construct_frozen_set(n_c, k, design_snr_db),
                     crc_poly=CRC_POLYS[crc_len], crc_len=crc_len,
                     list_size=list_size, design_snr_db=design_snr_db)


# ---------------------------------------------------------------- CRC

def _crc_remainder(bits: np.ndarray, poly: int, r: int) -> np.ndarray:
    """Remainder of bits * x^r mod poly, supports a batch (..., n) of rows."""
    bits = np.atleast_2d(np.asarray(bits, dtype=np.uint64))
    reg = np.zeros(bits.shape[0], dtype=np.uint64)
    top = np.uint64(1) << np.uint64(r)
    low = np.uint64(poly) & (top - np.uint64(1))
    for j in range(bits.shape[1]):
        fb = (reg >> np.uint64(r - 1)) ^ bits[:, j]
        reg = ((reg << np.uint64(1)) & (top - np.uint64(1))) ^ np.where(
            fb & np.uint64(1), low, np.uint64(0))
    return reg


def crc_append(info: np.ndarray, poly: int, r: int) -> np.ndarray:
    """info followed by the r-bit remainder of info * x^r mod poly."""
    info = np.asarray(info, dtype=np.uint8)
    rem = int(_crc_remainder(info, poly, r)[0])
    tail = np.array([(rem >> (r - 1 - i)) & 1 for i in range(r)], dtype=np.uint8)
    return np.concatenate([info, tail])


def crc_check(bits: np.ndarray, poly: int, r: int) -> bool:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.ndim != 1:
        raise ValueError("crc_check expects a single bit-vector")
    if bits.size <= r:
        raise ValueError(f"word of length {bits.size} cannot carry an r={r} CRC")
    return bool(_crc_remainder(bits, poly, r)[0] == 0)


def _crc_check_batch(bits: np.ndarray, poly: int, r: int) -> np.ndarray:
    return _crc_remainder(bits, poly, r) == 0


# ---------------------------------------------------------------- encoding

def polar_transform(u: np.ndarray) -> np.ndarray:
    """x = u F^(x m) over GF(2), natural order; u may be a batch (..., n)."""
    x = np.array(u, dtype=np.uint8, copy=True)
    n = x.shape[-1]
    half = 1
    while half < n:
        blocks = x.reshape(*x.shape[:-1], -1, 2 * half)
        blocks[..., :half] ^= blocks[..., half:]
        half *= 2
    return x.reshape(np.shape(u))


def polar_encode(payload: np.ndarray, code: PolarCode) -> np.ndarray:
    payload = np.asarray(payload, dtype=np.uint8)
    if payload.shape != (code.k,):
        raise ValueError(f"payload must have length k={code.k}")
    u = np.zeros(code.n_c, dtype=np.uint8)
    u[~code.frozen_mask] = payload
    return polar_transform(u)


def bpsk_modulate(codeword: np.ndarray) -> np.ndarray:
    """bit 0 -> +1, bit 1 -> -1."""
    return 1.0 - 2.0 * np.asarray(codeword, dtype=np.float64)


# ---------------------------------------------------------------- SCL decoder

def _boxplus(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact log-domain check-node update 2*atanh(tanh(a/2)*tanh(b/2)),
    written as sign(a)sign(b)min(|a|,|b|) + log1p(e^-|a+b|) - log1p(e^-|a-b|)
    with in-place ops (this sits on the decoder's innermost hot path)."""
    s = a + b
    np.abs(s, out=s)
    np.negative(s, out=s)
    np.exp(s, out=s)
    np.log1p(s, out=s)
    d = a - b
    np.abs(d, out=d)
    np.negative(d, out=d)
    np.exp(d, out=d)
    np.log1p(d, out=d)
    m = np.minimum(np.abs(a), np.abs(b))
    np.copysign(m, a * b, out=m)   # keeps the sign of -0.0 products
    m += s
    m -= d
    return m


def _softplus(x: np.ndarray) -> np.ndarray:
    # log(1 + exp(-x)), overflow-safe
    return np.logaddexp(0.0, -x)


class _BatchState:
    """Per-level LLR/partial-sum storage shared across paths via row pointers.

    Forking a path only remaps pointers; actual segment data is rewritten
    wholesale for all paths whenever the schedule revisits a level, so stale
    aliased rows are never read."""

    def __init__(self, llrs: np.ndarray, m: int):
        U, N = llrs.shape
        self.U, self.m = U, m
        self.alpha = [None] * (m + 1)
        self.aptr = [None] * (m + 1)
        self.alpha[m] = llrs
        self.aptr[m] = np.arange(U, dtype=np.intp)[:, None]  # (U, P=1)
        self.beta = [None] * m
        self.bptr = [None] * m

    def paths(self) -> int:
        return self.aptr[self.m].shape[1]

    def read_alpha(self, lam: int) -> np.ndarray:
        return self.alpha[lam][self.aptr[lam].ravel()]

    def write_alpha(self, lam: int, values: np.ndarray) -> None:
        self.alpha[lam] = values
        n_rows = values.shape[0]
        self.aptr[lam] = np.arange(n_rows, dtype=np.intp).reshape(
            self.U, n_rows // self.U)

    def read_beta(self, lam: int) -> np.ndarray:
        return self.beta[lam][self.bptr[lam].ravel()]

    def write_beta(self, lam: int, values: np.ndarray) -> None:
        self.beta[lam] = values
        n_rows = values.shape[0]
        self.bptr[lam] = np.arange(n_rows, dtype=np.intp).reshape(
            self.U, n_rows // self.U)

    def remap(self, parent: np.ndarray) -> None:
        """parent: (U, P') path-local parent indices after a fork."""
        U, Pn = parent.shape
        for lam in range(self.m + 1):
            if self.aptr[lam] is not None:
                self.aptr[lam] = np.take_along_axis(
                    self.aptr[lam], parent, axis=1)
            if lam < self.m and self.bptr[lam] is not None:
                self.bptr[lam] = np.take_along_axis(
                    self.bptr[lam], parent, axis=1)


def _scl_paths(llrs: np.ndarray, code: PolarCode):
    """Runs list decoding for a batch of LLR vectors.

    Returns (u, pm): u of shape (U, P, n_c) with the decided input bits of
    every surviving path, pm of shape (U, P) with exact path metrics."""
    U, N = llrs.shape
    m = int(np.log2(N))
    L = code.list_size
    frozen = code.frozen_mask
    st = _BatchState(np.asarray(llrs, dtype=np.float64), m)
    pm = np.zeros((U, 1))
    hist_u: list[np.ndarray | None] = []
    hist_parent: list[np.ndarray | None] = []

    for phi in range(N):
        # propagate LLRs down to the leaf
        if phi == 0:
            start = m - 1
        else:
            t = (phi & -phi).bit_length() - 1
            a = st.read_alpha(t + 1)
            half = 1 << t
            s = st.read_beta(t)
            st.write_alpha(t, a[:, half:] + (1.0 - 2.0 * s) * a[:, :half])
            start = t - 1
        for lam in range(start, -1, -1):
            a = st.read_alpha(lam + 1)
            half = 1 << lam
            st.write_alpha(lam, _boxplus(a[:, :half], a[:, half:]))

        P = st.paths()
        leaf = st.alpha[0][st.aptr[0].ravel()].reshape(U, P)
        if frozen[phi]:
            pm = pm + _softplus(leaf)
            u = np.zeros((U, P), dtype=np.uint8)
            hist_u.append(None)
            hist_parent.append(None)
        else:
            cand = np.concatenate([pm + _softplus(leaf),
                                   pm + _softplus(-leaf)], axis=1)  # (U, 2P)
            if 2 * P <= L:
                parent = np.tile(np.arange(P, dtype=np.intp), (U, 2))
                u = np.broadcast_to(
                    np.concatenate([np.zeros(P, np.uint8),
                                    np.ones(P, np.uint8)]), (U, 2 * P)).copy()
                pm = cand
            else:
                sel = np.argsort(cand, axis=1, kind="stable")[:, :L]
                parent = (sel % P).astype(np.intp)
                u = (sel // P).astype(np.uint8)
                pm = np.take_along_axis(cand, sel, axis=1)
            st.remap(parent)
            hist_u.append(u)
            hist_parent.append(parent)

        # propagate partial sums up
        val = u.reshape(-1, 1)
        lam = 0
        while lam < m and (phi >> lam) & 1:
            val = np.concatenate([st.read_beta(lam) ^ val, val], axis=1)
            lam += 1
        if lam < m:
            st.write_beta(lam, val)

    # reconstruct decisions by backtracking the fork genealogy
    P = st.paths()
    u_full = np.zeros((U, P, N), dtype=np.uint8)
    cur = np.broadcast_to(np.arange(P, dtype=np.intp), (U, P)).copy()
    for phi in range(N - 1, -1, -1):
        if hist_u[phi] is None:
            continue
        u_full[:, :, phi] = np.take_along_axis(hist_u[phi], cur, axis=1)
        cur = np.take_along_axis(hist_parent[phi], cur, axis=1)
    return u_full, pm


def scl_decode_batch(llrs: np.ndarray, code: PolarCode):
    """CRC-aided SCL over a batch of independent LLR vectors (U, n_c).

    Returns a list of U entries: (payload, path_metric) on success, None when
    no surviving path passes the CRC."""
    llrs = np.atleast_2d(np.asarray(llrs, dtype=np.float64))
    if llrs.shape[1] != code.n_c:
        raise ValueError(f"LLR length {llrs.shape[1]} != n_c = {code.n_c}")
    if not np.all(np.isfinite(llrs)):
        raise ValueError("LLRs must be finite")
    U = llrs.shape[0]
    u_full, pm = _scl_paths(llrs, code)
    P = u_full.shape[1]
    info = u_full[:, :, ~code.frozen_mask]          # (U, P, k)
    ok = _crc_check_batch(info.reshape(U * P, code.k),
                          code.crc_poly, code.crc_len).reshape(U, P)
    out = []
    for i in range(U):
        valid = np.flatnonzero(ok[i])
        if valid.size == 0:
            out.append(None)
            continue
        best = valid[np.argmin(pm[i, valid])]
        out.append((info[i, best, :code.payload_len].copy(),
                    float(pm[i, best])))
    return out


def scl_decode(llrs: np.ndarray, code: PolarCode):
    """Single-vector wrapper; returns (payload, metric) or None."""
    return scl_decode_batch(np.asarray(llrs)[None, :], code)[0]
