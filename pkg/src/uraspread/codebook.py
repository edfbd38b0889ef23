"""Random spreading codebook and the bits <-> column-index map."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Codebook:
    columns: np.ndarray      # (n_s, M_s), each column rescaled to column_norm_sq
    column_norm_sq: float
    seed: object = None      # entropy used for generation, kept for audits

    @property
    def n_s(self) -> int:
        return self.columns.shape[0]

    @property
    def M_s(self) -> int:
        return self.columns.shape[1]


def generate_codebook(seed, n_s: int, M_s: int, target_norm_sq: float) -> Codebook:
    """i.i.d. standard Gaussian columns, each rescaled to exact squared norm
    ``target_norm_sq``.  Deterministic given the seed."""
    if n_s < 1 or M_s < 1 or target_norm_sq <= 0:
        raise ValueError("need n_s >= 1, M_s >= 1, target_norm_sq > 0")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n_s, M_s))
    norms = np.linalg.norm(A, axis=0)
    # a zero column has probability zero; regenerate defensively
    while np.any(norms == 0.0):  # pragma: no cover
        bad = norms == 0.0
        A[:, bad] = rng.standard_normal((n_s, int(bad.sum())))
        norms = np.linalg.norm(A, axis=0)
    A *= np.sqrt(target_norm_sq) / norms
    return Codebook(columns=A, column_norm_sq=float(target_norm_sq), seed=seed)


def select_sequence(w_s: np.ndarray, B_s: int | None = None) -> int:
    """Big-endian bits -> column index."""
    w_s = np.asarray(w_s)
    if B_s is not None and w_s.shape != (B_s,):
        raise ValueError(f"expected {B_s} sequence bits, got shape {w_s.shape}")
    idx = 0
    for b in w_s:
        idx = (idx << 1) | int(b)
    return idx


def invert_sequence(index: int, B_s: int) -> np.ndarray:
    """Column index -> big-endian bits; inverse of select_sequence."""
    if not 0 <= index < (1 << B_s):
        raise ValueError(f"index {index} out of range for B_s={B_s}")
    return np.array([(index >> (B_s - 1 - i)) & 1 for i in range(B_s)],
                    dtype=np.uint8)


_HEADER = struct.Struct("<ii")


def export_codebook(cb: Codebook, path: str | Path) -> None:
    """8-byte header (n_s, M_s as int32 LE) then row-major float64 entries."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(cb.n_s, cb.M_s))
        fh.write(np.ascontiguousarray(cb.columns, dtype=np.float64).tobytes())


def import_codebook(path: str | Path) -> Codebook:
    raw = Path(path).read_bytes()
    n_s, M_s = _HEADER.unpack_from(raw)
    A = np.frombuffer(raw, dtype=np.float64, offset=_HEADER.size)
    if A.size != n_s * M_s:
        raise ValueError(f"{path}: expected {n_s * M_s} entries, found {A.size}")
    A = A.reshape(n_s, M_s).copy()
    return Codebook(columns=A, column_norm_sq=float(np.sum(A[:, 0] ** 2)),
                    seed=None)
