"""Correlation-based energy detector over the spreading codebook.

The per-column statistic sums |<y_block, a_j>| over symbol blocks.  For
group size g > 1 the nominal form maximizes over sign patterns b in {-1,+1}^g
per group; that maximum separates per symbol (max_b sum b_l c_l = sum |c_l|),
so the grouped statistic collapses to the g=1 statistic restricted to full
groups.  We compute it through that identity; the degeneracy is pinned by a
regression test rather than resolved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codebook import Codebook

DEFAULT_K_DELTA = 10


@dataclass(frozen=True)
class DetectionResult:
    indices: np.ndarray   # K column indices, descending score
    scores: np.ndarray    # e_j for all M_s columns


def _group_scores(corr_abs: np.ndarray, g: int) -> np.ndarray:
    """corr_abs: (..., n_c) |<y_l, a_j>| values; sums full groups of g."""
    n_c = corr_abs.shape[-1]
    if g < 1:
        raise ValueError(f"g = {g} < 1")
    n_full = (n_c // g) * g
    return corr_abs[..., :n_full].sum(axis=-1)


def energy_statistic(Y: np.ndarray, a_j: np.ndarray, g: int = 1) -> float:
    """e_j = sum over groups of max over sign patterns of the correlation."""
    corr = np.abs(np.asarray(a_j) @ np.asarray(Y))
    return float(_group_scores(corr, g))


def detect_active(Y: np.ndarray, codebook: Codebook, K: int, g: int = 1) -> DetectionResult:
    """Scores all M_s columns and returns the K best (ties to lower index)."""
    if not 1 <= K <= codebook.M_s:
        raise ValueError(f"need 1 <= K <= M_s, got K={K}, M_s={codebook.M_s}")
    corr = np.abs(codebook.columns.T @ Y)        # (M_s, n_c)
    scores = _group_scores(corr, g)
    order = np.argsort(-scores, kind="stable")   # stable: ties by lower index
    return DetectionResult(indices=order[:K].copy(), scores=scores)
