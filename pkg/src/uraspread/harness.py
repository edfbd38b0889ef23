"""Monte Carlo campaign driver: trials, sweeps, minimum-Eb/N0 search, output.

Reproducibility contract: a campaign re-run with the same master seed and
arguments produces byte-identical CSV rows (wall_time is excluded).  Each
trial derives independent sub-streams for codebook, payloads and noise from
(master_seed, trial_index) via numpy SeedSequence spawning.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import channel, sic
from .codebook import generate_codebook, select_sequence
from .config import SystemParams, with_ebn0
from .mmse import mse_per_user
from .polar import PolarCode, make_polar_code
from .sic import pupe, sic_decode

# Fig. 3 operating points of the reference curves, {K_a: required Eb/N0 dB}
REFERENCE_CURVES = {
    "proposed": {25: 0.55, 50: 0.6, 75: 0.7, 100: 0.75, 125: 1.15,
                 150: 1.5, 175: 2.0, 200: 2.7, 225: 3.5, 250: 4.3},
    "random_coding": {25: 0.25, 50: 0.3, 75: 0.35, 100: 0.4, 125: 0.45,
                      150: 0.5, 175: 0.55, 200: 0.6, 225: 0.95, 250: 1.25},
}

CSV_HEADER = ["ka", "ebn0_db", "trials", "pupe", "ci95", "iters", "fingerprint"]


@dataclass(frozen=True)
class TrialResult:
    trial_seed: int
    pupe_realization: float
    iterations: int
    wall_time: float
    detector_misses: int


@dataclass(frozen=True)
class SweepRow:
    K_a: int
    ebn0_db: float
    trials: int
    pupe_mean: float
    pupe_ci95_halfwidth: float
    mean_iterations: float
    fingerprint: str


def default_design_snr_db(params: SystemParams) -> float:
    """Equivalent-channel SNR of the first SIC iteration.

    The MMSE output for user i is (1 - sigma^2) v_i + noise of variance
    sigma^2 (1 - sigma^2), i.e. BPSK at Es/N0 = (1 - sigma^2)/sigma^2;
    sigma^2 is averaged over K_a + K_delta columns of a deterministic probe
    codebook (seed 0)."""
    K = min(params.K_a + params.K_delta, params.M_s)
    probe = generate_codebook(0, params.n_s, params.M_s, params.column_norm_sq)
    sigma = float(np.mean(mse_per_user(probe.columns[:, :K])))
    return 10.0 * math.log10((1.0 - sigma) / sigma)


def build_code(params: SystemParams, design_snr_db: float | None = None) -> PolarCode:
    if design_snr_db is None:
        design_snr_db = default_design_snr_db(params)
    return make_polar_code(params.n_c, params.B_c, params.r,
                           params.list_size, design_snr_db)


def _encode_user(payload: np.ndarray, params: SystemParams, code: PolarCode,
                 cb) -> tuple[int, np.ndarray]:
    idx = select_sequence(payload[:params.B_s], params.B_s)
    v = sic.reencode(payload[params.B_s:], code)
    return idx, channel.spread(v, cb.columns[:, idx])


def run_trial(params: SystemParams, code: PolarCode, master_seed: int,
              trial_index: int, zero_noise: bool = False,
              forced_sequence_indices=None, mse_mode: str = "analytic",
              gain_compensated: bool = False) -> tuple[TrialResult, sic.DecodeResult]:
    t0 = time.perf_counter()
    ss = np.random.SeedSequence(master_seed, spawn_key=(trial_index,))
    cb_seed, payload_seed, noise_seed = ss.spawn(3)

    cb = generate_codebook(cb_seed, params.n_s, params.M_s, params.column_norm_sq)
    rng = np.random.default_rng(payload_seed)
    payloads = rng.integers(0, 2, size=(params.K_a, params.B), dtype=np.uint8)
    if forced_sequence_indices is not None:
        from .codebook import invert_sequence
        for row, idx in zip(payloads, forced_sequence_indices):
            row[:params.B_s] = invert_sequence(int(idx), params.B_s)
    # canonical user order (users are exchangeable); keeps transmit-side and
    # SIC-side signal summations bit-identical for exact cancellation tests
    keys = [(select_sequence(p[:params.B_s], params.B_s),
             sic._bits_to_int(p[params.B_s:])) for p in payloads]
    payloads = payloads[np.lexsort((
        [k[1] for k in keys], [k[0] for k in keys]))]

    encoded = [_encode_user(p, params, code, cb) for p in payloads]
    Y = channel.gmac([s for _, s in encoded], noise_seed,
                     shape=(params.n_s, params.n_c), zero_noise=zero_noise)

    result = sic_decode(Y, cb, params, code, mse_mode=mse_mode,
                        gain_compensated=gain_compensated)
    pe = pupe(list(payloads), result)
    true_idx = {i for i, _ in encoded}
    misses = len(true_idx - set(result.traces[0].detected.tolist()))
    trial = TrialResult(
        trial_seed=int(ss.generate_state(1, np.uint64)[0]),
        pupe_realization=pe, iterations=result.iterations,
        wall_time=time.perf_counter() - t0, detector_misses=misses)
    return trial, result


def _trial_worker(args) -> TrialResult:
    params, code, master_seed, idx, kwargs = args
    return run_trial(params, code, master_seed, idx, **kwargs)[0]


def run_trials(params: SystemParams, code: PolarCode, master_seed: int,
               trials: int, jobs: int = 1, **kwargs) -> list[TrialResult]:
    argv = [(params, code, master_seed, i, kwargs) for i in range(trials)]
    if jobs <= 1:
        return [_trial_worker(a) for a in argv]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_trial_worker, argv, chunksize=1))


def aggregate(params: SystemParams, results: list[TrialResult]) -> SweepRow:
    n_obs = params.K_a * len(results)
    errors = round(sum(r.pupe_realization for r in results) * params.K_a)
    p = errors / n_obs
    hw = 1.96 * math.sqrt(p * (1.0 - p) / n_obs)
    return SweepRow(K_a=params.K_a, ebn0_db=params.ebn0_db,
                    trials=len(results), pupe_mean=p, pupe_ci95_halfwidth=hw,
                    mean_iterations=float(np.mean([r.iterations for r in results])),
                    fingerprint=params.fingerprint())


def bootstrap_ci(results: list[TrialResult], n_boot: int = 2000,
                 seed: int = 0, level: float = 0.95) -> tuple[float, float]:
    """Trial-level bootstrap CI of the mean PUPE (robust to within-trial
    correlation that the pooled binomial interval ignores)."""
    pe = np.array([r.pupe_realization for r in results])
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, pe.size, size=(n_boot, pe.size))
    means = pe[idx].mean(axis=1)
    lo, hi = np.quantile(means, [(1 - level) / 2, (1 + level) / 2])
    return float(lo), float(hi)


def _row_values(row: SweepRow) -> list:
    return [row.K_a, f"{row.ebn0_db:.6g}", row.trials, f"{row.pupe_mean:.8g}",
            f"{row.pupe_ci95_halfwidth:.8g}", f"{row.mean_iterations:.6g}",
            row.fingerprint]


def _append_row(path: Path, row: SweepRow) -> None:
    new = not path.exists()
    with open(path, "a", newline="") as fh:
        w = csv.writer(fh)
        if new:
            w.writerow(CSV_HEADER)
        w.writerow(_row_values(row))
        fh.flush()


def sweep(params: SystemParams, ebn0_grid, trials: int, master_seed: int = 0,
          jobs: int = 1, out: str | Path | None = None,
          design_snr_db: float | None = None, **kwargs) -> list[SweepRow]:
    """One SweepRow per grid point; rows are appended to `out` as they finish
    so an interrupted campaign keeps its partial CSV."""
    grid = [float(e) for e in ebn0_grid]
    if not grid:
        raise ValueError("ebn0_grid must be non-empty")
    rows = []
    for e in grid:
        pt = with_ebn0(params, float(e))
        code = build_code(pt, design_snr_db)
        row = aggregate(pt, run_trials(pt, code, master_seed, trials,
                                       jobs=jobs, **kwargs))
        rows.append(row)
        if out is not None:
            _append_row(Path(out), row)
    return rows


@dataclass(frozen=True)
class MinEbn0Result:
    ebn0_db: float | None     # None = not found on the grid
    rows: tuple
    warning: str | None = None


def find_min_ebn0(params: SystemParams, target_pe: float, lo_db: float,
                  hi_db: float, step_db: float = 0.05, trials: int = 200,
                  master_seed: int = 0, jobs: int = 1,
                  out: str | Path | None = None, **kwargs) -> MinEbn0Result:
    """Smallest grid value whose upper 95% CI of PUPE is <= target_pe."""
    if not (lo_db < hi_db and step_db > 0):
        raise ValueError("need lo_db < hi_db and step_db > 0")
    warning = None
    if trials * params.K_a * target_pe < 10:
        warning = (f"{trials} trials give only {trials * params.K_a} per-user "
                   f"observations; CI resolution is coarse at target {target_pe}")
    n_pts = int(math.floor((hi_db - lo_db) / step_db + 1e-9)) + 1
    rows = []
    for i in range(n_pts):
        e = lo_db + i * step_db
        row = sweep(params, [e], trials, master_seed=master_seed, jobs=jobs,
                    out=out, **kwargs)[0]
        rows.append(row)
        if row.pupe_mean + row.pupe_ci95_halfwidth <= target_pe:
            return MinEbn0Result(ebn0_db=e, rows=tuple(rows), warning=warning)
    return MinEbn0Result(ebn0_db=None, rows=tuple(rows), warning=warning)


def emit_results(rows: list[SweepRow], fmt: str, path: str | Path,
                 params: SystemParams | None = None, traces=None) -> None:
    path = Path(path)
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for row in rows:
                w.writerow(_row_values(row))
    elif fmt == "json":
        doc = {"rows": [dict(zip(CSV_HEADER, _row_values(r))) for r in rows]}
        if params is not None:
            doc["params"] = {f: getattr(params, f)
                             for f in params.__dataclass_fields__}
        if traces is not None:
            doc["traces"] = traces
        path.write_text(json.dumps(doc, indent=2) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def write_reference_curves(path: str | Path) -> None:
    """Companion file with the embedded reference operating points."""
    Path(path).write_text(json.dumps(REFERENCE_CURVES, indent=2) + "\n")


def read_results_csv(path: str | Path) -> list[SweepRow]:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(SweepRow(
                K_a=int(rec["ka"]), ebn0_db=float(rec["ebn0_db"]),
                trials=int(rec["trials"]), pupe_mean=float(rec["pupe"]),
                pupe_ci95_halfwidth=float(rec["ci95"]),
                mean_iterations=float(rec["iters"]),
                fingerprint=rec["fingerprint"]))
    return rows


def trace_rows(result: sic.DecodeResult) -> list[dict]:
    """Structured per-iteration rows for JSON output."""
    return [{"t": tr.t, "detected": len(tr.detected),
             "decoded": len(tr.decoded),
             "residual_energy": tr.residual_energy}
            for tr in result.traces]
