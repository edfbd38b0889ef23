"""Link-level simulator for unsourced Gaussian random access built from
random spreading, CRC-aided polar coding, MMSE multiuser estimation and
successive interference cancellation."""

from .codebook import (Codebook, generate_codebook, invert_sequence,
                       select_sequence)
from .config import (SystemParams, derive_power, load_config, make_params,
                     preset, validate, with_ebn0)
from .detector import DetectionResult, detect_active, energy_statistic
from .harness import (SweepRow, TrialResult, aggregate, bootstrap_ci,
                      build_code, find_min_ebn0, run_trial, run_trials, sweep)
from .mmse import SoftEstimate, compute_llrs, mmse_estimate, mmse_filter, mse_per_user
from .polar import (PolarCode, bpsk_modulate, construct_frozen_set, crc_append,
                    crc_check, make_polar_code, polar_encode, scl_decode,
                    scl_decode_batch)
from .sic import DecodeResult, IterationTrace, pupe, sic_decode, subtract

__version__ = "0.1.0"
