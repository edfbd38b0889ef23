"""System parameters, presets and validation.

All scalar knobs of the scheme live in a single immutable ``SystemParams``
record.  The transmit power P is always derived from Eb/N0 against the
*nominal* channel-use budget ``n_nominal`` (Eb/N0 = n*P / 2B), even when the
effective frame n_s*n_c slightly exceeds it (see the Ka=150 preset).
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass
from pathlib import Path


class ConfigError(ValueError):
    pass


def derive_power(ebn0_db: float, n: int, B: int) -> float:
    """Per-channel-use power P such that n*P/(2*B) = 10^(ebn0_db/10)."""
    if n <= 0 or B <= 0:
        raise ConfigError(f"need n > 0 and B > 0, got n={n}, B={B}")
    return (2.0 * B / n) * 10.0 ** (ebn0_db / 10.0)


def ebn0_db_from_power(P: float, n: int, B: int) -> float:
    import math

    return 10.0 * math.log10(n * P / (2.0 * B))


@dataclass(frozen=True)
class SystemParams:
    n: int                  # channel uses actually simulated (n_s * n_c may equal this)
    B: int                  # payload bits per user
    B_s: int                # bits selecting the spreading sequence
    B_c: int                # bits fed to the channel code (B - B_s)
    n_s: int                # spreading length
    n_c: int                # polar blocklength
    K_a: int                # active users
    r: int                  # CRC length
    list_size: int
    ebn0_db: float
    P: float                # derived from ebn0_db and n_nominal
    K_tot: int = 0          # total population; informational only (0 = unspecified)
    K_delta: int = 10       # detector over-selection margin
    g: int = 1              # energy-detector group size
    pe_target: float = 0.05
    seed: int = 0
    n_nominal: int = 0      # energy-accounting n; 0 means "same as n"

    @property
    def M_s(self) -> int:
        return 1 << self.B_s

    @property
    def energy_n(self) -> int:
        return self.n_nominal if self.n_nominal else self.n

    @property
    def column_norm_sq(self) -> float:
        # n_c * ||a||^2 = n*P, the hard per-user energy budget
        return self.energy_n * self.P / self.n_c

    def fingerprint(self) -> str:
        payload = repr(dataclasses.astuple(self)).encode()
        return hashlib.sha256(payload).hexdigest()[:12]


def make_params(*, n: int, B: int, B_s: int, n_s: int, n_c: int, K_a: int,
                r: int, list_size: int, ebn0_db: float, **kw) -> SystemParams:
    n_nominal = kw.pop("n_nominal", 0)
    return SystemParams(
        n=n, B=B, B_s=B_s, B_c=B - B_s, n_s=n_s, n_c=n_c, K_a=K_a, r=r,
        list_size=list_size, ebn0_db=ebn0_db,
        P=derive_power(ebn0_db, n_nominal if n_nominal else n, B),
        n_nominal=n_nominal, **kw)


def with_ebn0(params: SystemParams, ebn0_db: float) -> SystemParams:
    """Same system at a different operating Eb/N0 (P re-derived)."""
    return dataclasses.replace(
        params, ebn0_db=ebn0_db,
        P=derive_power(ebn0_db, params.energy_n, params.B))


# (B_s, n_c, n_s, list_size, r) per active-user range; n=30000, B=100.
_PRESET_ROWS = (
    (25, 125, 9, 1024, 29, 1024, 16),
    (150, 150, 10, 512, 59, 128, 12),
    (175, 250, 12, 256, 117, 128, 10),
)


def preset(K_a: int, ebn0_db: float = 0.0, **kw) -> SystemParams:
    """Encoding parameters for a given number of active users (n=30000, B=100).

    For Ka=150 the tabulated code has n_s*n_c = 30208 > 30000; the effective
    frame is stretched to 30208 while power stays metered against the nominal
    30000 uses (conservative energy accounting).
    """
    for lo, hi, B_s, n_c, n_s, lst, r in _PRESET_ROWS:
        if lo <= K_a <= hi:
            n = 30000
            n_nominal = 0
            if n_s * n_c > n:
                n_nominal, n = n, n_s * n_c
            return make_params(n=n, B=100, B_s=B_s, n_s=n_s, n_c=n_c,
                               K_a=K_a, r=r, list_size=lst, ebn0_db=ebn0_db,
                               n_nominal=n_nominal, **kw)
    raise ConfigError(f"no preset covers K_a={K_a} (supported: 25..250)")


def validate(params: SystemParams) -> list[str]:
    """Returns all invariant violations (empty list = ok)."""
    p = params
    out = []
    if p.B_s + p.B_c != p.B:
        out.append(f"B_s+B_c = {p.B_s + p.B_c} != B = {p.B}")
    if p.n_s * p.n_c > p.n:
        out.append(f"n_s*n_c = {p.n_s * p.n_c} > n = {p.n}")
    if p.n_c & (p.n_c - 1) or p.n_c < 2:
        out.append(f"n_c = {p.n_c} is not a power of two")
    if not p.B_c + p.r < p.n_c:
        out.append(f"B_c+r = {p.B_c + p.r} >= n_c = {p.n_c}")
    if p.K_a + p.K_delta > p.M_s:
        out.append(f"K_a+K_delta = {p.K_a + p.K_delta} > M_s = {p.M_s}")
    if p.K_delta < 0:
        out.append(f"K_delta = {p.K_delta} < 0")
    if p.g < 1:
        out.append(f"g = {p.g} < 1")
    if p.list_size < 1:
        out.append(f"list_size = {p.list_size} < 1")
    if not 0.0 < p.pe_target < 1.0:
        out.append(f"pe_target = {p.pe_target} outside (0,1)")
    expected = derive_power(p.ebn0_db, p.energy_n, p.B)
    if abs(p.P - expected) > 1e-12 * expected:
        out.append(f"P = {p.P} inconsistent with ebn0_db = {p.ebn0_db}")
    return out


_INT_FIELDS = {"n", "B", "B_s", "n_s", "n_c", "K_a", "K_tot", "r",
               "list_size", "K_delta", "g", "seed", "n_nominal"}


def load_config(path: str | Path) -> SystemParams:
    """Flat key=value file; '#' starts a comment.  Requires at least the
    code geometry and ebn0_db; everything else takes its default."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        values[key] = int(val) if key in _INT_FIELDS else float(val)
    required = {"n", "B", "B_s", "n_s", "n_c", "K_a", "r", "list_size", "ebn0_db"}
    missing = required - values.keys()
    if missing:
        raise ConfigError(f"{path}: missing keys {sorted(missing)}")
    try:
        return make_params(**values)  # type: ignore[arg-type]
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
