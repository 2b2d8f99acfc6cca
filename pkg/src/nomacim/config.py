"""Radio parameters of the downlink cell and a flat ``key=value`` reader."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class RadioConfig:
    """Cell and link constants.

    Defaults follow the simulation table of the reference setup: 5 MHz
    shared by 6 sub-channels, -170 dBm/Hz noise, 2 bps/Hz minimum rate,
    12 W at the base station and users between 50 m and 500 m.
    """

    total_bandwidth_hz: float = 5.0e6
    num_channels: int = 6
    noise_psd_dbm_per_hz: float = -170.0
    pathloss_exponent: float = 3.0
    min_rate_bps_per_hz: float = 2.0
    total_power_w: float = 12.0
    cell_radius_m: float = 500.0
    min_distance_m: float = 50.0

    def __post_init__(self):
        if self.total_bandwidth_hz <= 0:
            raise ValueError("total_bandwidth_hz must be positive")
        if int(self.num_channels) != self.num_channels or self.num_channels < 1:
            raise ValueError("num_channels must be a positive integer")
        if self.pathloss_exponent <= 0:
            raise ValueError("pathloss_exponent must be positive")
        if self.min_rate_bps_per_hz <= 1:
            # the closed-form split needs 2**R_min > 2
            raise ValueError("min_rate_bps_per_hz must exceed 1")
        if self.total_power_w <= 0:
            raise ValueError("total_power_w must be positive")
        if not 0 < self.min_distance_m <= self.cell_radius_m:
            raise ValueError("need 0 < min_distance_m <= cell_radius_m")

    @property
    def channel_bandwidth_hz(self) -> float:
        return self.total_bandwidth_hz / self.num_channels

    @property
    def qos_factor(self) -> float:
        """``A = 2**R_min``; the minimum SINR of any served user is ``A - 1``."""
        return 2.0 ** self.min_rate_bps_per_hz

    @property
    def noise_power_w(self) -> float:
        psd_w_per_hz = 10.0 ** (self.noise_psd_dbm_per_hz / 10.0) * 1e-3
        return psd_w_per_hz * self.channel_bandwidth_hz

    @property
    def min_rate_bps(self) -> float:
        return self.min_rate_bps_per_hz * self.channel_bandwidth_hz

    def replace(self, **changes) -> "RadioConfig":
        return dataclasses.replace(self, **changes)


def read_key_values(path) -> dict[str, str]:
    """Parse a flat ``key=value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def coerce_fields(cls, values: dict[str, str]) -> dict:
    """Pick the entries of ``values`` naming fields of dataclass ``cls`` and
    convert them to the field's declared type."""
    out = {}
    for f in dataclasses.fields(cls):
        if f.name not in values:
            continue
        raw = values[f.name]
        kind = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", "")
        if kind.startswith("int"):
            out[f.name] = int(raw)
        elif kind.startswith("float"):
            out[f.name] = float(raw)
        elif kind.startswith("bool"):
            out[f.name] = raw.lower() in ("1", "true", "yes", "on")
        elif kind.startswith("tuple"):
            out[f.name] = tuple(float(v) for v in raw.replace(",", " ").split())
        else:
            out[f.name] = raw
    return out


def format_float(x: float) -> str:
    """17 significant digits: enough for an exact float64 round trip."""
    if math.isinf(x) or math.isnan(x):
        return repr(float(x))
    return format(float(x), ".17g")
