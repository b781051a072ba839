"""Plain key=value campaign configuration.

Unknown keys are rejected; missing keys fall back to the reference system
defaults (rate 2, 10 dB SNR, 100 ms frame of 1 us symbols, 1000-bit packets,
2 replicas, 10 cancellation passes, 1000 trials).  SNR is stored in dB and
converted once to linear; the offered-load grid is kept as its a:b:step spec
so a config round-trips byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ecra import HEADER_SLOTS, HeaderPolicy
from .model import SystemParams

__all__ = [
    "ConfigError",
    "CampaignConfig",
    "parse_config",
    "serialize_config",
    "validate_config",
]

CAMPAIGNS = ("analytic", "masks", "headers", "throughput")

_POSITION_ALIASES = {
    "begin": "begin",
    "beginning": "begin",
    "center": "center",
    "centre": "center",
    "end": "end",
}


class ConfigError(ValueError):
    """Malformed or inconsistent campaign configuration."""


@dataclass
class CampaignConfig:
    campaign: str = ""                 # optional guard: must match the subcommand when set
    rate: float = 2.0                  # information bits per symbol
    snr_db: float = 10.0               # per-user SNR in dB
    frame_us: float = 100000.0         # frame duration in microseconds
    symbol_us: float = 1.0             # symbol duration in microseconds
    payload_bits: int = 1000           # packet payload in bits
    degree: int = 2                    # replicas per user and frame
    max_iter: int = 10                 # cancellation/combining pass budget
    positions: tuple[str, ...] = ("begin", "end")
    header_fraction: float = 0.05      # header copy length as fraction of the packet
    grid: tuple[float, float, float] = (0.05, 1.0, 0.05)  # offered load a:b:step
    trials: int = 1000                 # frames per load point / surviving collisions per k
    seed: int = 0                      # master seed; never wall-clock
    workers: int = 1                   # parallel workers for campaign points

    @property
    def snr(self) -> float:
        """Linear SNR, 10**(snr_db/10)."""
        return 10.0 ** (self.snr_db / 10.0)

    @property
    def frame_len(self) -> int:
        return int(round(self.frame_us / self.symbol_us))

    @property
    def packet_len(self) -> int:
        return int(round(self.payload_bits / self.rate))

    def system_params(self) -> SystemParams:
        return SystemParams(
            rate=self.rate,
            snr=self.snr,
            frame_len=self.frame_len,
            packet_len=self.packet_len,
            replica_degree=self.degree,
            max_sic_iter=self.max_iter,
        )

    def header_policy(self) -> HeaderPolicy:
        return HeaderPolicy.from_fraction(self.positions, self.header_fraction, self.packet_len)

    def g_values(self) -> list[float]:
        a, b, step = self.grid
        n = int(round((b - a) / step)) + 1
        return [round(a + i * step, 12) for i in range(n) if a + i * step <= b + step * 1e-9]


def _parse_positions(value: str) -> tuple[str, ...]:
    tokens = [t.strip().lower() for t in value.split(",") if t.strip()]
    if not tokens:
        raise ValueError("needs at least one position")
    canon = []
    for t in tokens:
        if t not in _POSITION_ALIASES:
            raise ValueError(f"unknown position {t!r}, expected begin/center/end")
        canon.append(_POSITION_ALIASES[t])
    if len(set(canon)) != len(canon):
        raise ValueError("duplicate positions")
    return tuple(p for p in HEADER_SLOTS if p in canon)


def _parse_grid(value: str) -> tuple[float, float, float]:
    parts = value.split(":")
    if len(parts) != 3:
        raise ValueError("grid must be start:stop:step")
    a, b, step = (float(p) for p in parts)
    if a <= 0 or step <= 0 or b < a:
        raise ValueError("grid needs 0 < start <= stop and step > 0")
    return a, b, step


def _parse_campaign(value: str) -> str:
    v = value.strip().lower()
    if v and v not in CAMPAIGNS:
        raise ValueError(f"unknown campaign {v!r}, expected one of {CAMPAIGNS}")
    return v


_PARSERS = {
    "campaign": _parse_campaign,
    "rate": float,
    "snr_db": float,
    "frame_us": float,
    "symbol_us": float,
    "payload_bits": int,
    "degree": int,
    "max_iter": int,
    "positions": _parse_positions,
    "header_fraction": float,
    "grid": _parse_grid,
    "trials": int,
    "seed": int,
    "workers": int,
}


def validate_config(cfg: CampaignConfig):
    """Raise ConfigError naming the offending key on any invariant violation."""

    def bad(key, msg):
        raise ConfigError(f"{key}: {msg}")

    if cfg.rate <= 0:
        bad("rate", "must be positive")
    if cfg.frame_us <= 0 or cfg.symbol_us <= 0:
        bad("frame_us/symbol_us", "durations must be positive")
    if cfg.payload_bits < 1:
        bad("payload_bits", "must be >= 1")
    if cfg.degree < 1:
        bad("degree", "must be >= 1")
    if cfg.max_iter < 1:
        bad("max_iter", "must be >= 1")
    if cfg.trials < 1:
        bad("trials", "must be >= 1")
    if cfg.seed < 0:
        bad("seed", "must be >= 0")
    if cfg.workers < 1:
        bad("workers", "must be >= 1")
    n = len(cfg.positions)
    if not 0.0 < cfg.header_fraction < 1.0 / n:
        bad("header_fraction", f"must lie in (0, 1/{n}) for {n} header copies")
    try:
        cfg.system_params()
        cfg.header_policy()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(text: str) -> CampaignConfig:
    """Parse a key=value document ('#' starts a comment) into a config.

    Unknown keys and malformed values are reported with their line number;
    cross-field violations name the offending key.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _PARSERS[key](value.strip())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: invalid value for {key}: {exc}") from exc
    cfg = CampaignConfig(**values)
    validate_config(cfg)
    return cfg


def serialize_config(cfg: CampaignConfig) -> str:
    """Canonical key=value form; parse_config(serialize_config(c)) == c."""
    lines = [
        f"campaign={cfg.campaign}",
        f"rate={cfg.rate!r}",
        f"snr_db={cfg.snr_db!r}",
        f"frame_us={cfg.frame_us!r}",
        f"symbol_us={cfg.symbol_us!r}",
        f"payload_bits={cfg.payload_bits}",
        f"degree={cfg.degree}",
        f"max_iter={cfg.max_iter}",
        "positions=" + ",".join(cfg.positions),
        f"header_fraction={cfg.header_fraction!r}",
        "grid=" + ":".join(repr(v) for v in cfg.grid),
        f"trials={cfg.trials}",
        f"seed={cfg.seed}",
        f"workers={cfg.workers}",
    ]
    return "\n".join(lines) + "\n"
