"""Closed-form post-cancellation collision geometry for two packets.

With symbol-synchronous packets the overlap between two colliding packets
takes one of finitely many offsets.  Perfect cancellation removes every
offset whose overlap is still decodable, and averaging the remaining,
equiprobable offsets gives the per-symbol interference probability of a
surviving packet: a symmetric ramp/plateau/ramp shape whose plateau sits at 1
when more than half of the packet must be hit, and below 1 otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ThresholdError",
    "DivergenceUndefinedError",
    "DecodingThreshold",
    "SymbolPmf",
    "critical_ratio",
    "undecodable_count",
    "case_counts",
    "symbol_pmf",
    "enumerate_two_packet_pmf",
    "kl_divergence",
]


class ThresholdError(ValueError):
    """SNR at or below the clean-channel decoding threshold 2**rate - 1."""


class DivergenceUndefinedError(ValueError):
    """Empirical probability is zero at a symbol the reference marks positive."""


def critical_ratio(rate: float, snr: float) -> float:
    """Largest interference ratio at which a packet still decodes.

    Solves snr / (x * snr + 1) = 2**rate - 1 for x, i.e.
    x = 1/(2**rate - 1) - 1/snr.  Rejects channels that cannot decode even a
    clean packet.
    """
    if rate <= 0:
        raise ValueError(f"rate must be positive, got {rate}")
    sha = 2.0 ** rate - 1.0
    if snr <= sha:
        raise ThresholdError(
            f"snr {snr:g} is at or below the clean-channel threshold {sha:g}"
        )
    return 1.0 / sha - 1.0 / snr


def undecodable_count(packet_len: int, max_ratio: float) -> int:
    """Minimum number of interfered symbols that makes a packet undecodable.

    floor(packet_len * max_ratio) + 1, exactly.
    """
    if max_ratio <= 0:
        raise ValueError(f"max_ratio must be positive, got {max_ratio}")
    if packet_len < 1:
        raise ValueError(f"packet_len must be >= 1, got {packet_len}")
    return int(math.floor(packet_len * max_ratio)) + 1


@dataclass(frozen=True)
class DecodingThreshold:
    """Decodability summary for a given rate/SNR/packet-length working point."""

    max_ratio: float          # largest decodable interference ratio
    undecodable_symbols: int  # smallest interfered-symbol count that kills a packet
    min_snir: float           # linear decoding threshold 2**rate - 1

    @classmethod
    def from_params(cls, params) -> "DecodingThreshold":
        x = critical_ratio(params.rate, params.snr)
        # Counts above packet_len + 1 are indistinguishable from the
        # "no two-packet collision survives" sentinel, so cap there.
        l = min(undecodable_count(params.packet_len, x), params.packet_len + 1)
        return cls(x, l, 2.0 ** params.rate - 1.0)


def case_counts(packet_len: int, undecodable: int) -> tuple[int, int]:
    """Number of two-packet collision offsets, before and after cancellation.

    Before: any overlap of at least one symbol (2*packet_len - 1 offsets).
    After: only overlaps of at least ``undecodable`` symbols survive,
    2*(packet_len - undecodable) + 1 offsets.
    """
    _check_pair(packet_len, undecodable)
    return 2 * packet_len - 1, 2 * (packet_len - undecodable) + 1


@dataclass
class SymbolPmf:
    """Per-symbol interference probabilities over one packet.

    Entry i is the probability that symbol i+1 of a packet that survived
    cancellation is interfered.  Analytic instances are exactly symmetric and
    unimodal; empirical instances carry sampling noise.
    """

    p: np.ndarray

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=np.float64)
        if self.p.ndim != 1 or self.p.size == 0:
            raise ValueError("pmf must be a non-empty vector")
        if (self.p < -1e-12).any() or (self.p > 1.0 + 1e-12).any():
            raise ValueError("per-symbol probabilities must lie in [0, 1]")

    def __len__(self) -> int:
        return self.p.size


def _check_pair(packet_len: int, undecodable: int):
    if packet_len < 1:
        raise ValueError(f"packet_len must be >= 1, got {packet_len}")
    if not 1 <= undecodable <= packet_len:
        raise ValueError(
            f"undecodable symbol count must be in [1, {packet_len}], got {undecodable}"
        )


def symbol_pmf(packet_len: int, undecodable: int) -> SymbolPmf:
    """Interference probability per symbol of a surviving two-packet collision.

    Both branches ramp up as (packet_len - undecodable + i) / denom over the
    leading symbols and mirror down over the trailing ones, with
    denom = 2*(packet_len - undecodable) + 1.  When the undecodable count
    exceeds half the packet the central symbols are hit in every surviving
    offset (plateau 1); otherwise the plateau sits at packet_len / denom < 1.
    """
    _check_pair(packet_len, undecodable)
    l = undecodable
    denom = 2 * (packet_len - l) + 1
    i = np.arange(1, packet_len + 1)                      # 1-based symbol index
    ramp_up = (packet_len - l + i) / denom
    ramp_down = (denom - (i - l)) / denom
    if l >= packet_len - l + 1:
        p = np.where(i <= packet_len - l, ramp_up, np.where(i <= l, 1.0, ramp_down))
    else:
        plateau = packet_len / denom
        p = np.where(i <= l - 1, ramp_up, np.where(i <= packet_len - l + 1, plateau, ramp_down))
    return SymbolPmf(p)


def enumerate_two_packet_pmf(packet_len: int, undecodable: int) -> SymbolPmf:
    """Brute-force oracle for :func:`symbol_pmf`.

    Enumerates every equiprobable interferer offset whose overlap with the
    reference packet reaches the undecodable count, marks the covered symbols
    of the reference, and averages the masks.
    """
    _check_pair(packet_len, undecodable)
    span = packet_len - undecodable
    offsets = np.arange(-span, span + 1)
    idx = np.arange(packet_len)
    covered = (idx[None, :] >= offsets[:, None]) & (
        idx[None, :] <= offsets[:, None] + packet_len - 1
    )
    return SymbolPmf(covered.sum(axis=0) / covered.shape[0])


def kl_divergence(v, q) -> float:
    """sum_t V(t) * ln(V(t)/Q(t)) over per-symbol probability vectors.

    The inputs are per-symbol interference probabilities, not normalised
    distributions, so the value can be negative.  Symbols with V(t) = 0
    contribute nothing; V(t) > 0 with Q(t) = 0 means the empirical sample was
    too small and raises instead of being smoothed away.
    """
    v = np.asarray(v, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if v.shape != q.shape or v.ndim != 1:
        raise ValueError("vectors must be one-dimensional and of equal length")
    if (v < 0).any() or (q < 0).any():
        raise ValueError("probabilities cannot be negative")
    active = v > 0
    if (q[active] == 0).any():
        raise DivergenceUndefinedError(
            "empirical probability is zero at a symbol with positive reference "
            "probability; increase the number of trials"
        )
    va = v[active]
    return float(np.sum(va * np.log(va / q[active])))
