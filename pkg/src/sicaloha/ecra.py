"""Replica combining on top of the cancellation engine (ECRA).

After plain cancellation stalls, every still-undecoded user whose replica
pointer can be read (at least one clean header copy on any live replica, or
unconditionally under the perfect-knowledge toggle) gets a combined packet:
symbol by symbol the least-interfered copy across its live replicas.  A
packet stitched together this way decodes when its interference-free
fraction alone carries the code rate at the clean-symbol capacity
(interfered symbols count as erasures).  Recovered users' replicas are
cancelled and cancellation resumes; combining sweeps and cancellation passes
share the ``max_sic_iter`` budget.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import FrameRealization, InterferenceProfile, SystemParams, interference_profile
from .sic import SicOutcome, _Engine

__all__ = [
    "HEADER_SLOTS",
    "HeaderPolicy",
    "CombinedPacket",
    "header_clean",
    "rp_recoverable",
    "combine_replicas",
    "combined_decodable",
    "run_ecra",
]

HEADER_SLOTS = ("begin", "center", "end")


@dataclass(frozen=True)
class HeaderPolicy:
    """Number and placement of header copies inside each packet.

    Header symbols are part of the packet's ``packet_len`` symbols; a copy is
    readable only if none of its symbols is interfered (CRC model).
    """

    positions: tuple[str, ...]  # subset of HEADER_SLOTS, canonical order
    header_len: int             # symbols per copy

    def __post_init__(self):
        pos = tuple(p for p in HEADER_SLOTS if p in self.positions)
        if len(pos) != len(self.positions) or not pos:
            raise ValueError(
                f"positions must be a non-empty subset of {HEADER_SLOTS}, got {self.positions}"
            )
        object.__setattr__(self, "positions", pos)
        if self.header_len < 1:
            raise ValueError(f"header_len must be >= 1, got {self.header_len}")

    @property
    def copies(self) -> int:
        return len(self.positions)

    @classmethod
    def from_fraction(cls, positions, fraction: float, packet_len: int) -> "HeaderPolicy":
        """Policy with header_len = round(fraction * packet_len), validated."""
        n = len(set(positions))
        if not 0.0 < fraction < 1.0 / n:
            raise ValueError(f"header fraction must lie in (0, 1/{n}), got {fraction}")
        policy = cls(tuple(positions), int(round(fraction * packet_len)))
        policy.intervals(packet_len)
        return policy

    def intervals(self, packet_len: int) -> tuple[tuple[int, int], ...]:
        """Inclusive 0-based symbol spans of each copy: begin = [0, H-1],
        center = [(packet_len-H)//2, ...], end = [packet_len-H, packet_len-1]."""
        h = self.header_len
        if self.copies * h >= packet_len:
            raise ValueError(
                f"{self.copies} header copies of {h} symbols do not fit a "
                f"{packet_len}-symbol packet"
            )
        c0 = (packet_len - h) // 2
        spans = {
            "begin": (0, h - 1),
            "center": (c0, c0 + h - 1),
            "end": (packet_len - h, packet_len - 1),
        }
        out = tuple(spans[p] for p in self.positions)
        for (a0, b0), (a1, b1) in zip(out, out[1:]):
            if b0 >= a1:
                raise ValueError("header copies overlap at this packet length")
        return out

    def overhead_factor(self, packet_len: int) -> float:
        """Payload fraction left after replicating the header: 1 - (n-1)*H/packet_len."""
        return 1.0 - (self.copies - 1) * self.header_len / packet_len


@dataclass
class CombinedPacket:
    """Symbol-wise least-interfered selection across a user's live replicas."""

    counts: np.ndarray   # per-symbol interferer counts of the combined packet
    ratio: float         # combined interference ratio

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)


def _clean_copies(counts: np.ndarray, spans) -> list[bool]:
    return [not counts[a : b + 1].any() for a, b in spans]


def header_clean(profile: InterferenceProfile, policy: HeaderPolicy) -> tuple[bool, ...]:
    """Per-copy cleanliness, aligned with ``policy.positions``.

    A copy is clean iff every symbol in its span has zero interferers.
    """
    return tuple(_clean_copies(profile.counts, policy.intervals(len(profile))))


def rp_recoverable(user: int, frame: FrameRealization, policy: HeaderPolicy) -> bool:
    """True iff some header copy of some live replica of ``user`` is clean.

    One readable copy names all sibling replica positions, which is all the
    combiner needs.
    """
    reps = frame.replicas_of(user)
    live = reps[~frame.removed[reps]]
    if live.size == 0:
        raise ValueError(f"user {user} has no live replicas")
    placements = frame.placements
    return any(any(header_clean(interference_profile(frame, placements[i]), policy)) for i in live)


def combine_replicas(frame: FrameRealization, user: int) -> CombinedPacket:
    """Elementwise-minimum interferer counts across the user's live replicas."""
    reps = frame.replicas_of(user)
    live = reps[~frame.removed[reps]]
    if live.size < 2:
        raise ValueError(f"user {user} needs at least 2 live replicas to combine")
    placements = frame.placements
    combined = None
    for i in live:
        counts = interference_profile(frame, placements[i]).counts
        combined = counts if combined is None else np.minimum(combined, counts)
    return CombinedPacket(combined, float(combined.sum()) / frame.params.packet_len)


def _clean_symbols_needed(packet_len: int, params: SystemParams) -> float:
    """Fewest interference-free symbols that carry a packet under erasures."""
    return packet_len * params.rate / np.log2(1.0 + params.snr)


def combined_decodable(packet: CombinedPacket, params: SystemParams) -> bool:
    """Erasure-model decodability of a symbol-stitched combined packet.

    Selection combining yields a packet whose symbols come from different
    copies, so residual-interfered symbols cannot be trusted to contribute;
    they are treated as erasures and the clean fraction must carry the rate:
    clean_fraction * log2(1 + snr) >= rate.  At snr equal to the clean-packet
    threshold this degenerates to requiring a fully clean packet.
    """
    needed = _clean_symbols_needed(packet.counts.size, params)
    return np.count_nonzero(packet.counts == 0) >= needed


def _combining_sweep(eng: _Engine, spans, perfect: bool, clean_needed: float) -> np.ndarray:
    """One batch of combining attempts against frozen liveness.

    Returns the users whose combined packet decodes this sweep.
    """
    stuck = np.unique(eng.users[eng.live])
    hits = []
    for u in stuck:
        reps = np.nonzero((eng.users == u) & eng.live)[0]
        if reps.size < 2:
            continue
        counts = [eng.replica_counts(i) for i in reps]
        if not perfect and not any(any(_clean_copies(c, spans)) for c in counts):
            continue
        combined = counts[0]
        for c in counts[1:]:
            combined = np.minimum(combined, c)
        if np.count_nonzero(combined == 0) >= clean_needed:
            hits.append(u)
    return np.asarray(hits, dtype=np.int64)


def run_ecra(
    frame: FrameRealization,
    params: SystemParams,
    policy: HeaderPolicy,
    perfect_knowledge: bool = False,
) -> SicOutcome:
    """Cancellation plus combining rounds until fixpoint or budget exhaustion.

    Starts with a plain cancellation phase (identical to :func:`run_sic`),
    then alternates combining sweeps (gated per user by ``rp_recoverable``
    unless ``perfect_knowledge``) and cancellation phases.  Every pass of
    either kind charges the shared ``max_sic_iter`` budget.
    """
    spans = policy.intervals(params.packet_len)
    clean_needed = _clean_symbols_needed(params.packet_len, params)
    eng = _Engine(frame, params)
    budget = params.max_sic_iter
    passes = eng.sic_phase(budget)
    while passes < budget and eng.live.any():
        passes += 1
        hits = _combining_sweep(eng, spans, perfect_knowledge, clean_needed)
        if hits.size == 0:
            break
        eng.decode(hits)
        if passes >= budget or not eng.live.any():
            break
        passes += eng.sic_phase(budget - passes)
    return eng.outcome(passes)
