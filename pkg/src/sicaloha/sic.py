"""Successive interference cancellation over one frame.

Each pass tests every live replica against interferer sums frozen at pass
start and cancels all replicas of every user that decodes, in one batch, so
the outcome is independent of evaluation order.  Decoding a packet recovers
its payload, which names the sibling replica positions, so all replicas of a
decoded user are removed regardless of header state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import FrameRealization, SystemParams, _replica_counts

__all__ = ["SicOutcome", "is_decodable", "run_sic", "apply_outcome"]


@dataclass
class SicOutcome:
    """Result of one cancellation run."""

    decoded_users: frozenset[int]
    iterations_used: int
    surviving: np.ndarray   # indices into the frame's replica arrays

    def __post_init__(self):
        self.surviving = np.asarray(self.surviving, dtype=np.int64)


def _min_snir(params: SystemParams) -> float:
    return 2.0 ** params.rate - 1.0


def is_decodable(x: float, params: SystemParams) -> bool:
    """True iff a packet with interference ratio ``x`` clears the threshold.

    Equivalent to snir(x, params) >= 2**rate - 1, evaluated as x <= x_max so
    the boundary ratio itself counts as decodable without float slack.
    """
    if x < 0:
        raise ValueError("interference ratio cannot be negative")
    sha = _min_snir(params)
    if params.snr < sha:
        return False   # even a clean packet sits below the threshold
    return x <= 1.0 / sha - 1.0 / params.snr


def _max_decodable_sum(params: SystemParams) -> int:
    """Largest interferer-symbol sum that still decodes (integer form of x <= x_max)."""
    sha = _min_snir(params)
    if params.snr < sha:
        return -1
    x_max = 1.0 / sha - 1.0 / params.snr
    return int(np.floor(params.packet_len * x_max))


def _overlap_matrix(starts: np.ndarray, packet_len: int) -> np.ndarray:
    """Pairwise overlap lengths between replica intervals, zero diagonal.

    Same-user pairs come out zero automatically because their starts differ
    by at least packet_len.
    """
    diff = np.abs(starts[:, None] - starts[None, :])
    ov = np.maximum(packet_len - diff, 0).astype(np.int64)
    np.fill_diagonal(ov, 0)
    return ov


class _Engine:
    """Mutable per-frame cancellation state shared by the CRA and ECRA loops."""

    __slots__ = ("params", "starts", "users", "live", "overlap", "max_sum", "decoded")

    def __init__(self, frame: FrameRealization, params: SystemParams):
        self.params = params
        self.starts = frame.starts
        self.users = frame.users
        self.live = ~frame.removed
        self.overlap = _overlap_matrix(frame.starts, params.packet_len)
        self.max_sum = _max_decodable_sum(params)
        self.decoded: list[int] = []

    def decode(self, users: np.ndarray):
        self.decoded.extend(int(u) for u in users)
        self.live &= ~np.isin(self.users, users)

    def sic_phase(self, budget: int) -> int:
        """Run decode passes until nothing moves; returns passes consumed."""
        used = 0
        while used < budget and self.live.any():
            used += 1
            sums = self.overlap[:, self.live].sum(axis=1)
            hit = self.live & (sums <= self.max_sum)
            if not hit.any():
                break
            self.decode(np.unique(self.users[hit]))
        return used

    def replica_counts(self, idx: int) -> np.ndarray:
        return _replica_counts(self.starts, self.users, self.live, self.params.packet_len, idx)

    def outcome(self, iterations: int) -> SicOutcome:
        return SicOutcome(frozenset(self.decoded), iterations, np.nonzero(self.live)[0])


def run_sic(frame: FrameRealization, params: SystemParams) -> SicOutcome:
    """Iterative cancellation: decode every replica above threshold, remove
    all replicas of decoded users, repeat until stuck or the pass budget
    ``params.max_sic_iter`` runs out."""
    eng = _Engine(frame, params)
    return eng.outcome(eng.sic_phase(params.max_sic_iter))


def apply_outcome(frame: FrameRealization, outcome: SicOutcome) -> FrameRealization:
    """Frame with the outcome's cancellations marked as removed."""
    removed = np.ones(frame.n_replicas, dtype=bool)
    removed[outcome.surviving] = False
    return frame.with_removed(removed)
