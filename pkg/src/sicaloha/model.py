"""Frame geometry, random replica placement, and interference bookkeeping.

Time is an integer grid of symbol slots: a packet occupies ``packet_len``
consecutive slots and collisions are symbol synchronous, so a slot is either
fully collided or clean.  Interference is counted with multiplicity (a slot
covered by two foreign replicas contributes 2 to the interferer sum), which
makes the SNIR below equal to the aggregate-interference-power SNIR for
equal-power users.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "PlacementError",
    "SystemParams",
    "ReplicaPlacement",
    "FrameRealization",
    "InterferenceProfile",
    "place_replicas",
    "interference_profile",
    "interference_ratio",
    "snir",
]

# Resample rounds per user before switching to the direct disjoint sampler.
MAX_RESAMPLE_ROUNDS = 1000


class PlacementError(RuntimeError):
    """Replica placement could not satisfy same-user disjointness."""


@dataclass(frozen=True)
class SystemParams:
    """Static system configuration shared by all protocols."""

    rate: float          # code rate in information bits per symbol
    snr: float           # linear signal-to-noise ratio P/N
    frame_len: int       # frame duration in symbols
    packet_len: int      # packet length in symbols
    replica_degree: int = 2   # packet copies sent per user and frame
    max_sic_iter: int = 10    # shared cancellation/combining pass budget

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError(f"rate must be positive, got {self.rate}")
        if self.snr <= 0:
            raise ValueError(f"snr must be positive, got {self.snr}")
        if self.packet_len < 1:
            raise ValueError(f"packet_len must be >= 1, got {self.packet_len}")
        if self.replica_degree < 1:
            raise ValueError(f"replica_degree must be >= 1, got {self.replica_degree}")
        if self.max_sic_iter < 1:
            raise ValueError(f"max_sic_iter must be >= 1, got {self.max_sic_iter}")
        if self.frame_len < self.replica_degree * self.packet_len:
            raise ValueError(
                f"frame_len {self.frame_len} cannot hold {self.replica_degree} "
                f"disjoint replicas of {self.packet_len} symbols"
            )


@dataclass(frozen=True)
class ReplicaPlacement:
    """One transmitted copy of a user packet."""

    user: int
    replica_idx: int
    start: int   # first occupied symbol; interval is [start, start + packet_len - 1]


@dataclass
class InterferenceProfile:
    """Per-symbol live-interferer counts over one replica's span."""

    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.ndim != 1:
            raise ValueError("counts must be one-dimensional")
        if (self.counts < 0).any():
            raise ValueError("interference counts cannot be negative")

    def __len__(self) -> int:
        return self.counts.size


@dataclass
class FrameRealization:
    """All replica placements of one frame plus per-replica liveness.

    Stored as parallel arrays (one entry per replica) so that whole campaigns
    can run without per-replica object churn; ``placements`` materialises the
    record view on demand.
    """

    params: SystemParams
    users: np.ndarray          # user id of each replica
    replica_idx: np.ndarray    # copy index within the user, 0..d-1
    starts: np.ndarray         # first occupied symbol of each replica
    removed: np.ndarray = field(default=None)  # True once cancelled by SIC

    def __post_init__(self):
        self.users = np.asarray(self.users, dtype=np.int64)
        self.replica_idx = np.asarray(self.replica_idx, dtype=np.int64)
        self.starts = np.asarray(self.starts, dtype=np.int64)
        if self.removed is None:
            self.removed = np.zeros(self.users.size, dtype=bool)
        else:
            self.removed = np.asarray(self.removed, dtype=bool)
        n = self.users.size
        if not (self.replica_idx.size == self.starts.size == self.removed.size == n):
            raise ValueError("users, replica_idx, starts and removed must have equal length")
        self._validate()

    def _validate(self):
        p = self.params
        if self.users.size == 0:
            return
        if self.starts.min() < 0 or self.starts.max() > p.frame_len - p.packet_len:
            raise ValueError("replica interval leaves the frame")
        ids, counts = np.unique(self.users, return_counts=True)
        if (counts != p.replica_degree).any():
            raise ValueError(f"every user needs exactly {p.replica_degree} replicas")
        # Same-user replicas must be pairwise non-overlapping: sort by
        # (user, start) and require gaps of at least packet_len within a user.
        order = np.lexsort((self.starts, self.users))
        u = self.users[order]
        s = self.starts[order]
        same = u[1:] == u[:-1]
        if (same & (s[1:] - s[:-1] < p.packet_len)).any():
            raise ValueError("same-user replicas overlap")

    @property
    def n_replicas(self) -> int:
        return self.users.size

    @property
    def user_ids(self) -> np.ndarray:
        return np.unique(self.users)

    @property
    def n_users(self) -> int:
        return self.user_ids.size

    @property
    def placements(self) -> list[ReplicaPlacement]:
        return [
            ReplicaPlacement(int(u), int(r), int(s))
            for u, r, s in zip(self.users, self.replica_idx, self.starts)
        ]

    @classmethod
    def from_placements(cls, params, placements, removed=None) -> "FrameRealization":
        users = [pl.user for pl in placements]
        ridx = [pl.replica_idx for pl in placements]
        starts = [pl.start for pl in placements]
        return cls(params, users, ridx, starts, removed)

    def replicas_of(self, user: int) -> np.ndarray:
        """Indices of all replicas belonging to ``user``."""
        return np.nonzero(self.users == user)[0]

    def index_of(self, target: ReplicaPlacement) -> int:
        """Index of ``target`` in this frame; raises if it does not belong."""
        hit = np.nonzero(
            (self.users == target.user)
            & (self.replica_idx == target.replica_idx)
            & (self.starts == target.start)
        )[0]
        if hit.size != 1:
            raise ValueError(f"replica {target} does not belong to this frame")
        return int(hit[0])

    def with_removed(self, removed: np.ndarray) -> "FrameRealization":
        """Copy of the frame with a new liveness mask."""
        return replace(self, removed=np.array(removed, dtype=bool))


def _rows_overlapping(starts: np.ndarray, packet_len: int) -> np.ndarray:
    """Boolean mask of rows whose intervals are not pairwise disjoint."""
    s = np.sort(starts, axis=1)
    return (np.diff(s, axis=1) < packet_len).any(axis=1)


def _sample_disjoint_row(rng, d: int, top: int, packet_len: int) -> np.ndarray:
    """Draw one user's starts uniformly from the disjoint arrangements.

    Classic bijection: sorted disjoint starts s_1 < ... < s_d with gaps >=
    packet_len correspond to a nondecreasing tuple over [0, top-(d-1)*packet_len]
    via s_i = y_i + (i-1)*packet_len, and nondecreasing tuples correspond to
    d-subsets of a range enlarged by d-1.  Equivalent to rejection sampling run
    to completion, but terminates on arbitrarily tight frames.
    """
    m = top - (d - 1) * packet_len
    z = np.sort(rng.choice(m + d, size=d, replace=False))
    s = z - np.arange(d) + np.arange(d) * packet_len
    return rng.permutation(s)


def place_replicas(params: SystemParams, n_users: int, rng: np.random.Generator) -> FrameRealization:
    """Place ``replica_degree`` uniform replicas per user on the symbol grid.

    Starts are iid uniform on [0, frame_len - packet_len]; a user whose copies
    overlap is resampled as a whole.  Deterministic given the generator state.
    """
    if n_users < 0:
        raise ValueError("n_users cannot be negative")
    d = params.replica_degree
    top = params.frame_len - params.packet_len
    if n_users == 0:
        return FrameRealization(params, [], [], [])
    starts = rng.integers(0, top + 1, size=(n_users, d))
    rows = np.nonzero(_rows_overlapping(starts, params.packet_len))[0]
    rounds = 0
    while rows.size:
        rounds += 1
        if rounds > MAX_RESAMPLE_ROUNDS:
            # Rejection is hopeless this tight; draw the stragglers exactly.
            for r in rows:
                starts[r] = _sample_disjoint_row(rng, d, top, params.packet_len)
            rows = np.array([], dtype=np.int64)
            break
        starts[rows] = rng.integers(0, top + 1, size=(rows.size, d))
        rows = rows[_rows_overlapping(starts[rows], params.packet_len)]
    users = np.repeat(np.arange(n_users, dtype=np.int64), d)
    ridx = np.tile(np.arange(d, dtype=np.int64), n_users)
    return FrameRealization(params, users, ridx, starts.reshape(-1))


def _replica_counts(starts, users, live, packet_len, idx) -> np.ndarray:
    """Interferer counts over replica ``idx``'s span from live foreign replicas.

    Same-user replicas never overlap by construction, so filtering on span
    intersection alone already excludes them.
    """
    s = int(starts[idx])
    near = live & (np.abs(starts - s) < packet_len)
    near[idx] = False
    js = np.nonzero(near)[0]
    counts = np.zeros(packet_len + 1, dtype=np.int64)
    lo = np.maximum(starts[js] - s, 0)
    hi = np.minimum(starts[js] + packet_len - s, packet_len)  # exclusive
    np.add.at(counts, lo, 1)
    np.add.at(counts, hi, -1)
    return np.cumsum(counts[:-1])


def interference_profile(frame: FrameRealization, target: ReplicaPlacement) -> InterferenceProfile:
    """Per-symbol count of live foreign replicas covering ``target``."""
    idx = frame.index_of(target)
    counts = _replica_counts(
        frame.starts, frame.users, ~frame.removed, frame.params.packet_len, idx
    )
    return InterferenceProfile(counts)


def interference_ratio(profile: InterferenceProfile, packet_len: int) -> float:
    """Interference ratio x: total interferer-symbols over the packet length.

    One fully overlapping foreign packet gives x = 1; k of them give x = k.
    """
    if len(profile) != packet_len:
        raise ValueError(f"profile has {len(profile)} symbols, expected {packet_len}")
    return float(profile.counts.sum()) / packet_len


def snir(x: float, params: SystemParams) -> float:
    """Linear SNIR of a packet suffering interference ratio ``x``.

    snir = snr / (x * snr + 1): strictly decreasing in x, equal to snr at x=0.
    """
    if x < 0:
        raise ValueError("interference ratio cannot be negative")
    return params.snr / (x * params.snr + 1.0)
