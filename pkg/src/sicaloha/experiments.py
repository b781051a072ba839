"""Monte Carlo campaigns: surviving-collision interference masks, header-hit
statistics after cancellation, and load/throughput/PER sweeps.

Every campaign derives one RNG per work unit from (master seed, grid index,
frame index), so results are bit-identical no matter how units are scheduled
across workers, and different protocols replay the same frame realizations.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytic import SymbolPmf
from .ecra import HeaderPolicy, run_ecra
from .model import SystemParams, _replica_counts, place_replicas
from .sic import run_sic

__all__ = [
    "PROTOCOLS",
    "CampaignError",
    "LoadPoint",
    "LoadPointStats",
    "CampaignResult",
    "users_for_load",
    "mask_campaign",
    "header_campaign",
    "throughput_campaign",
]

PROTOCOLS = ("cra", "ecra", "ecra-perfect")

_MASK_BATCH = 20000      # offset draws per vectorised batch
_MASK_CHUNK = 4000       # kept trials per coverage-accumulation chunk


class CampaignError(RuntimeError):
    """A campaign could not produce the requested statistics."""


@dataclass(frozen=True)
class LoadPoint:
    """One point of the offered-load grid."""

    offered_load: float   # information bits per symbol, normalised by the rate
    n_users: int


@dataclass
class LoadPointStats:
    """Aggregates of one load point over all simulated frames."""

    point: LoadPoint
    n_frames: int
    lost_packets: int               # user packets never decoded
    per: float                      # lost_packets / (n_users * n_frames)
    throughput: float               # (1 - per) * G * header overhead factor
    survivors: int | None = None    # live replicas after cancellation (header campaign)
    header_blocked: int | None = None  # survivors with every header copy interfered
    p_h_int: float | None = None    # header_blocked / survivors; None when undefined


@dataclass
class CampaignResult:
    """Per-load-point aggregates plus the campaign-level throughput peak."""

    points: list[LoadPointStats]
    t_max: float
    g_at_t_max: float


def users_for_load(g: float, params: SystemParams) -> int:
    """Users per frame carrying offered load ``g``: round(g * frame_len / packet_len)."""
    if g <= 0:
        raise ValueError(f"offered load must be positive, got {g}")
    return int(round(g * params.frame_len / params.packet_len))


def mask_campaign(
    k: int,
    packet_len: int,
    undecodable: int,
    trials: int,
    rng: np.random.Generator,
    *,
    require_all_survive: bool = False,
    max_attempts: int | None = None,
) -> SymbolPmf:
    """Empirical interference mask of a packet surviving a k-packet collision.

    Draws k-1 interferer offsets (uniform over all positions overlapping the
    reference by at least one symbol), runs cancellation among the k
    degree-one packets, and keeps the configuration when the reference is
    still undecodable afterwards; by default the other packets may decode
    (set ``require_all_survive`` to condition on the whole configuration
    surviving).  Sampling continues until ``trials`` surviving configurations
    are collected, then the reference's hit masks are averaged.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if packet_len < 1 or undecodable < 1:
        raise ValueError("packet_len and undecodable must be >= 1")
    if max_attempts is None:
        max_attempts = max(200_000, 1000 * trials)
    max_sum = undecodable - 1
    diag = np.arange(k)
    kept = 0
    attempted = 0
    mask_sum = np.zeros(packet_len, dtype=np.int64)
    while kept < trials and attempted < max_attempts:
        b = min(_MASK_BATCH, max_attempts - attempted)
        attempted += b
        offs = rng.integers(-(packet_len - 1), packet_len, size=(b, k - 1))
        starts = np.concatenate([np.zeros((b, 1), dtype=offs.dtype), offs], axis=1)
        ov = np.maximum(packet_len - np.abs(starts[:, :, None] - starts[:, None, :]), 0)
        ov[:, diag, diag] = 0
        live = np.ones((b, k), dtype=bool)
        while True:
            sums = (ov * live[:, None, :]).sum(axis=2)
            hit = live & (sums <= max_sum)
            if not hit.any():
                break
            live &= ~hit
        keep = live.all(axis=1) if require_all_survive else live[:, 0]
        rows = np.nonzero(keep)[0]
        if rows.size > trials - kept:
            rows = rows[: trials - kept]
        kept += rows.size
        for c0 in range(0, rows.size, _MASK_CHUNK):
            chunk = rows[c0 : c0 + _MASK_CHUNK]
            o = offs[chunk]
            alive = live[chunk, 1:]
            lo = np.where(alive, np.clip(o, 0, packet_len), 0)
            hi = np.where(alive, np.clip(o + packet_len, 0, packet_len), 0)
            diff = np.zeros((chunk.size, packet_len + 1), dtype=np.int32)
            r = np.repeat(np.arange(chunk.size), k - 1)
            np.add.at(diff, (r, lo.ravel()), 1)
            np.add.at(diff, (r, hi.ravel()), -1)
            mask_sum += (np.cumsum(diff[:, :-1], axis=1) > 0).sum(axis=0)
    if kept == 0:
        raise CampaignError(
            f"no configuration of {k} packets survived cancellation in "
            f"{attempted} attempts (undecodable count {undecodable})"
        )
    if kept < trials:
        raise CampaignError(
            f"only {kept} of {trials} surviving configurations found in {attempted} attempts"
        )
    return SymbolPmf(mask_sum / trials)


def _frame_rng(seed: int, g_index: int, frame_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, g_index, frame_index)))


def _run_protocol(frame, params, policy, protocol):
    if protocol == "cra":
        return run_sic(frame, params)
    if protocol == "ecra":
        return run_ecra(frame, params, policy, perfect_knowledge=False)
    if protocol == "ecra-perfect":
        return run_ecra(frame, params, policy, perfect_knowledge=True)
    raise ValueError(f"unknown protocol {protocol!r}, expected one of {PROTOCOLS}")


def _simulate_load_point(args) -> LoadPointStats:
    params, policy, protocol, g, g_index, n_frames, seed, header_stats = args
    n_users = users_for_load(g, params)
    p_len = params.packet_len
    spans = policy.intervals(p_len) if header_stats else None
    lost = 0
    survivors = 0
    blocked = 0
    for f in range(n_frames):
        frame = place_replicas(params, n_users, _frame_rng(seed, g_index, f))
        out = _run_protocol(frame, params, policy, protocol)
        lost += n_users - len(out.decoded_users)
        if header_stats:
            live = np.zeros(frame.n_replicas, dtype=bool)
            live[out.surviving] = True
            for i in out.surviving:
                counts = _replica_counts(frame.starts, frame.users, live, p_len, int(i))
                survivors += 1
                if all(counts[a : b + 1].any() for a, b in spans):
                    blocked += 1
    per = lost / (n_users * n_frames) if n_users else 0.0
    throughput = (1.0 - per) * g * policy.overhead_factor(p_len) if n_users else 0.0
    stats = LoadPointStats(LoadPoint(g, n_users), n_frames, lost, per, throughput)
    if header_stats:
        stats.survivors = survivors
        stats.header_blocked = blocked
        stats.p_h_int = blocked / survivors if survivors else None
    return stats


def _map_units(fn, units, workers: int):
    if workers <= 1:
        return [fn(u) for u in units]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, units))


def _campaign(params, policy, protocol, g_grid, n_frames, seed, workers, header_stats):
    if not g_grid:
        raise ValueError("load grid is empty")
    if n_frames < 1:
        raise ValueError(f"n_frames must be >= 1, got {n_frames}")
    units = [
        (params, policy, protocol, float(g), gi, n_frames, seed, header_stats)
        for gi, g in enumerate(g_grid)
    ]
    points = _map_units(_simulate_load_point, units, workers)
    best = max(range(len(points)), key=lambda i: points[i].throughput)
    return CampaignResult(points, points[best].throughput, points[best].point.offered_load)


def header_campaign(
    params: SystemParams,
    policy: HeaderPolicy,
    g_grid,
    n_frames: int,
    seed: int = 0,
    workers: int = 1,
) -> CampaignResult:
    """Probability that a replica surviving plain cancellation has every
    header copy interfered, per offered-load point.

    Counted per surviving replica over ``n_frames`` frames; a load point with
    zero survivors reports ``p_h_int = None`` rather than a fabricated zero.
    """
    return _campaign(params, policy, "cra", list(g_grid), n_frames, seed, workers, True)


def throughput_campaign(
    params: SystemParams,
    protocol: str,
    policy: HeaderPolicy,
    g_grid,
    n_frames: int,
    seed: int = 0,
    workers: int = 1,
) -> CampaignResult:
    """Average PER and throughput over the load grid for one protocol.

    A user packet counts as lost when neither a replica nor (for ECRA) the
    combined packet decodes.  Throughput discounts the replication overhead,
    (1 - per) * G * (1 - (n-1)*header_len/packet_len), for every protocol
    whenever the policy replicates the header; the protocol choice changes
    only the decoding stage.
    """
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}, expected one of {PROTOCOLS}")
    return _campaign(params, policy, protocol, list(g_grid), n_frames, seed, workers, False)
