"""Frame-level simulator and analysis toolkit for unslotted random access
with successive interference cancellation (CRA and its replica-combining
extension ECRA), including header-placement interference statistics and
throughput/PER campaigns."""

from .analytic import (
    DecodingThreshold,
    DivergenceUndefinedError,
    SymbolPmf,
    ThresholdError,
    case_counts,
    critical_ratio,
    enumerate_two_packet_pmf,
    kl_divergence,
    symbol_pmf,
    undecodable_count,
)
from .config import CampaignConfig, ConfigError, parse_config, serialize_config
from .ecra import (
    CombinedPacket,
    HeaderPolicy,
    combine_replicas,
    combined_decodable,
    header_clean,
    rp_recoverable,
    run_ecra,
)
from .experiments import (
    PROTOCOLS,
    CampaignError,
    CampaignResult,
    LoadPoint,
    LoadPointStats,
    header_campaign,
    mask_campaign,
    throughput_campaign,
    users_for_load,
)
from .model import (
    FrameRealization,
    InterferenceProfile,
    PlacementError,
    ReplicaPlacement,
    SystemParams,
    interference_profile,
    interference_ratio,
    place_replicas,
    snir,
)
from .sic import SicOutcome, apply_outcome, is_decodable, run_sic

__version__ = "0.1.0"
