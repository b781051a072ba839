import numpy as np
import pytest

from sicaloha import SystemParams


@pytest.fixture
def ref_params():
    """Reference working point: rate 2, 10 dB SNR, 100 ms frame of 1 us
    symbols, 1000-bit packets, 2 replicas, 10 passes."""
    return SystemParams(
        rate=2.0, snr=10.0, frame_len=100_000, packet_len=500,
        replica_degree=2, max_sic_iter=10,
    )


@pytest.fixture
def small_params():
    """Desk-scale geometry for fast randomized tests."""
    return SystemParams(
        rate=2.0, snr=10.0, frame_len=3000, packet_len=100,
        replica_degree=2, max_sic_iter=10,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
