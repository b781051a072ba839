import numpy as np
import pytest

from sicaloha import (
    CampaignError,
    HeaderPolicy,
    SystemParams,
    enumerate_two_packet_pmf,
    header_campaign,
    mask_campaign,
    throughput_campaign,
    users_for_load,
)


class TestUsersForLoad:
    @pytest.mark.parametrize("g,expected", [(1.0, 200), (0.5, 100), (0.05, 10)])
    def test_reference_mapping(self, ref_params, g, expected):
        assert users_for_load(g, ref_params) == expected

    def test_rejects_nonpositive_load(self, ref_params):
        with pytest.raises(ValueError):
            users_for_load(0.0, ref_params)


class TestMaskCampaign:
    def test_two_packet_masks_converge_to_enumeration(self):
        rng = np.random.default_rng(5)
        pmf = mask_campaign(2, 40, 25, 4000, rng)
        theory = enumerate_two_packet_pmf(40, 25)
        assert np.abs(pmf.p - theory.p).max() < 0.05

    def test_plateau_certainty_is_reproduced_exactly(self):
        # undecodable count 31 of 40 symbols: central symbols are interfered
        # in every surviving two-packet geometry
        rng = np.random.default_rng(5)
        pmf = mask_campaign(2, 40, 31, 500, rng)
        assert (pmf.p[9:31] == 1.0).all()

    def test_full_overlap_boundary(self):
        rng = np.random.default_rng(0)
        pmf = mask_campaign(2, 6, 6, 50, rng)
        assert (pmf.p == 1.0).all()

    def test_deterministic_given_seed(self):
        a = mask_campaign(3, 50, 41, 300, np.random.default_rng(9))
        b = mask_campaign(3, 50, 41, 300, np.random.default_rng(9))
        assert np.array_equal(a.p, b.p)

    def test_no_survivors_raises(self):
        # undecodable count above the packet length: cancellation clears
        # every two-packet collision
        with pytest.raises(CampaignError):
            mask_campaign(2, 20, 21, 10, np.random.default_rng(0), max_attempts=5000)

    def test_unreachable_target_raises(self):
        with pytest.raises(CampaignError, match="surviving"):
            mask_campaign(2, 20, 20, 50, np.random.default_rng(0), max_attempts=60)

    def test_empirical_symmetry_within_three_standard_errors(self):
        rng = np.random.default_rng(11)
        trials = 3000
        pmf = mask_campaign(3, 60, 55, trials, rng).p
        se = np.sqrt(pmf * (1 - pmf) / trials)
        mirrored = pmf[::-1]
        tol = 3 * np.sqrt(se**2 + se[::-1] ** 2) + 1e-9
        assert (np.abs(pmf - mirrored) <= tol).all()

    def test_require_all_survive_is_a_subset_condition(self):
        base = mask_campaign(3, 30, 25, 400, np.random.default_rng(2))
        strict = mask_campaign(3, 30, 25, 400, np.random.default_rng(2),
                               require_all_survive=True)
        assert base.p.shape == strict.p.shape

    def test_invalid_arguments(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            mask_campaign(1, 20, 5, 10, rng)
        with pytest.raises(ValueError):
            mask_campaign(2, 20, 5, 0, rng)


def _tiny_params():
    return SystemParams(rate=2.0, snr=10.0, frame_len=8000, packet_len=100,
                        replica_degree=2, max_sic_iter=10)


def _tiny_policy(params):
    return HeaderPolicy.from_fraction(("begin", "end"), 0.05, params.packet_len)


class TestHeaderCampaign:
    def test_probabilities_are_well_formed(self):
        params = _tiny_params()
        res = header_campaign(params, _tiny_policy(params), [0.4, 0.8], 25, seed=3)
        for point in res.points:
            assert point.survivors is not None
            if point.p_h_int is not None:
                assert 0.0 <= point.p_h_int <= 1.0
                assert point.header_blocked <= point.survivors

    def test_single_user_load_point_is_undefined(self):
        params = _tiny_params()
        g_one_user = params.packet_len / params.frame_len  # exactly one user
        res = header_campaign(params, _tiny_policy(params), [g_one_user], 10, seed=0)
        point = res.points[0]
        assert point.point.n_users == 1
        assert point.survivors == 0
        assert point.p_h_int is None

    def test_reproducible(self):
        params = _tiny_params()
        a = header_campaign(params, _tiny_policy(params), [0.5, 0.9], 15, seed=7)
        b = header_campaign(params, _tiny_policy(params), [0.5, 0.9], 15, seed=7)
        assert a == b


class TestThroughputCampaign:
    def test_basic_bounds_and_peak(self):
        params = _tiny_params()
        grid = [0.2, 0.5, 0.8]
        res = throughput_campaign(params, "cra", _tiny_policy(params), grid, 25, seed=1)
        for point in res.points:
            assert 0.0 <= point.per <= 1.0
            assert point.throughput <= point.point.offered_load
        assert res.t_max == max(p.throughput for p in res.points)
        assert res.g_at_t_max in grid

    def test_single_header_has_no_overhead_discount(self):
        params = _tiny_params()
        policy = HeaderPolicy.from_fraction(("begin",), 0.05, params.packet_len)
        res = throughput_campaign(params, "cra", policy, [0.5], 20, seed=2)
        point = res.points[0]
        assert point.throughput == pytest.approx((1 - point.per) * 0.5)

    def test_replicated_header_discounts_throughput(self):
        params = _tiny_params()
        policy = _tiny_policy(params)
        res = throughput_campaign(params, "cra", policy, [0.5], 20, seed=2)
        point = res.points[0]
        assert point.throughput == pytest.approx((1 - point.per) * 0.5 * 0.95)

    def test_channel_below_threshold_loses_everything(self):
        params = SystemParams(rate=2.0, snr=2.0, frame_len=8000, packet_len=100,
                              replica_degree=2, max_sic_iter=10)
        res = throughput_campaign(params, "cra", _tiny_policy(params), [0.5], 5, seed=0)
        assert res.points[0].per == 1.0
        assert res.points[0].throughput == 0.0

    def test_protocol_dominance_per_load_point(self):
        params = _tiny_params()
        grid = [0.4, 0.7, 1.0]
        runs = {
            proto: throughput_campaign(params, proto, _tiny_policy(params), grid, 30, seed=5)
            for proto in ("cra", "ecra", "ecra-perfect")
        }
        for i in range(len(grid)):
            assert runs["cra"].points[i].lost_packets >= runs["ecra"].points[i].lost_packets
            assert runs["ecra"].points[i].lost_packets >= runs["ecra-perfect"].points[i].lost_packets

    def test_reproducible_bit_identical(self):
        params = _tiny_params()
        a = throughput_campaign(params, "ecra", _tiny_policy(params), [0.3, 0.6], 15, seed=11)
        b = throughput_campaign(params, "ecra", _tiny_policy(params), [0.3, 0.6], 15, seed=11)
        assert a == b

    def test_workers_do_not_change_results(self):
        params = _tiny_params()
        grid = [0.3, 0.5, 0.7, 0.9]
        a = throughput_campaign(params, "ecra", _tiny_policy(params), grid, 10, seed=4, workers=1)
        b = throughput_campaign(params, "ecra", _tiny_policy(params), grid, 10, seed=4, workers=4)
        assert a == b

    def test_unknown_protocol_rejected(self):
        params = _tiny_params()
        with pytest.raises(ValueError):
            throughput_campaign(params, "aloha", _tiny_policy(params), [0.5], 5, seed=0)
