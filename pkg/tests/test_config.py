import pytest

from sicaloha import CampaignConfig, ConfigError, parse_config, serialize_config


class TestDefaults:
    def test_empty_document_gives_reference_defaults(self):
        cfg = parse_config("")
        assert cfg.rate == 2.0
        assert cfg.snr_db == 10.0
        assert cfg.frame_us == 100000.0
        assert cfg.symbol_us == 1.0
        assert cfg.payload_bits == 1000
        assert cfg.degree == 2
        assert cfg.max_iter == 10
        assert cfg.trials == 1000
        assert cfg.seed == 0
        assert cfg.positions == ("begin", "end")
        assert cfg.header_fraction == 0.05

    def test_derived_quantities(self):
        cfg = parse_config("")
        assert cfg.snr == pytest.approx(10.0)
        assert cfg.frame_len == 100_000
        assert cfg.packet_len == 500
        params = cfg.system_params()
        assert params.packet_len == 500 and params.frame_len == 100_000
        policy = cfg.header_policy()
        assert policy.header_len == 25 and policy.copies == 2

    def test_snr_db_conversion(self):
        assert parse_config("snr_db=10").snr == pytest.approx(10.0)
        assert parse_config("snr_db=3").snr == pytest.approx(10 ** 0.3)


class TestParsing:
    def test_comments_and_blank_lines(self):
        cfg = parse_config("# a comment\n\nrate=1.0  # trailing comment\n")
        assert cfg.rate == 1.0

    def test_unknown_key_reports_line(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config("rate=2\nbogus=1\n")

    def test_malformed_line_reports_line(self):
        with pytest.raises(ConfigError, match="line 1"):
            parse_config("just some text\n")

    def test_bad_value_reports_key_and_line(self):
        with pytest.raises(ConfigError, match="line 3.*trials"):
            parse_config("rate=2\nsnr_db=10\ntrials=lots\n")

    def test_positions_aliases_and_order(self):
        cfg = parse_config("positions=end,beginning\nheader_fraction=0.05")
        assert cfg.positions == ("begin", "end")
        cfg = parse_config("positions=centre\nheader_fraction=0.1")
        assert cfg.positions == ("center",)

    def test_duplicate_positions_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("positions=begin,beginning")

    def test_grid_spec(self):
        cfg = parse_config("grid=0.1:0.5:0.1")
        assert cfg.g_values() == pytest.approx([0.1, 0.2, 0.3, 0.4, 0.5])
        with pytest.raises(ConfigError):
            parse_config("grid=0.5:0.1:0.1")
        with pytest.raises(ConfigError):
            parse_config("grid=1:2")

    def test_default_grid_has_twenty_points(self):
        values = parse_config("").g_values()
        assert len(values) == 20
        assert values[0] == pytest.approx(0.05)
        assert values[-1] == pytest.approx(1.0)

    def test_campaign_selector(self):
        assert parse_config("campaign=masks").campaign == "masks"
        with pytest.raises(ConfigError):
            parse_config("campaign=plots")


class TestValidation:
    def test_header_fraction_incompatible_with_copies(self):
        with pytest.raises(ConfigError, match="header_fraction"):
            parse_config("header_fraction=0.6")  # two copies by default

    def test_single_copy_allows_larger_fraction(self):
        cfg = parse_config("positions=center\nheader_fraction=0.6")
        assert cfg.header_policy().header_len == 300

    def test_frame_too_short_for_replicas(self):
        with pytest.raises(ConfigError):
            parse_config("frame_us=900\nsymbol_us=1\n")  # 900 < 2 * 500 symbols

    @pytest.mark.parametrize(
        "doc",
        ["rate=0", "degree=0", "max_iter=0", "trials=0", "workers=0", "seed=-1",
         "payload_bits=0", "symbol_us=0"],
    )
    def test_invariant_violations_rejected(self, doc):
        with pytest.raises(ConfigError):
            parse_config(doc)


class TestRoundTrip:
    @pytest.mark.parametrize(
        "doc",
        [
            "",
            "rate=1.0\nsnr_db=10\npayload_bits=1000",
            "positions=center\nheader_fraction=0.1\ngrid=0.1:1.0:0.1\nseed=7\nworkers=3",
            "campaign=throughput\ntrials=250",
        ],
    )
    def test_serialize_then_parse_is_identity(self, doc):
        cfg = parse_config(doc)
        assert parse_config(serialize_config(cfg)) == cfg

    def test_serialized_form_is_stable(self):
        cfg = CampaignConfig()
        assert parse_config(serialize_config(cfg)) == cfg
