"""Configuration parsing, presets and the command line interface."""

import json

import pytest
from click.testing import CliRunner

from rydsim.cli import main
from rydsim.config import SCAN_TYPES, build_setup, load_config
from rydsim.errors import ChannelError, ConfigError
from rydsim.presets import load_pair_system, parse_channel_file, parse_level


class TestLoadConfig:
    def test_defaults_without_file(self):
        cfg = load_config(None, "gain-scan")
        assert cfg.scan == "gain-scan"
        assert cfg.samples == 2000
        assert cfg.pair_system == "rb87_50s48s"

    def test_empty_file_equals_defaults(self, tmp_path):
        path = tmp_path / "empty.cfg"
        path.write_text("# nothing but comments\n\n")
        assert load_config(str(path), "gain-scan").values == \
            load_config(None, "gain-scan").values

    def test_file_values_and_comments(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("samples = 500  # fewer samples\nseed = 7\n")
        cfg = load_config(str(path), "gain-scan")
        assert cfg.samples == 500
        assert cfg.seed == 7

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("not_a_key = 1\n")
        with pytest.raises(ConfigError, match="unknown key"):
            load_config(str(path), "gain-scan")

    def test_unknown_override_rejected(self):
        with pytest.raises(ConfigError, match="unknown override"):
            load_config(None, "gain-scan", {"nope": 1})

    def test_out_of_range_efficiency_rejected(self):
        with pytest.raises((ConfigError, ValueError)):
            cfg = load_config(None, "gain-scan", {"storage_efficiency": 1.3})
            build_setup(cfg)

    def test_unknown_scan_rejected(self):
        with pytest.raises(ConfigError):
            load_config(None, "not-a-scan")

    def test_field_grid_shorthand(self):
        cfg = load_config(None, "gain-scan", {
            "field_start": 0.6, "field_stop": 0.8, "field_points": 5,
        })
        assert cfg.field_grid == pytest.approx([0.6, 0.65, 0.7, 0.75, 0.8])

    def test_incomplete_shorthand_rejected(self):
        with pytest.raises(ConfigError, match="incomplete"):
            load_config(None, "gain-scan", {"field_start": 0.6})

    def test_echo_excludes_output_dir(self):
        cfg = load_config(None, "gain-scan", {"output_dir": "/tmp/somewhere"})
        echo = cfg.echo()
        assert "output_dir" not in echo
        assert echo == load_config(None, "gain-scan").echo()


class TestPresets:
    def test_parse_level_variants(self):
        lvl = parse_level("50S1/2 +1/2")
        assert (lvl.n, lvl.l, lvl.j, lvl.m_j) == (50, "S", 0.5, 0.5)
        lvl = parse_level("64P3/2 -3/2")
        assert (lvl.n, lvl.l, lvl.j, lvl.m_j) == (64, "P", 1.5, -1.5)
        with pytest.raises(ConfigError):
            parse_level("fifty S")

    def test_builtin_pair_systems_load(self):
        for name in ("rb87_50s48s", "rb87_66s64s"):
            pair, extra = load_pair_system(name)
            assert pair.name == name
            assert len(pair.channels) >= 1
            assert extra["gamma_p"] > 0

    def test_unknown_system_rejected(self):
        with pytest.raises((ConfigError, ChannelError, FileNotFoundError)):
            load_pair_system("rb87_does_not_exist")

    def test_channel_file_round_trip(self, tmp_path):
        text = (
            "name = toy\n"
            "theta = 0.0\n"
            "b_field = 1.0\n"
            "gate_s = 50S1/2 +1/2\n"
            "source_s = 48S1/2 +1/2\n"
            "c3_prime_mhz_um3 = 2.0\n"
            "gamma_p_mhz = 0.15\n"
            "[channel]\n"
            "gate = 49P1/2 +1/2\n"
            "source = 48P1/2 +1/2\n"
            "defect_zero_field_mhz = 9.0\n"
            "diff_polarizability_mhz = 4.0\n"
            "zeeman_shift_mhz = 0.0\n"
            "c3_mhz_um3 = 100.0\n"
            "weight = 1.0\n"
        )
        pair, _extra = parse_channel_file(text, source="toy")
        assert pair.name == "toy"
        assert len(pair.channels) == 1
        path = tmp_path / "toy.channels"
        path.write_text(text)
        pair2, _ = load_pair_system(str(path))
        assert pair2.channels == pair.channels


class TestCli:
    def test_all_scan_subcommands_registered(self):
        runner = CliRunner()
        result = runner.invoke(main, ["--help"])
        assert result.exit_code == 0
        for scan in SCAN_TYPES:
            assert scan in result.output

    def test_starkmap_runs_and_writes_outputs(self, tmp_path):
        runner = CliRunner()
        out = tmp_path / "run"
        result = runner.invoke(main, ["starkmap", "--out", str(out)])
        assert result.exit_code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["scan"] == "starkmap"

    def test_bad_override_exits_with_config_code(self, tmp_path):
        runner = CliRunner()
        result = runner.invoke(
            main, ["starkmap", "--set", "bogus=1", "--out", str(tmp_path)]
        )
        assert result.exit_code == 2

    def test_malformed_set_exits_with_config_code(self, tmp_path):
        runner = CliRunner()
        result = runner.invoke(
            main, ["starkmap", "--set", "noequals", "--out", str(tmp_path)]
        )
        assert result.exit_code == 2

    def test_missing_config_file_is_usage_error(self):
        runner = CliRunner()
        result = runner.invoke(main, ["starkmap", "--config", "/nope.cfg"])
        assert result.exit_code == 2
