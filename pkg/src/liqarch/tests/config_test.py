"""Tests for liqarch.config."""

from argparse import Namespace
from pathlib import Path

from pytest import approx, mark, raises

from liqarch.config import RunConfig, apply_overrides, load_config
from liqarch.exceptions import ConfigError

RUN_TOML = Path(__file__).parents[3] / "run.toml"

FULL_CONFIG = """
[run]
venue = "stock"
inputs = ["bars.csv"]
output_dir = "out"
seed = 7
threads = 2
log_level = "INFO"

[liquidity]
min_minutes = 60
beta_cap = 5.0
histogram_bins = 20

[backtest]
window_len = 242
p_max = 2
q_max = 3
reselect_orders = false

[portfolio]
annualization_days = 250
lambda_floor = 1e-3

[synth]
enabled = true
mode = "daily"
assets = 2
volume_spike = 50.0
"""


def write_config(tmp_path, contents):
    path = tmp_path / "run.toml"
    path.write_text(contents)
    return str(path)


class TestLoadConfig:
    def test_full_config(self, tmp_path):
        config = load_config(write_config(tmp_path, FULL_CONFIG))
        assert config.venue == "stock"
        assert config.inputs == ["bars.csv"]
        assert (config.min_minutes, config.beta_cap, config.histogram_bins) == (60, 5.0, 20)
        assert (config.p_max, config.q_max, config.reselect_orders) == (2, 3, False)
        assert config.synth and config.synth_mode == "daily"
        assert config.synth_assets == 2 and config.synth_volume_spike == 50.0
        assert config.effective_annualization_days == 250

    def test_single_input_string(self, tmp_path):
        config = load_config(write_config(tmp_path, '[run]\ninputs = "bars.csv"\n'))
        assert config.inputs == ["bars.csv"]

    @mark.parametrize(
        "contents",
        [
            "[unknown]\nkey = 1\n",
            "[run]\nwindow_len = 242\n",
            "[synth]\nsynth_assets = 2\n",
            "[run\n",
        ],
    )
    def test_invalid(self, tmp_path, contents):
        with raises(ConfigError):
            load_config(write_config(tmp_path, contents))

    def test_missing_file(self, tmp_path):
        with raises(ConfigError):
            load_config(str(tmp_path / "absent.toml"))


class TestRunConfig:
    @mark.parametrize(
        "venue, window_len, annualization_days",
        [("stock", 242, 252), ("crypto", 365, 365)],
    )
    def test_venue_defaults(self, venue, window_len, annualization_days):
        config = RunConfig(venue=venue)
        assert config.effective_window_len == window_len
        assert config.effective_annualization_days == annualization_days
        assert config.window_spec().window_len == window_len
        assert config.portfolio_spec().market_window == window_len

    def test_explicit_window(self):
        config = RunConfig(venue="stock", window_len=120, lambda_window=60)
        assert config.window_spec().window_len == 120
        assert config.portfolio_spec().market_window == 60

    @mark.parametrize(
        "kwargs",
        [
            {"venue": "forex"},
            {"beta_cap": 0.0},
            {"window_len": 30},
            {"p_max": 5},
            {"threads": 0},
            {"log_level": "LOUD"},
            {"synth_mode": "hourly"},
            {"lambda_floor": -1.0},
            {"synth": True, "synth_alpha": 0.5, "synth_beta": 0.6},
            {"synth": True, "synth_volume_spike": 0.0},
        ],
    )
    def test_validate(self, kwargs):
        with raises(ConfigError):
            RunConfig(**kwargs).validate(check_inputs=False)

    def test_missing_inputs(self, tmp_path):
        present = tmp_path / "bars.csv"
        present.write_text("ticker,minute_start,close,amount\n")
        config = RunConfig(inputs=[str(present), str(tmp_path / "absent.csv")])
        with raises(ConfigError, match="absent.csv"):
            config.validate()
        assert config.validate(check_inputs=False) is config

    def test_bundled_run_toml_is_valid(self):
        config = load_config(str(RUN_TOML)).validate()
        assert config.synth and config.synth_mode == "minute"
        assert config.venue == "crypto"
        assert config.jump_params().volume_spike == 1e4
        assert config.daily_dynamics().unconditional_variance == approx(4e-4)

    def test_defaults_match_bundled_run_toml(self):
        bundled = load_config(str(RUN_TOML))
        defaults = RunConfig(synth=True)
        assert bundled.jump_params() == defaults.jump_params()
        assert bundled.daily_dynamics() == defaults.daily_dynamics()
        assert (bundled.synth_assets, bundled.synth_days) == (
            defaults.synth_assets,
            defaults.synth_days,
        )


class TestApplyOverrides:
    def test_given_flags_override(self, monkeypatch):
        monkeypatch.delenv("LIQARCH_THREADS", raising=False)
        config = apply_overrides(
            RunConfig(seed=1, p_max=4), Namespace(seed=5, p_max=None, reselect_orders=False)
        )
        assert config.seed == 5
        assert config.p_max == 4
        assert config.reselect_orders is False
        assert config.threads == 1

    def test_threads_environment_fallback(self, monkeypatch):
        monkeypatch.setenv("LIQARCH_THREADS", "4")
        assert apply_overrides(RunConfig(), Namespace(threads=None)).threads == 4
        assert apply_overrides(RunConfig(), Namespace(threads=2)).threads == 2

    def test_bad_threads_environment(self, monkeypatch):
        monkeypatch.setenv("LIQARCH_THREADS", "many")
        with raises(ConfigError):
            apply_overrides(RunConfig(), Namespace())
