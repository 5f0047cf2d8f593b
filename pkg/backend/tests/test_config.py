"""
Tests for runtime settings and experiment configuration loading.
"""

from pathlib import Path

import pytest

from config import Settings
from schemas import CsiMode, SystemConfig, downlink_label, load_system_config, uplink_label, validate_system_config
from app.core.errors import ConfigurationError
from app.core.modem import Modulation
from app.schemas.params import Regularizer

EXAMPLE_CONFIG = Path(__file__).resolve().parent.parent / "dbp.toml"


class TestSettings:
    """Test suite for Settings.validate_runtime_settings."""

    def test_defaults_are_valid(self):
        assert Settings().validate_runtime_settings() == []

    def test_worker_counts(self):
        errors = Settings(max_workers=0, trial_workers=0).validate_runtime_settings()
        assert len(errors) == 2
        assert any("DBP_MAX_WORKERS" in error for error in errors)

    def test_log_level(self):
        assert Settings(log_level="debug").validate_runtime_settings() == []
        assert Settings(log_level="chatty").validate_runtime_settings()

    def test_debug_in_production(self):
        errors = Settings(environment="production", debug=True).validate_runtime_settings()
        assert errors == ["DEBUG should be False in production environment"]

    def test_environment_prefix(self, monkeypatch):
        monkeypatch.setenv("DBP_MAX_WORKERS", "4")
        assert Settings().max_workers == 4


class TestLoadSystemConfig:
    """Test suite for load_system_config."""

    def test_defaults_without_file(self):
        config = load_system_config()
        assert config == SystemConfig()
        assert config.antennas == 64

    def test_example_file(self):
        config = load_system_config(EXAMPLE_CONFIG)
        assert config.users == 16
        assert config.modulation is Modulation.QAM16
        assert config.admm.regularizer is Regularizer.MMSE
        assert config.iterations == [1, 2, 3, 4, 5]

    def test_overrides_win_and_none_is_skipped(self):
        config = load_system_config(EXAMPLE_CONFIG, {"users": 8, "trials": None, "admm": {"rho": 2.0}})
        assert config.users == 8
        assert config.trials == 200
        assert config.admm.rho == 2.0
        assert config.admm.gamma == 1.0

    def test_string_enums(self):
        config = load_system_config(overrides={"modulation": "qpsk", "csi": "estimated"})
        assert config.modulation is Modulation.QPSK
        assert config.csi is CsiMode.ESTIMATED

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="not found"):
            load_system_config(tmp_path / "absent.toml")

    def test_invalid_toml(self, tmp_path):
        path = tmp_path / "broken.toml"
        path.write_text("users = = 3\n")
        with pytest.raises(ConfigurationError, match="invalid TOML"):
            load_system_config(path)

    def test_schema_violation_lists_field(self):
        with pytest.raises(ConfigurationError) as exc_info:
            load_system_config(overrides={"clusters": 0})
        assert any(error.startswith("clusters") for error in exc_info.value.errors)

    def test_unknown_modulation(self):
        with pytest.raises(ConfigurationError):
            load_system_config(overrides={"modulation": "8psk"})


class TestValidateSystemConfig:
    """Test suite for the cross-field checks."""

    def test_valid(self, tiny_config):
        assert validate_system_config(tiny_config) == []

    def test_more_users_than_antennas(self):
        errors = validate_system_config(SystemConfig(users=20, clusters=2, antennas_per_cluster=8))
        assert errors == ["users U=20 exceed antennas B=16"]

    def test_unknown_algorithms(self):
        config = SystemConfig(algorithms=["mmse", "sphere"], downlink_algorithms=["mrt"])
        assert len(validate_system_config(config)) == 2

    def test_empty_grids_and_bad_iterations(self):
        errors = validate_system_config(SystemConfig(snr_grid_db=[], iterations=[0, 2]))
        assert "snr_grid_db must not be empty" in errors
        assert "iteration counts must be >= 1, got 0" in errors

    def test_cg_loading(self):
        errors = validate_system_config(SystemConfig(cg_loading="box"))
        assert errors == ["cg_loading must be 'mmse' or 'zf'"]

    def test_bpsk_regularizer_needs_bpsk(self):
        config = SystemConfig(admm={"regularizer": "bpsk"}, modulation="qpsk")
        assert validate_system_config(config) == ["the bpsk regularizer requires bpsk modulation"]
        assert validate_system_config(config.model_copy(update={"modulation": Modulation.BPSK})) == []

    def test_load_reports_every_error(self):
        with pytest.raises(ConfigurationError) as exc_info:
            load_system_config(overrides={"users": 100, "algorithms": ["sphere"]})
        assert len(exc_info.value.errors) == 2


class TestLabels:
    """Test suite for report labels."""

    def test_uplink(self):
        assert uplink_label("admm") == "admm-mmse"
        assert uplink_label("admm", "box") == "admm-box"
        assert uplink_label("cg") == "cg"
        assert uplink_label("mmse", Regularizer.ZF) == "mmse"

    def test_downlink(self):
        assert downlink_label("zf") == "zf-dl"
        assert downlink_label("admm") == "admm-dl"
