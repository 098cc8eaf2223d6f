"""
Configuration loading and per-invocation validation
"""

import pytest
import yaml

from core.errors import InstanceError
from core.settings import ExperimentConfig, Settings, get_settings, load_settings, reset_settings


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for name in ("STOQLAB_WORKERS", "STOQLAB_MODE", "LOG_LEVEL", "STOQLAB_CONFIG"):
        monkeypatch.delenv(name, raising=False)
    yield
    reset_settings()


def write_config(tmp_path, data) -> str:
    target = tmp_path / "config.yaml"
    target.write_text(yaml.safe_dump(data))
    return str(target)


class TestLoadSettings:
    def test_shipped_config_matches_defaults(self):
        assert load_settings() == Settings()

    def test_file_values(self, tmp_path):
        settings = load_settings(write_config(tmp_path, {"sos": {"epsilon": 0.1}, "suite": {"seed": 5}}))
        assert settings.sos.epsilon == 0.1
        assert settings.suite.seed == 5
        assert settings.protocols.c_prod_fraction == Settings().protocols.c_prod_fraction

    def test_missing_file_uses_defaults(self, tmp_path):
        assert load_settings(str(tmp_path / "absent.yaml")) == Settings()

    def test_environment_wins(self, tmp_path, monkeypatch):
        monkeypatch.setenv("STOQLAB_WORKERS", "4")
        monkeypatch.setenv("STOQLAB_MODE", "float")
        settings = load_settings(write_config(tmp_path, {"simulation": {"workers": 2}}))
        assert settings.simulation.workers == 4
        assert settings.arithmetic.mode == "float"

    @pytest.mark.parametrize("data", [
        {"arithmetic": {"mode": "decimal"}},
        {"simulation": {"workers": 0}},
        {"cleancc": {"sweep_n": 4}},
    ])
    def test_out_of_range(self, tmp_path, data):
        with pytest.raises(InstanceError):
            load_settings(write_config(tmp_path, data))

    def test_invalid_yaml(self, tmp_path):
        target = tmp_path / "config.yaml"
        target.write_text("suite: [unclosed")
        with pytest.raises(InstanceError):
            load_settings(str(target))

    def test_cached_until_reset(self, tmp_path):
        first = get_settings(write_config(tmp_path, {"suite": {"seed": 9}}))
        assert get_settings() is first
        reset_settings()
        assert get_settings().suite.seed == Settings().suite.seed


class TestExperimentConfig:
    def test_monte_carlo_needs_seed(self):
        with pytest.raises(InstanceError, match="--seed"):
            ExperimentConfig.create(subcommand="np4")
        assert ExperimentConfig.create(subcommand="np4", seed=0).seed == 0

    def test_exact_commands_need_no_seed(self):
        assert ExperimentConfig.create(subcommand="verify").seed is None

    @pytest.mark.parametrize("fields", [
        {"mode": "decimal"},
        {"workers": 0},
        {"gamma": 1.0},
        {"epsilon": 0.0},
        {"K": 0},
    ])
    def test_invalid_fields(self, fields):
        with pytest.raises(InstanceError):
            ExperimentConfig.create(subcommand="rect-closure", **fields)
