import json

import pytest

from src.utils.config import ConfigError, Settings, load_settings, settings_from_mapping


def write(tmp_path, data, name="settings.json"):
    text = json.dumps(data) if name.endswith(".json") else data
    (tmp_path / name).write_text(text, encoding="utf-8")
    return tmp_path


def test_defaults_fill_optional_keys(tmp_path):
    s = load_settings(write(tmp_path, {"log_level": "debug", "seed": 3}))
    assert s.log_level == "DEBUG"
    assert s.seed == 3
    assert s.mode == "numeric"
    assert (s.max_space_dim, s.max_target_dim) == (12, 24)


def test_repository_settings_load():
    from pathlib import Path

    s = load_settings(Path(__file__).resolve().parents[1] / "config")
    assert s.max_product_length == 4


def test_yaml_settings(tmp_path):
    pytest.importorskip("yaml")
    s = load_settings(write(tmp_path, "log_level: INFO\nseed: 1\nfield: F7\n", "settings.yaml"))
    assert s.field == "F7"


@pytest.mark.parametrize(
    "data",
    [
        {"seed": 0},
        {"log_level": "LOUD", "seed": 0},
        {"log_level": "INFO", "seed": "zero"},
        {"log_level": "INFO", "seed": 0, "mode": "fast"},
        {"log_level": "INFO", "seed": 0, "field": "F4"},
        {"log_level": "INFO", "seed": 0, "max_product_length": 1},
        {"log_level": "INFO", "seed": 0, "random_trials": 0},
        {"log_level": "INFO", "seed": 0, "colour": "blue"},
    ],
)
def test_invalid_settings(data):
    with pytest.raises(ConfigError):
        settings_from_mapping(data)


def test_unparsable_json(tmp_path):
    (tmp_path / "settings.json").write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_settings(tmp_path)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_settings(tmp_path)


def test_overrides_skip_none_and_revalidate():
    s = Settings().with_overrides(mode=None, field="F5", seed=None)
    assert s.field == "F5"
    assert s.mode == "numeric"
    with pytest.raises(ConfigError):
        Settings().with_overrides(mode="exact")
    with pytest.raises(ConfigError):
        Settings(fp_max_modulus=3).with_overrides(field="F5")
