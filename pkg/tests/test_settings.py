import sys
import os
import json

import pytest

# Add parent directory to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.utils.errors import ConfigError
from src.utils.settings import ENV_OVERRIDES, Settings, load_benchmark_defaults, load_settings


@pytest.fixture(autouse=True)
def clean_env(monkeypatch, tmp_path):
    for key in list(ENV_OVERRIDES) + ["CZDC_SETTINGS", "CZDC_BENCHMARKS"]:
        monkeypatch.delenv(key, raising=False)
    # no stray czdc.env is picked up
    monkeypatch.setattr("src.utils.settings.DEFAULT_ENV_PATH", str(tmp_path / "absent.env"))


def write_json(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def test_defaults_from_repo_config():
    settings = load_settings()
    assert settings.vertex_cap == 16 and settings.convexify_strategy == "positive"


def test_missing_file_falls_back_to_defaults(tmp_path):
    assert load_settings(str(tmp_path / "nope.json")) == Settings()


def test_json_values_and_unknown_keys(tmp_path):
    path = write_json(tmp_path / "s.json", {"tol_opt": 1e-7, "workers": 3, "gpio_pin": 4})
    settings = load_settings(path)
    assert settings.tol_opt == 1e-7 and settings.workers == 3


def test_env_overrides_json(tmp_path, monkeypatch):
    path = write_json(tmp_path / "s.json", {"vertex_cap": 12})
    monkeypatch.setenv("CZDC_VERTEX_CAP", "8")
    monkeypatch.setenv("CZDC_CONVEXIFY", "best")
    settings = load_settings(path)
    assert settings.vertex_cap == 8 and settings.convexify_strategy == "best"


def test_env_file_is_loaded(tmp_path, monkeypatch):
    # load_dotenv writes to os.environ; register the key so it is removed afterwards
    monkeypatch.setenv("CZDC_WORKERS", "1")
    monkeypatch.delenv("CZDC_WORKERS")
    env = tmp_path / "czdc.env"
    env.write_text("CZDC_WORKERS=4\n")
    assert load_settings(str(tmp_path / "nope.json"), env_path=str(env)).workers == 4


def test_settings_path_from_env(tmp_path, monkeypatch):
    monkeypatch.setenv("CZDC_SETTINGS", write_json(tmp_path / "s.json", {"log_level": "DEBUG"}))
    assert load_settings().log_level == "DEBUG"


def test_invalid_env_value(monkeypatch):
    monkeypatch.setenv("CZDC_TOL_FEAS", "tiny")
    with pytest.raises(ConfigError):
        load_settings()


def test_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{ not json")
    with pytest.raises(ConfigError):
        load_settings(str(path))


@pytest.mark.parametrize("field,value", [
    ("tol_feas", 0.0),
    ("inflation", -1.0),
    ("vertex_cap", 0),
    ("contraction_passes", 0),
    ("convexify_strategy", "random"),
    ("workers", 0),
])
def test_invalid_values_rejected(tmp_path, field, value):
    with pytest.raises(ConfigError):
        load_settings(write_json(tmp_path / "s.json", {field: value}))


def test_benchmark_defaults():
    quad = load_benchmark_defaults("quad2d")
    assert (quad["steps"], quad["runs"], quad["phi_c"], quad["phi_g"]) == (40, 100, 3, 8)
    att = load_benchmark_defaults("attitude")
    assert (att["steps"], att["runs"], att["phi_c"], att["phi_g"]) == (200, 5, 10, 30)
    assert att["stage_enclosure"]["forecast"] == "box"


def test_benchmark_defaults_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_benchmark_defaults("pendulum")
    with pytest.raises(ConfigError):
        load_benchmark_defaults("quad2d", str(tmp_path / "missing.json"))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
