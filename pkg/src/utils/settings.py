import json
import logging
import os
from dataclasses import dataclass, fields, replace

from dotenv import load_dotenv

from .errors import ConfigError

logger = logging.getLogger("Settings")

CONFIG_DIR = os.path.join(os.path.dirname(__file__), '../../config')
DEFAULT_SETTINGS_PATH = os.path.join(CONFIG_DIR, 'settings.json')
DEFAULT_BENCHMARKS_PATH = os.path.join(CONFIG_DIR, 'benchmarks.json')
DEFAULT_ENV_PATH = os.path.join(CONFIG_DIR, 'czdc.env')

CONVEXIFY_STRATEGIES = ("positive", "best")


@dataclass(frozen=True)
class Settings:
    """
    Solver and filter defaults read from config/settings.json.

    Environment variables (optionally loaded from config/czdc.env) win over
    the JSON file; the JSON file wins over the values below.
    """
    log_level: str = "INFO"
    tol_feas: float = 1e-9
    tol_opt: float = 1e-8
    inflation: float = 1e-12
    vertex_cap: int = 16
    contraction_passes: int = 1
    convexify_strategy: str = "positive"
    workers: int = 1

    def __post_init__(self):
        if self.tol_feas <= 0 or self.tol_opt <= 0:
            raise ConfigError("Tolerances must be positive")
        if self.inflation < 0:
            raise ConfigError("inflation must be non-negative")
        if self.vertex_cap < 1:
            raise ConfigError("vertex_cap must be at least 1")
        if self.contraction_passes < 1:
            raise ConfigError("contraction_passes must be at least 1")
        if self.convexify_strategy not in CONVEXIFY_STRATEGIES:
            raise ConfigError(f"Unknown convexify_strategy '{self.convexify_strategy}'")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")


# Environment variable -> (field, parser)
ENV_OVERRIDES = {
    "CZDC_LOG_LEVEL": ("log_level", str),
    "CZDC_TOL_FEAS": ("tol_feas", float),
    "CZDC_TOL_OPT": ("tol_opt", float),
    "CZDC_VERTEX_CAP": ("vertex_cap", int),
    "CZDC_CONVEXIFY": ("convexify_strategy", str),
    "CZDC_WORKERS": ("workers", int),
}


def _read_json(path):
    try:
        with open(path, 'r') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Malformed JSON in {path}: {e}") from e


def load_settings(path=None, env_path=None):
    """Builds Settings from JSON defaults plus environment overrides."""
    load_dotenv(env_path or DEFAULT_ENV_PATH, override=False)
    path = path or os.getenv("CZDC_SETTINGS") or DEFAULT_SETTINGS_PATH

    values = {}
    if os.path.exists(path):
        raw = _read_json(path)
        known = {f.name for f in fields(Settings)}
        for key, val in raw.items():
            if key in known:
                values[key] = val
            else:
                logger.warning(f"Ignoring unknown setting '{key}' in {path}")
    else:
        logger.warning(f"Settings file {path} not found, using built-in defaults")

    for env_key, (field_name, parse) in ENV_OVERRIDES.items():
        raw_val = os.getenv(env_key)
        if raw_val is None or raw_val == "":
            continue
        try:
            values[field_name] = parse(raw_val)
        except ValueError as e:
            raise ConfigError(f"Invalid value for {env_key}: {raw_val!r}") from e

    return replace(Settings(), **values)


def load_benchmark_defaults(benchmark, path=None):
    """Returns the run defaults for one benchmark from config/benchmarks.json."""
    load_dotenv(DEFAULT_ENV_PATH, override=False)
    path = path or os.getenv("CZDC_BENCHMARKS") or DEFAULT_BENCHMARKS_PATH
    if not os.path.exists(path):
        raise ConfigError(f"Benchmark map {path} not found")

    config = _read_json(path)
    for entry in config.get('benchmarks', []):
        if entry.get('name') == benchmark:
            return dict(entry)
    raise ConfigError(f"Benchmark '{benchmark}' missing from {path}")
