"""
Configuration handling for the spaced-module analysis pipeline.

Runtime settings are read from ``settings.json`` or ``settings.yaml`` in the
``config`` directory. ``log_level`` and ``seed`` are required; every other key has a
default. Command-line flags override the loaded values.

If configuration cannot be loaded, a ``ConfigError`` will be raised.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional

try:
    import yaml  # type: ignore
except ImportError:  # pragma: no cover
    yaml = None  # type: ignore

from src.algebra.scalars import FieldSpec, ScalarFormatError

MODES = ("numeric", "symbolic", "prime")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class ConfigError(Exception):
    """Raised when there is a problem loading or parsing configuration files."""


@dataclass
class Settings:
    """
    Runtime settings for the pipeline.

    Attributes
    ----------
    log_level : str
        Logging level (e.g. "INFO", "DEBUG").
    seed : int
        Seed for the randomised invertibility trials of the isomorphism test.
    mode : str, optional
        Rescaling mode; prime fields always use ``"prime"``.
    field : str, optional
        Field override such as ``"Q"`` or ``"F5"``.
    random_trials : int
        Random points tried before the exhaustive search.
    fp_max_modulus : int
        Largest prime accepted for prime-field runs.
    max_space_dim, max_target_dim : int
        Size bounds of the isomorphism test.
    exhaustive_limit : int
        Largest number of coefficient vectors the exhaustive search visits.
    max_product_length : int
        Longest path of basis morphisms multiplied in the rank check.
    """

    log_level: str = "INFO"
    seed: int = 0
    mode: Optional[str] = "numeric"
    field: Optional[str] = None
    random_trials: int = 5
    fp_max_modulus: int = 2**20
    max_space_dim: int = 12
    max_target_dim: int = 24
    exhaustive_limit: int = 4096
    max_product_length: int = 4

    def with_overrides(self, **overrides: Any) -> "Settings":
        """Copy with every non-``None`` override applied, then re-validated."""
        changed = {k: v for k, v in overrides.items() if v is not None}
        return _validated(replace(self, **changed))


_POSITIVE = ("random_trials", "fp_max_modulus", "max_space_dim", "max_target_dim", "exhaustive_limit", "max_product_length")


def _validated(s: Settings) -> Settings:
    s.log_level = str(s.log_level).upper()
    if s.log_level not in LOG_LEVELS:
        raise ConfigError(f"Invalid log_level: {s.log_level}")
    if s.mode is not None and s.mode not in MODES:
        raise ConfigError(f"Invalid mode {s.mode!r}; expected one of {', '.join(MODES)}")
    if isinstance(s.seed, bool) or not isinstance(s.seed, int):
        raise ConfigError(f"seed must be an integer, got {s.seed!r}")
    for name in _POSITIVE:
        value = getattr(s, name)
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise ConfigError(f"{name} must be a positive integer, got {value!r}")
    if s.max_product_length < 2:
        raise ConfigError("max_product_length must be at least 2")
    if s.field is not None:
        try:
            spec = FieldSpec.from_label(s.field)
        except ScalarFormatError as exc:
            raise ConfigError(f"Invalid field: {exc}") from exc
        if spec.is_prime_field and spec.p > s.fp_max_modulus:
            raise ConfigError(f"prime {spec.p} exceeds fp_max_modulus {s.fp_max_modulus}")
    return s


def settings_from_mapping(data: Dict[str, Any]) -> Settings:
    """Build validated settings from an already-parsed mapping."""
    if not isinstance(data, dict):
        raise ConfigError("Configuration root must be a mapping")
    if "log_level" not in data or "seed" not in data:
        raise ConfigError("Configuration must include 'log_level' and 'seed'")
    known = {f.name for f in fields(Settings)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"Unknown configuration keys: {', '.join(unknown)}")
    return _validated(Settings(**data))


def load_settings(config_dir: Path) -> Settings:
    """
    Load pipeline settings from the given configuration directory.

    The function looks for ``settings.json``, ``settings.yaml`` or
    ``settings.yml`` within ``config_dir``.

    Parameters
    ----------
    config_dir : Path
        Directory containing configuration files.

    Returns
    -------
    Settings
        Parsed settings dataclass.

    Raises
    ------
    ConfigError
        If configuration cannot be parsed or holds invalid values.
    FileNotFoundError
        If no supported configuration file is found.
    """
    candidates = [
        config_dir / "settings.json",
        config_dir / "settings.yaml",
        config_dir / "settings.yml",
    ]
    config_path: Optional[Path] = None
    for path in candidates:
        if path.exists():
            config_path = path
            break
    if config_path is None:
        raise FileNotFoundError(f"No settings file found in {config_dir}")
    if config_path.suffix in {".yaml", ".yml"}:
        if yaml is None:
            raise ConfigError("PyYAML is required to load YAML configuration files")
        with config_path.open("r", encoding="utf-8") as f:
            try:
                data = yaml.safe_load(f)
            except Exception as exc:
                raise ConfigError(f"Failed to parse YAML: {exc}") from exc
    else:
        with config_path.open("r", encoding="utf-8") as f:
            try:
                data = json.load(f)
            except Exception as exc:
                raise ConfigError(f"Failed to parse JSON: {exc}") from exc
    return settings_from_mapping(data)
