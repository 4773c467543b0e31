"""
Experiment configuration.

Precedence: built-in defaults < per-command defaults < environment
(QSWITCH_* variables, .env honoured) < JSON config file < command-line flags.
"""
import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from src.core.cv_state import VACUUM_ENERGY
from src.core.exceptions import ConfigurationError
from src.schemes.instances import SchemeTag

logger = logging.getLogger(__name__)

ENV_PREFIX = "QSWITCH_"
DEFAULT_ZBAR_GRID = [round(0.05 * k, 10) for k in range(1, 21)]
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

# Fields that do not change results and stay out of the provenance hash.
NON_RESULT_FIELDS = {"out", "format", "workers", "log_level", "progress"}

COMMAND_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "scaling": {"ns": [3, 5, 8, 12, 20], "trials": 500},
    "figure3": {"energies": [0.5, 1.0], "ns": [5, 15], "nu": 10},
    "fisher": {"ns": [2], "x_bar": 1.0, "p_bar": 0.5},
}


class ExperimentConfig(BaseModel):
    """Every knob of every command, validated before anything runs."""

    model_config = ConfigDict(extra="forbid")

    schemes: List[SchemeTag] = [SchemeTag.SWITCH_CONTROL]
    ns: List[int] = [5]
    nu: int = 10000
    trials: int = 2000
    seed: Optional[int] = None
    x_bar: float = 0.2
    p_bar: float = 0.2
    x_range: Optional[Tuple[float, float]] = None
    p_range: Optional[Tuple[float, float]] = None
    instances: int = 1
    target_phase: float = 1.0
    beta_gup: float = 0.0
    energies: List[float] = [VACUUM_ENERGY]
    z_max: Optional[float] = None
    energy_budget: float = 1.0
    zbar_grid: List[float] = DEFAULT_ZBAR_GRID
    dim: int = 64
    cases: int = 200
    oracle_max_n: int = 3
    magnitude: float = 0.5
    out: Optional[str] = None
    format: Literal["csv", "json"] = "csv"
    workers: int = 1
    log_level: str = "INFO"
    progress: bool = False

    @field_validator("ns")
    @classmethod
    def _valid_ns(cls, values: List[int]) -> List[int]:
        if not values or any(n < 1 for n in values):
            raise ValueError("n values must be a non-empty list of integers >= 1")
        return values

    @field_validator("nu", "instances", "workers", "dim", "cases", "oracle_max_n")
    @classmethod
    def _at_least_one(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be >= 1")
        return value

    @field_validator("trials")
    @classmethod
    def _enough_trials(cls, value: int) -> int:
        if value < 2:
            raise ValueError("Monte Carlo needs at least 2 trials")
        return value

    @field_validator("seed")
    @classmethod
    def _non_negative_seed(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value < 0:
            raise ValueError("seed must be non-negative")
        return value

    @field_validator("x_range", "p_range")
    @classmethod
    def _ordered_range(cls, value: Optional[Tuple[float, float]]) -> Optional[Tuple[float, float]]:
        if value is not None and not (np.isfinite(value).all() and value[0] <= value[1]):
            raise ValueError(f"range {value} must be finite with min <= max")
        return value

    @field_validator("energies")
    @classmethod
    def _physical_energies(cls, values: List[float]) -> List[float]:
        if not values or any(e < VACUUM_ENERGY for e in values):
            raise ValueError(f"probe energies must be >= {VACUUM_ENERGY}")
        return values

    @field_validator("zbar_grid")
    @classmethod
    def _positive_grid(cls, values: List[float]) -> List[float]:
        if not values or any(z <= 0 for z in values):
            raise ValueError("z_bar grid must be non-empty and positive")
        return values

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        value = value.upper()
        if value not in LOG_LEVELS:
            raise ValueError(f"log level must be one of {LOG_LEVELS}")
        return value

    @model_validator(mode="after")
    def _both_ranges(self) -> "ExperimentConfig":
        if (self.x_range is None) != (self.p_range is None):
            raise ValueError("x_range and p_range must be given together")
        return self

    @property
    def uses_ranges(self) -> bool:
        return self.x_range is not None

    def resolved_z_max(self) -> float:
        """z_max as configured, else derived from the ranges, else from the means."""
        if self.z_max is not None:
            return self.z_max
        if self.uses_ranges:
            return max(abs(v) for v in (*self.x_range, *self.p_range))
        return max(abs(self.x_bar), abs(self.p_bar))

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigurationError("A seed is required for simulation commands (--seed)")
        return self.seed


def _environment() -> Dict[str, Any]:
    load_dotenv()
    values: Dict[str, Any] = {}
    if os.getenv(f"{ENV_PREFIX}WORKERS"):
        values["workers"] = int(os.environ[f"{ENV_PREFIX}WORKERS"])
    if os.getenv(f"{ENV_PREFIX}LOG_LEVEL"):
        values["log_level"] = os.environ[f"{ENV_PREFIX}LOG_LEVEL"]
    return values


def _config_file(config_path: Optional[str]) -> Dict[str, Any]:
    if not config_path:
        return {}
    path = Path(config_path)
    if not path.exists():
        raise ConfigurationError(f"Config file {path} not found")
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"Config file {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"Config file {path} must hold a flat JSON object")
    return data


def load_config(
    config_path: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
    command: Optional[str] = None,
) -> ExperimentConfig:
    """Merge every configuration layer; None-valued overrides are ignored."""
    merged: Dict[str, Any] = dict(COMMAND_DEFAULTS.get(command, {}))
    merged.update(_environment())
    merged.update(_config_file(config_path))
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return ExperimentConfig(**merged)


def config_hash(config: ExperimentConfig) -> str:
    """SHA-256 of the canonical JSON of the result-relevant fields."""
    payload = config.model_dump(mode="json", exclude=NON_RESULT_FIELDS)
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()
