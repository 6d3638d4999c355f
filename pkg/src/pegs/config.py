"""Run configuration loading and validation."""

from __future__ import annotations

import argparse
import logging
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any

import yaml


DEFAULT_CONFIG_PATHS = [
    Path.home() / ".config" / "pegs" / "config.yaml",
    Path.home() / ".config" / "pegs" / "config.yml",
]

LOG_LEVELS = {
    "error": logging.ERROR,
    "warning": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

KINDS = ("square", "hexagon", "rhombus")

TEMPLATE = """\
# pegs run configuration. Command-line flags override these values.

# Curve spec: circle, ellipse:a,b, rounded-poly:x1,y1;x2,y2;...@rho,
# helix-chord[:rho] or file:path.csv
curve: ellipse:2,1

# Peg shape: square, hexagon or rhombus
kind: square

# Grid points per circle parameter in the candidate scan
grid: 32

# Newton stops once the rescaled residual drops below tol
tol: 1.0e-10

# Gap ratio below which points count as colliding
stratum_threshold: 0.05

# Finite-difference step for Jacobians, within [1e-8, 1e-4]
fd_step: 1.0e-6

# Seed for the boundary sampling in `pegs verify`
seed: 20080604

# Samples per boundary stratum in `pegs verify`
samples: 100

# Refinement threads (omit for one per core)
# threads: 4

# Upper bound on refined candidates per run
max_candidates: 256
"""


class ConfigError(Exception):
    """Raised when configuration is invalid."""


@dataclass
class RunConfig:
    """Effective settings for one run, echoed into every JSON report."""

    curve: str | None = None
    kind: str = "square"
    grid: int = 32
    tol: float = 1e-10
    stratum_threshold: float = 0.05
    fd_step: float = 1e-6
    seed: int = 20080604
    samples: int = 100
    threads: int | None = None
    max_candidates: int = 256

    @classmethod
    def load(cls, config_path: Path | None = None) -> RunConfig:
        """Load configuration from file.

        Args:
            config_path: Path to config file. If None, uses PEGS_CONFIG env var
                        or ~/.config/pegs/config.yaml when it exists

        Returns:
            Loaded RunConfig; built-in defaults when no file is found

        Raises:
            ConfigError: If the file is missing, not YAML, or has bad keys or values
        """
        if config_path is None:
            env_path = os.environ.get("PEGS_CONFIG")
            if env_path:
                config_path = Path(env_path).expanduser()
            else:
                config_path = next((p for p in DEFAULT_CONFIG_PATHS if p.exists()), None)
                if config_path is None:
                    return cls()
        else:
            config_path = config_path.expanduser()

        if not config_path.exists():
            raise ConfigError(f"Config file not found: {config_path}")

        try:
            with open(config_path) as f:
                data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"Invalid YAML in {config_path}: {e}") from e

        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(f"Config {config_path} must be a mapping of settings")
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunConfig:
        """Build a config from a flat mapping, checking keys and types.

        Raises:
            ConfigError: On unknown keys or values of the wrong type
        """
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")
        config = cls(**{key: _coerce(key, value) for key, value in data.items()})
        config.validate()
        return config

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {', '.join(KINDS)}, got {self.kind!r}")
        if self.grid < 8:
            raise ConfigError(f"grid must be at least 8, got {self.grid}")
        if self.tol <= 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if not 0 < self.stratum_threshold < 1:
            raise ConfigError(f"stratum_threshold must lie in (0, 1), got {self.stratum_threshold}")
        if not 1e-8 <= self.fd_step <= 1e-4:
            raise ConfigError(f"fd_step must lie in [1e-8, 1e-4], got {self.fd_step}")
        if self.samples < 1:
            raise ConfigError(f"samples must be positive, got {self.samples}")
        if self.threads is not None and self.threads < 1:
            raise ConfigError(f"threads must be positive, got {self.threads}")
        if self.max_candidates < 1:
            raise ConfigError(f"max_candidates must be positive, got {self.max_candidates}")

    def merged(self, args: argparse.Namespace) -> RunConfig:
        """Config with every command-line flag that was given taking precedence."""
        overrides = {
            f.name: getattr(args, f.name)
            for f in fields(self)
            if getattr(args, f.name, None) is not None
        }
        config = replace(self, **overrides)
        config.validate()
        return config

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


_INT_KEYS = {"grid", "seed", "samples", "threads", "max_candidates"}
_FLOAT_KEYS = {"tol", "stratum_threshold", "fd_step"}


def _coerce(key: str, value: Any) -> Any:
    if value is None and key in {"curve", "threads"}:
        return None
    if key in _INT_KEYS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer, got {value!r}")
        return value
    if key in _FLOAT_KEYS:
        # YAML 1.1 reads 1e-10 (no dot) as a string
        if isinstance(value, str):
            try:
                return float(value)
            except ValueError:
                pass
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number, got {value!r}")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{key} must be a string, got {value!r}")
    return value


def log_level() -> int:
    """Logging level named by PEGS_LOG (default warning).

    Raises:
        ConfigError: If PEGS_LOG names an unknown level
    """
    name = os.environ.get("PEGS_LOG", "warning").strip().lower()
    if name not in LOG_LEVELS:
        raise ConfigError(f"PEGS_LOG must be one of {', '.join(LOG_LEVELS)}, got {name!r}")
    return LOG_LEVELS[name]
