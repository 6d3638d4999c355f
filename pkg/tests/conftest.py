"""Test fixtures for pegs tests."""

from __future__ import annotations

import math
import os
from pathlib import Path
from typing import Generator

import numpy as np
import pytest

from pegs.config import RunConfig
from pegs.curves import Ellipse, HelixChord, RoundedPolygon, UnitCircle

TRIANGLE = [(0.0, 0.0), (6.0, 0.0), (3.0, 3.0 * math.sqrt(3.0))]


@pytest.fixture
def circle() -> UnitCircle:
    return UnitCircle()


@pytest.fixture
def ellipse() -> Ellipse:
    return Ellipse(2.0, 1.0)


@pytest.fixture
def rounded_triangle() -> RoundedPolygon:
    """Equilateral triangle with side 6 and corner radius 0.02."""
    return RoundedPolygon(TRIANGLE, 0.02)


@pytest.fixture
def helix() -> HelixChord:
    return HelixChord()


@pytest.fixture
def sampled_ellipse_csv(tmp_path: Path) -> Path:
    """CSV file of 200 samples of the ellipse (2 cos t, sin t).

    Returns:
        Path to the CSV file
    """
    ts = np.arange(200) * (2.0 * math.pi / 200)
    path = tmp_path / "loop.csv"
    rows = [f"{2.0 * math.cos(t)!r},{math.sin(t)!r}" for t in ts]
    path.write_text("# x,y\n" + "\n".join(rows) + "\n")
    return path


@pytest.fixture
def clean_env() -> Generator[None, None, None]:
    """Unset PEGS_CONFIG and PEGS_LOG for the duration of a test."""
    saved = {key: os.environ.pop(key, None) for key in ("PEGS_CONFIG", "PEGS_LOG")}

    yield

    for key, value in saved.items():
        if value is None:
            os.environ.pop(key, None)
        else:
            os.environ[key] = value


@pytest.fixture
def temp_config(tmp_path: Path, clean_env: None) -> Generator[tuple[Path, RunConfig], None, None]:
    """Create a temporary config file and point PEGS_CONFIG at it.

    Yields:
        Tuple of (config_path, RunConfig)
    """
    config_dir = tmp_path / "config"
    config_dir.mkdir()
    config_path = config_dir / "config.yaml"
    config_path.write_text("""curve: ellipse:3,1
kind: square
grid: 24
tol: 1.0e-11
samples: 10
""")

    os.environ["PEGS_CONFIG"] = str(config_path)

    config = RunConfig.load(config_path)

    yield config_path, config
