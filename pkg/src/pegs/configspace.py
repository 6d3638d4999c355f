"""Coordinates on the space of cyclically ordered points on the circle.

Parameters are angles in [0, 2*pi). Ordering and distinctness are always
judged through counterclockwise gaps, never by comparing raw angles.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from pegs.cyclohedron import Bracket, StratumLabel

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
DISTINCT_TOL = 1e-12
SUM_TOL = 1e-9
DEFAULT_STRATUM_THRESHOLD = 0.05


class ConfigurationError(Exception):
    """Raised when parameters do not form a valid cyclic configuration."""


class DegenerateInputError(ConfigurationError):
    """Raised when a blow-up chart is evaluated exactly at a collision."""


class Infinite(enum.Enum):
    """Sentinel for a ratio whose denominator vanished."""

    INFINITE = "inf"


BetaValue = Union[float, Infinite]


def arc(p: float, q: float) -> float:
    """Counterclockwise arc length from angle p to angle q, in [0, 2*pi)."""
    d = (q - p) % TWO_PI
    return 0.0 if d >= TWO_PI else d


def cyclic_gaps(params: np.ndarray) -> np.ndarray:
    """Counterclockwise gaps from each point to the next, over the last axis."""
    params = np.asarray(params, dtype=float)
    return (np.roll(params, -1, axis=-1) - params) % TWO_PI


def eta_many(params: np.ndarray) -> np.ndarray:
    """Arc-length diameter of each parameter tuple (2*pi minus the largest gap)."""
    return TWO_PI - cyclic_gaps(params).max(axis=-1)


def is_cyclically_ordered(params: np.ndarray) -> np.ndarray:
    """Whether each tuple is distinct and winds exactly once around the circle."""
    gaps = cyclic_gaps(params)
    return (gaps.min(axis=-1) > DISTINCT_TOL) & (np.abs(gaps.sum(axis=-1) - TWO_PI) < SUM_TOL)


@dataclass(frozen=True)
class ScreenPoint:
    """Barycentric relative position of a three-gap cluster."""

    a: float
    b: float
    c: float

    def __post_init__(self) -> None:
        if min(self.a, self.b, self.c) < 0 or abs(self.a + self.b + self.c - 1.0) > 1e-12:
            raise ConfigurationError(f"Not a barycentric triple: {(self.a, self.b, self.c)}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)


@dataclass(frozen=True)
class CyclicConfiguration:
    """n distinct points on the circle in counterclockwise order."""

    params: tuple[float, ...]

    def __post_init__(self) -> None:
        params = tuple(arc(0.0, float(p)) for p in self.params)
        object.__setattr__(self, "params", params)
        if len(params) < 3:
            raise ConfigurationError(f"Need at least 3 points, got {len(params)}")
        gaps = cyclic_gaps(np.asarray(params))
        if gaps.min() <= DISTINCT_TOL:
            raise ConfigurationError("Parameters are not pairwise distinct")
        if abs(gaps.sum() - TWO_PI) > SUM_TOL:
            raise ConfigurationError("Parameters are not in counterclockwise cyclic order")

    @classmethod
    def from_thetas(cls, thetas: Sequence[float], anchor: float = 0.0) -> CyclicConfiguration:
        """Rebuild a configuration from theta_2..theta_n and the first point.

        Args:
            thetas: Values theta_i for i = 2..n, each in (0, 1)
            anchor: Angle of the first point

        Returns:
            The configuration, determined up to the rotation fixed by anchor

        Raises:
            ConfigurationError: If a theta is outside (0, 1)
        """
        gaps = [1.0]
        for theta in thetas:
            if not 0.0 < theta < 1.0:
                raise ConfigurationError(f"theta must lie in (0, 1), got {theta}")
            gaps.append(gaps[-1] * (1.0 - theta) / theta)
        scale = TWO_PI / sum(gaps)
        positions = anchor + scale * np.concatenate(([0.0], np.cumsum(gaps[:-1])))
        return cls(tuple(positions))

    @property
    def n(self) -> int:
        return len(self.params)

    @property
    def gaps(self) -> tuple[float, ...]:
        """Gap i runs from point i to point i+1 (1-based, cyclic)."""
        return tuple(cyclic_gaps(np.asarray(self.params)))

    def array(self) -> np.ndarray:
        return np.asarray(self.params, dtype=float)

    def rotated(self, delta: float) -> CyclicConfiguration:
        return CyclicConfiguration(tuple(p + delta for p in self.params))

    def shifted(self, k: int = 1) -> CyclicConfiguration:
        """Relabel so that new point i is old point i+k."""
        k %= self.n
        return CyclicConfiguration(self.params[k:] + self.params[:k])

    def canonical_shift(self) -> int:
        return int(np.argmin(self.params))

    def canonical(self) -> CyclicConfiguration:
        """The relabelling whose first parameter is the smallest."""
        return self.shifted(self.canonical_shift())


def theta(q: CyclicConfiguration, i: int) -> float:
    """Ratio of the arc q_{i-1} q_i to the arc q_{i-1} q_{i+1} (1-based, cyclic)."""
    n = q.n
    prev, cur, nxt = q.params[(i - 2) % n], q.params[(i - 1) % n], q.params[i % n]
    return arc(prev, cur) / arc(prev, nxt)


def screen(q: CyclicConfiguration, indices: tuple[int, int, int, int]) -> ScreenPoint:
    """Normalised arcs between four points taken in cyclic order.

    Raises:
        ConfigurationError: If the indices are not in q's cyclic order
    """
    n = q.n
    i, j, k, l = indices
    steps = [(idx - i) % n for idx in (j, k, l)]
    if not 0 < steps[0] < steps[1] < steps[2]:
        raise ConfigurationError(f"Indices {indices} are not in cyclic order")
    p = [q.params[idx - 1] for idx in indices]
    arcs = [arc(p[0], p[1]), arc(p[1], p[2]), arc(p[2], p[3])]
    total = sum(arcs)
    return ScreenPoint(arcs[0] / total, arcs[1] / total, arcs[2] / total)


def eta(q: CyclicConfiguration) -> float:
    """Shortest arc containing every point."""
    return TWO_PI - max(q.gaps)


def xi(q: CyclicConfiguration) -> float:
    return 1.0 / eta(q)


def classify_stratum(
    q: CyclicConfiguration, ratio_threshold: float = DEFAULT_STRATUM_THRESHOLD
) -> StratumLabel:
    """Name the boundary stratum a configuration is close to.

    A run of consecutive points forms a bracket when its internal diameter is
    below ratio_threshold times the smaller of its two outer gaps. When the
    whole configuration fits in an arc shorter than ratio_threshold * 2*pi it
    also gets the full bracket, cut at the largest gap.

    Raises:
        ConfigurationError: If ratio_threshold is not in (0, 1)
    """
    if not 0.0 < ratio_threshold < 1.0:
        raise ConfigurationError(f"ratio_threshold must lie in (0, 1), got {ratio_threshold}")
    n = q.n
    gaps = q.gaps
    brackets = []
    for start in range(1, n + 1):
        before = gaps[(start - 2) % n]
        for length in range(2, n):
            inner = sum(gaps[(start - 1 + k) % n] for k in range(length - 1))
            after = gaps[(start - 2 + length) % n]
            if inner < ratio_threshold * min(before, after):
                brackets.append(Bracket(start=start, length=length))
    if eta(q) < ratio_threshold * TWO_PI:
        cut = int(np.argmax(gaps)) + 1
        brackets.append(Bracket(start=cut % n + 1, length=n, cut=cut))
    label = StratumLabel(n, tuple(brackets))
    if not label.is_interior:
        logger.debug("configuration %s classified as stratum %s", q.params, label)
    return label


def chord_direction(x: float, y: float) -> np.ndarray:
    """Unit vector of e(x) - e(y) for points e(t) = (cos t, sin t).

    At y = x the value is the limit from y = x + 0, the negated unit tangent.
    """
    d = (y - x + math.pi) % TWO_PI - math.pi
    m = x + d / 2.0
    sign = -1.0 if d >= 0.0 else 1.0
    return sign * np.array([-math.sin(m), math.cos(m)])


def fmask_alpha(p: Sequence[float], q: Sequence[float]) -> np.ndarray:
    """Direction from p to q.

    Raises:
        DegenerateInputError: If p and q coincide
    """
    diff = np.asarray(q, dtype=float) - np.asarray(p, dtype=float)
    norm = float(np.linalg.norm(diff))
    if norm == 0.0:
        raise DegenerateInputError("alpha is undefined for coincident points")
    return diff / norm


def fmask_beta(p: Sequence[float], q: Sequence[float], r: Sequence[float]) -> BetaValue:
    """Ratio |p - q| / |p - r|, or Infinite.INFINITE when p == r."""
    p_arr = np.asarray(p, dtype=float)
    denominator = float(np.linalg.norm(p_arr - np.asarray(r, dtype=float)))
    if denominator == 0.0:
        return Infinite.INFINITE
    return float(np.linalg.norm(p_arr - np.asarray(q, dtype=float))) / denominator


def collapsed(anchor: float, offsets: Sequence[float], scale: float) -> CyclicConfiguration:
    """Configuration anchor + scale * offsets (offsets increasing)."""
    return CyclicConfiguration(tuple(anchor + scale * r for r in offsets))
