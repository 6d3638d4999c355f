"""Test maps whose zeros are inscribed squares, affine-regular hexagons and rhombi.

Every raw test map works on point arrays of shape ``(..., n, d)`` and returns
values of shape ``(..., n)``. The rescaled test multiplies by 1/eta, the
inverse arc-length diameter of the parameters, which extends continuously to
collapsing configurations.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from pegs.configspace import CyclicConfiguration, eta_many
from pegs.curves import Curve

logger = logging.getLogger(__name__)

MIN_FD_STEP = 1e-8
MAX_FD_STEP = 1e-4
DEFAULT_FD_STEP = 1e-6


class TestMapError(Exception):
    """Raised when a test map is applied to mismatched inputs."""

    __test__ = False


class TestMapKind(enum.Enum):
    """The three peg shapes: (ambient dimension, number of points, blocks)."""

    __test__ = False

    SQUARE = "square"
    HEXAGON = "hexagon"
    RHOMBUS = "rhombus"

    @property
    def dim(self) -> int:
        return 3 if self is TestMapKind.RHOMBUS else 2

    @property
    def n(self) -> int:
        return 6 if self is TestMapKind.HEXAGON else 4

    @property
    def blocks(self) -> dict[str, slice]:
        return _BLOCKS[self]


_BLOCKS = {
    TestMapKind.SQUARE: {"phi1": slice(0, 2), "phi2": slice(2, 3), "phi3": slice(3, 4)},
    TestMapKind.HEXAGON: {"alpha": slice(0, 2), "beta": slice(2, 4), "delta": slice(4, 6)},
    TestMapKind.RHOMBUS: {"psi1": slice(0, 3), "psi2": slice(3, 4)},
}


def _norm(v: np.ndarray) -> np.ndarray:
    return np.linalg.norm(v, axis=-1, keepdims=True)


def square_values(y: np.ndarray) -> np.ndarray:
    y1, y2, y3, y4 = (y[..., i, :] for i in range(4))
    phi1 = 0.5 * (y1 + y3) - 0.5 * (y2 + y4)
    phi2 = _norm(y1 - y3) - _norm(y2 - y4)
    phi3 = _norm(y1 - y2) - _norm(y2 - y3) + _norm(y3 - y4) - _norm(y4 - y1)
    return np.concatenate([phi1, phi2, phi3], axis=-1)


def hexagon_values(x: np.ndarray) -> np.ndarray:
    x1, x2, x3, x4, x5, x6 = (x[..., i, :] for i in range(6))
    alpha = x1 + x4 - x2 - x5
    beta = x2 + x5 - x3 - x6
    delta = x1 - x2 + x3 - x4 + x5 - x6
    return np.concatenate([alpha, beta, delta], axis=-1)


def hexagon_gamma(x: np.ndarray) -> np.ndarray:
    """The third midpoint condition, computed directly from the points."""
    return x[..., 2, :] + x[..., 5, :] - x[..., 0, :] - x[..., 3, :]


def rhombus_values(x: np.ndarray) -> np.ndarray:
    x1, x2, x3, x4 = (x[..., i, :] for i in range(4))
    psi1 = x1 - x2 + x3 - x4
    psi2 = _norm(x1 - x2) - _norm(x2 - x3) + _norm(x3 - x4) - _norm(x4 - x1)
    return np.concatenate([psi1, psi2], axis=-1)


_RAW = {
    TestMapKind.SQUARE: square_values,
    TestMapKind.HEXAGON: hexagon_values,
    TestMapKind.RHOMBUS: rhombus_values,
}


def raw_values(kind: TestMapKind, points: np.ndarray) -> np.ndarray:
    """Unscaled test map over point arrays of shape (..., n, d).

    Raises:
        TestMapError: If the trailing shape is not (n, d) for the kind
    """
    points = np.asarray(points, dtype=float)
    if points.shape[-2:] != (kind.n, kind.dim):
        raise TestMapError(
            f"{kind.value} test needs {kind.n} points in R^{kind.dim}, got shape {points.shape[-2:]}"
        )
    return _RAW[kind](points)


def invariant_norms(kind: TestMapKind, values: np.ndarray) -> np.ndarray:
    """Norms unchanged by cyclic relabelling of the points.

    For the hexagon the implicit third block gamma = -alpha - beta is added,
    since relabelling permutes alpha, beta and gamma.
    """
    values = np.asarray(values, dtype=float)
    total = np.sum(values * values, axis=-1)
    if kind is TestMapKind.HEXAGON:
        gamma = -values[..., 0:2] - values[..., 2:4]
        total = total + np.sum(gamma * gamma, axis=-1)
    return np.sqrt(total)


@dataclass(frozen=True, eq=False)
class TestValue:
    """Value of a test map with its named blocks."""

    __test__ = False

    kind: TestMapKind
    components: np.ndarray

    def block(self, name: str) -> np.ndarray:
        return self.components[self.kind.blocks[name]]

    def gamma(self) -> np.ndarray:
        """Implicit hexagon block gamma = -alpha - beta.

        Raises:
            TestMapError: For kinds other than the hexagon
        """
        if self.kind is not TestMapKind.HEXAGON:
            raise TestMapError("gamma is only defined for the hexagon test")
        return -self.block("alpha") - self.block("beta")

    def norm(self) -> float:
        return float(np.linalg.norm(self.components))

    def invariant_norm(self) -> float:
        return float(invariant_norms(self.kind, self.components))

    def shifted(self) -> TestValue:
        """Value after relabelling point i as point i-1.

        Square and rhombus values change sign; the hexagon maps
        (alpha, beta, delta) to (beta, gamma, -delta).
        """
        if self.kind is TestMapKind.HEXAGON:
            shifted = np.concatenate([self.block("beta"), self.gamma(), -self.block("delta")])
            return TestValue(self.kind, shifted)
        return TestValue(self.kind, -self.components)

    def to_list(self) -> list[float]:
        return [float(v) for v in self.components]


def square_test(points: Sequence[Sequence[float]]) -> TestValue:
    return TestValue(TestMapKind.SQUARE, raw_values(TestMapKind.SQUARE, points))


def hexagon_test(points: Sequence[Sequence[float]]) -> TestValue:
    return TestValue(TestMapKind.HEXAGON, raw_values(TestMapKind.HEXAGON, points))


def rhombus_test(points: Sequence[Sequence[float]]) -> TestValue:
    return TestValue(TestMapKind.RHOMBUS, raw_values(TestMapKind.RHOMBUS, points))


def _check_curve(curve: Curve, kind: TestMapKind) -> None:
    if curve.dim != kind.dim:
        raise TestMapError(f"{kind.value} test needs a curve in R^{kind.dim}, got R^{curve.dim}")


def rescale(kind: TestMapKind, points: np.ndarray, params: np.ndarray) -> np.ndarray:
    """Raw test values divided by the arc-length diameter of the parameters."""
    return raw_values(kind, points) / np.expand_dims(np.asarray(eta_many(params)), -1)


def rescaled_values(curve: Curve, params: np.ndarray, kind: TestMapKind) -> np.ndarray:
    """Rescaled test map for parameter arrays of shape (..., n)."""
    _check_curve(curve, kind)
    params = np.asarray(params, dtype=float)
    return rescale(kind, curve.eval_many(params), params)


def rescaled_test(curve: Curve, q: CyclicConfiguration, kind: TestMapKind) -> TestValue:
    """The test map of the points curve(q_i), multiplied by 1/eta(q).

    Raises:
        TestMapError: If the curve dimension or number of points does not match kind
    """
    _check_curve(curve, kind)
    if q.n != kind.n:
        raise TestMapError(f"{kind.value} test needs {kind.n} points, got {q.n}")
    return TestValue(kind, rescaled_values(curve, q.array(), kind))


def collapse_limit(
    kind: TestMapKind,
    tangent: Sequence[float],
    offsets: Sequence[float],
    cut: int | None = None,
) -> TestValue:
    """Limit of the rescaled test as all points collapse along the tangent line.

    The points are read as the linear word starting just after ``cut``: the
    k-th offset belongs to point ``(cut + k) mod n`` (1-based, cut defaults
    to n). Each such point sits at ``offset * tangent`` and the value is
    divided by the spread of the offsets.

    Raises:
        TestMapError: If offsets are not strictly increasing, have the wrong
            count, or the tangent vanishes
    """
    r = np.asarray(offsets, dtype=float)
    t = np.asarray(tangent, dtype=float)
    n = kind.n
    if r.shape != (n,):
        raise TestMapError(f"{kind.value} collapse needs {n} offsets, got {r.shape}")
    if np.any(np.diff(r) <= 0):
        raise TestMapError("Collapse offsets must be strictly increasing")
    if t.shape != (kind.dim,) or not np.any(t):
        raise TestMapError(f"Collapse tangent must be a nonzero vector in R^{kind.dim}")
    cut = n if cut is None else cut
    if not 1 <= cut <= n:
        raise TestMapError(f"Cut {cut} outside 1..{n}")
    points = np.empty((n, kind.dim))
    for k in range(n):
        points[(cut + k) % n] = r[k] * t
    return TestValue(kind, raw_values(kind, points) / (r[-1] - r[0]))


def jacobian(
    curve: Curve,
    q: CyclicConfiguration | Sequence[float],
    kind: TestMapKind,
    h: float = DEFAULT_FD_STEP,
) -> np.ndarray:
    """Central-difference Jacobian of the rescaled test in the n circle parameters.

    Column j is the derivative with respect to the parameter of point j.

    Raises:
        TestMapError: If h is outside [1e-8, 1e-4]
    """
    if not MIN_FD_STEP <= h <= MAX_FD_STEP:
        raise TestMapError(f"Finite-difference step {h} outside [{MIN_FD_STEP}, {MAX_FD_STEP}]")
    params = q.array() if isinstance(q, CyclicConfiguration) else np.asarray(q, dtype=float)
    n = params.shape[-1]
    if n != kind.n:
        raise TestMapError(f"{kind.value} test needs {kind.n} points, got {n}")
    step = h * np.eye(n)
    batch = np.concatenate([params + step, params - step])
    values = rescaled_values(curve, batch, kind)
    return ((values[:n] - values[n:]) / (2.0 * h)).T


class HexagonShape(enum.Enum):
    """What a zero of the hexagon test looks like."""

    AFFINE_REGULAR = "affine-regular"
    ONE_POINT = "one-point"
    THREE_POINT = "three-point"
    COLLINEAR = "collinear"


def hexagon_degeneracy(points: Sequence[Sequence[float]], tol: float = 1e-8) -> HexagonShape:
    """Classify the vertex set of a hexagon zero.

    Coincident opposite-pair solutions (x1=x2, x4=x5, x3=x6 and rotations)
    are three-point; a vanishing smallest singular value of the centred
    point matrix is collinear.
    """
    x = np.asarray(points, dtype=float)
    scale = max(float(np.abs(x - x.mean(axis=0)).max()), 1e-300)
    distinct = []
    for p in x:
        if all(np.linalg.norm(p - d) > tol * scale for d in distinct):
            distinct.append(p)
    if len(distinct) == 1:
        return HexagonShape.ONE_POINT
    if len(distinct) == 3:
        return HexagonShape.THREE_POINT
    singular = np.linalg.svd(x - x.mean(axis=0), compute_uv=False)
    if singular[-1] < tol * singular[0]:
        return HexagonShape.COLLINEAR
    return HexagonShape.AFFINE_REGULAR
