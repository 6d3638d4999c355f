"""Closed C^1 curves in the plane and in space, parametrised over [0, 2*pi)."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
FD_STEP = 1e-6
INJECTIVITY_SAMPLES = 512
MIN_SEPARATION_STEPS = INJECTIVITY_SAMPLES // 64
INJECTIVITY_TOL = 1e-6
TANGENT_SAMPLES = 1024
TANGENT_TOL = 1e-9
DEFAULT_CORNER_RADIUS = 0.05
DEFAULT_HELIX_RADIUS = 0.05
NEAREST_POLISH_STEPS = 4
COLLINEAR_TURN = 1e-12

SPEC_PREFIXES = ["circle", "ellipse:", "rounded-poly:", "helix-chord", "file:"]


class CurveError(Exception):
    """Raised when a curve cannot be constructed, parsed or loaded."""


class Curve:
    """A closed curve with period 2*pi.

    Subclasses implement ``eval_many`` (and ``tangent_many`` when an analytic
    derivative is available). Both accept parameter arrays of any shape and
    return arrays with one extra trailing axis of length ``dim``.
    """

    dim: int = 2
    name: str = "curve"

    def eval_many(self, ts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def tangent_many(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        return (self.eval_many(ts + FD_STEP) - self.eval_many(ts - FD_STEP)) / (2.0 * FD_STEP)

    def eval(self, t: float) -> np.ndarray:
        return self.eval_many(np.asarray([t], dtype=float))[0]

    def tangent(self, t: float) -> np.ndarray:
        return self.tangent_many(np.asarray([t], dtype=float))[0]

    def nearest_param(self, point: Sequence[float], samples: int = 4096) -> float:
        """Parameter of the curve point closest to ``point``."""
        target = np.asarray(point, dtype=float)
        ts = np.arange(samples) * (TWO_PI / samples)
        start = ts[int(np.argmin(np.linalg.norm(self.eval_many(ts) - target, axis=-1)))]
        step = TWO_PI / samples
        result = minimize_scalar(
            lambda t: float(np.linalg.norm(self.eval(t) - target)),
            bounds=(start - step, start + step),
            method="bounded",
            options={"xatol": 1e-13},
        )
        # Newton polish along the tangent; a step that moves away is refused
        t = float(result.x)
        gap = float(np.linalg.norm(self.eval(t) - target))
        for _ in range(NEAREST_POLISH_STEPS):
            point, velocity = self.eval(t), self.tangent(t)
            speed = float(np.dot(velocity, velocity))
            if speed == 0.0:
                break
            trial = t + float(np.dot(target - point, velocity)) / speed
            trial_gap = float(np.linalg.norm(self.eval(trial) - target))
            if trial_gap > gap:
                break
            t, gap = trial, trial_gap
        return t % TWO_PI

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


class UnitCircle(Curve):
    name = "circle"

    def eval_many(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        return np.stack([np.cos(ts), np.sin(ts)], axis=-1)

    def tangent_many(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        return np.stack([-np.sin(ts), np.cos(ts)], axis=-1)


class Ellipse(Curve):
    """Axis-aligned ellipse centred at the origin."""

    def __init__(self, a: float, b: float) -> None:
        if a <= 0 or b <= 0:
            raise CurveError(f"Ellipse semi-axes must be positive, got ({a}, {b})")
        self.a = float(a)
        self.b = float(b)
        self.name = f"ellipse:{a:g},{b:g}"

    def eval_many(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        return np.stack([self.a * np.cos(ts), self.b * np.sin(ts)], axis=-1)

    def tangent_many(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        return np.stack([-self.a * np.sin(ts), self.b * np.cos(ts)], axis=-1)


class ParametricCurve(Curve):
    """Curve given by a vectorised function of the parameter.

    Without ``derivative`` the tangent is a central difference with step 1e-6.
    """

    def __init__(
        self,
        func: Callable[[np.ndarray], np.ndarray],
        dim: int = 2,
        derivative: Callable[[np.ndarray], np.ndarray] | None = None,
        name: str = "parametric",
    ) -> None:
        if dim not in (2, 3):
            raise CurveError(f"Curves live in dimension 2 or 3, got {dim}")
        self.func = func
        self.dim = dim
        self.derivative = derivative
        self.name = name

    def eval_many(self, ts: np.ndarray) -> np.ndarray:
        return np.asarray(self.func(np.asarray(ts, dtype=float)), dtype=float)

    def tangent_many(self, ts: np.ndarray) -> np.ndarray:
        if self.derivative is None:
            return super().tangent_many(ts)
        return np.asarray(self.derivative(np.asarray(ts, dtype=float)), dtype=float)


class Reversed(Curve):
    """The same curve traversed in the opposite direction."""

    def __init__(self, curve: Curve) -> None:
        self.curve = curve
        self.dim = curve.dim
        self.name = f"reversed({curve.name})"

    def eval_many(self, ts: np.ndarray) -> np.ndarray:
        return self.curve.eval_many(-np.asarray(ts, dtype=float))

    def tangent_many(self, ts: np.ndarray) -> np.ndarray:
        return -self.curve.tangent_many(-np.asarray(ts, dtype=float))


def _shoelace(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


class RoundedPolygon(Curve):
    """Polygon whose corners are replaced by tangent circular arcs.

    Each corner becomes an arc of radius ``rho`` tangent to both edges, which
    cuts the corner back by ``rho * tan(turn / 2)`` along each edge, where
    ``turn`` is the exterior angle. The curve is parametrised by arc length
    scaled to 2*pi and always runs counterclockwise.
    """

    _LINE = 0
    _ARC = 1

    def __init__(self, vertices: Sequence[Sequence[float]], rho: float = DEFAULT_CORNER_RADIUS) -> None:
        pts = np.asarray(vertices, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
            raise CurveError("A rounded polygon needs at least 3 planar vertices")
        area = _shoelace(pts)
        if area == 0.0:
            raise CurveError("Polygon vertices are collinear")
        if area < 0.0:
            pts = pts[::-1].copy()
        edges = np.roll(pts, -1, axis=0) - pts
        lengths = np.linalg.norm(edges, axis=1)
        if lengths.min() == 0.0:
            raise CurveError("Consecutive polygon vertices must differ")
        directions = edges / lengths[:, None]
        incoming = np.roll(directions, 1, axis=0)
        # turns[k] is the exterior angle at vertex k, from edge k-1 to edge k
        turns = np.arctan2(
            incoming[:, 0] * directions[:, 1] - incoming[:, 1] * directions[:, 0],
            np.sum(incoming * directions, axis=1),
        )
        half_tans = np.tan(np.abs(turns) / 2.0)
        bent = np.abs(turns) >= COLLINEAR_TURN
        adjacent = 0.5 * np.minimum(lengths, np.roll(lengths, 1))
        limit = min(0.5 * float(lengths.min()), float((adjacent[bent] / half_tans[bent]).min()))
        if rho <= 0 or rho >= limit:
            raise CurveError(f"Corner radius {rho} must lie in (0, {limit:g})")
        self.vertices = pts
        self.rho = float(rho)
        self.cuts = np.where(bent, self.rho * half_tans, 0.0)
        self.name = "rounded-poly:" + ";".join(f"{x:g},{y:g}" for x, y in pts) + f"@{rho:g}"
        self._build(directions, lengths, np.where(bent, turns, 0.0))

    def _build(self, directions: np.ndarray, lengths: np.ndarray, turns: np.ndarray) -> None:
        m = len(self.vertices)
        rho = self.rho
        cuts = self.cuts
        kinds, origins, dirs, centers, radii, angles, signs, spans = [], [], [], [], [], [], [], []

        def add(kind, origin, direction, center, radius, angle, sign, span):
            kinds.append(kind)
            origins.append(origin)
            dirs.append(direction)
            centers.append(center)
            radii.append(radius)
            angles.append(angle)
            signs.append(sign)
            spans.append(span)

        zero = np.zeros(2)
        for i in range(m):
            # Straight part of edge i, then the corner at vertex i + 1
            j = (i + 1) % m
            u_in = directions[i]
            start = self.vertices[i] + cuts[i] * u_in
            add(self._LINE, start, u_in, zero, 1.0, 0.0, 1.0, lengths[i] - cuts[i] - cuts[j])
            if turns[j] == 0.0:
                continue
            sign = 1.0 if turns[j] > 0 else -1.0
            cut_in = self.vertices[j] - cuts[j] * u_in
            center = cut_in + rho * sign * np.array([-u_in[1], u_in[0]])
            start_angle = math.atan2(cut_in[1] - center[1], cut_in[0] - center[0])
            add(self._ARC, zero, zero, center, rho, start_angle, sign, rho * abs(turns[j]))

        self._kinds = np.asarray(kinds)
        self._origins = np.asarray(origins)
        self._dirs = np.asarray(dirs)
        self._centers = np.asarray(centers)
        self._radii = np.asarray(radii)
        self._angles = np.asarray(angles)
        self._signs = np.asarray(signs)
        spans_arr = np.asarray(spans)
        self._starts = np.concatenate(([0.0], np.cumsum(spans_arr)[:-1]))
        self.length = float(spans_arr.sum())

    def _locate(self, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        s = (np.asarray(ts, dtype=float) % TWO_PI) * (self.length / TWO_PI)
        idx = np.clip(np.searchsorted(self._starts, s, side="right") - 1, 0, len(self._starts) - 1)
        return idx, s - self._starts[idx]

    def _evaluate(self, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        ts = np.asarray(ts, dtype=float)
        flat = ts.reshape(-1)
        idx, local = self._locate(flat)
        points = np.empty((flat.size, 2))
        tangents = np.empty((flat.size, 2))

        line = self._kinds[idx] == self._LINE
        li = idx[line]
        points[line] = self._origins[li] + local[line, None] * self._dirs[li]
        tangents[line] = self._dirs[li]

        arc = ~line
        ai = idx[arc]
        angle = self._angles[ai] + self._signs[ai] * local[arc] / self._radii[ai]
        radial = np.stack([np.cos(angle), np.sin(angle)], axis=-1)
        points[arc] = self._centers[ai] + self._radii[ai, None] * radial
        tangents[arc] = self._signs[ai, None] * np.stack([-radial[:, 1], radial[:, 0]], axis=-1)

        scale = self.length / TWO_PI
        return points.reshape(ts.shape + (2,)), (scale * tangents).reshape(ts.shape + (2,))

    def eval_many(self, ts: np.ndarray) -> np.ndarray:
        return self._evaluate(ts)[0]

    def tangent_many(self, ts: np.ndarray) -> np.ndarray:
        return self._evaluate(ts)[1]


class SampledCurve(Curve):
    """Closed periodic cubic spline through sample points.

    The knots are cumulative chord lengths rescaled to [0, 2*pi]; the last
    sample connects back to the first.
    """

    def __init__(self, points: Sequence[Sequence[float]], name: str = "sampled") -> None:
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] not in (2, 3):
            raise CurveError("Sample points must be an (m, 2) or (m, 3) array")
        if len(pts) > 1 and np.allclose(pts[0], pts[-1]):
            pts = pts[:-1]
        if len(pts) < 4:
            raise CurveError(f"Need at least 4 distinct sample points, got {len(pts)}")
        closed = np.vstack([pts, pts[:1]])
        chords = np.linalg.norm(np.diff(closed, axis=0), axis=1)
        if chords.min() == 0.0:
            raise CurveError("Consecutive sample points must differ")
        knots = np.concatenate(([0.0], np.cumsum(chords)))
        knots *= TWO_PI / knots[-1]
        knots[-1] = TWO_PI
        self.samples = pts
        self.dim = pts.shape[1]
        self.name = name
        self._spline = CubicSpline(knots, closed, bc_type="periodic", axis=0)

    @classmethod
    def from_csv(cls, path: Path) -> SampledCurve:
        """Load ``x,y[,z]`` rows; lines starting with ``#`` are comments.

        Raises:
            CurveError: If the file is missing or malformed
        """
        path = Path(path).expanduser()
        if not path.exists():
            raise CurveError(f"Curve file not found: {path}")
        try:
            data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        except ValueError as e:
            raise CurveError(f"Invalid curve file {path}: {e}") from e
        return cls(data, name=f"file:{path}")

    def eval_many(self, ts: np.ndarray) -> np.ndarray:
        return self._spline(np.asarray(ts, dtype=float) % TWO_PI)

    def tangent_many(self, ts: np.ndarray) -> np.ndarray:
        return self._spline(np.asarray(ts, dtype=float) % TWO_PI, 1)


class HelixChord(Curve):
    """One turn of the helix (cos s, sin s, s) closed by the vertical chord.

    With s = 2t the helix covers s in [0, 2*pi] and the chord (1, 0, 4*pi - s)
    covers s in [2*pi, 4*pi]. The two corners are smoothed by a cubic Hermite
    blend rather than a circular arc: for t within rho of a corner (s within
    2*rho) the curve is the cubic that matches the point and velocity of each
    leg at the edges of that window. The result is C^1, and points outside
    the windows, including the inscribed rhombus, are the unsmoothed legs.
    """

    dim = 3

    def __init__(self, rho: float = DEFAULT_HELIX_RADIUS) -> None:
        if not 0.0 < rho < math.pi / 8:
            raise CurveError(f"Smoothing radius {rho} must lie in (0, pi/8)")
        self.rho = float(rho)
        self.name = f"helix-chord:{rho:g}"

    @staticmethod
    def _legs(s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Unsmoothed point and d/ds, for s within one period of [0, 4*pi)."""
        s = np.mod(s, 2.0 * TWO_PI)
        helix = s <= TWO_PI
        point = np.where(
            helix[..., None],
            np.stack([np.cos(s), np.sin(s), s], axis=-1),
            np.stack([np.ones_like(s), np.zeros_like(s), 2.0 * TWO_PI - s], axis=-1),
        )
        velocity = np.where(
            helix[..., None],
            np.stack([-np.sin(s), np.cos(s), np.ones_like(s)], axis=-1),
            np.stack([np.zeros_like(s), np.zeros_like(s), -np.ones_like(s)], axis=-1),
        )
        return point, velocity

    def _evaluate(self, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        s = (2.0 * np.asarray(ts, dtype=float)) % (2.0 * TWO_PI)
        point, velocity = self._legs(s)
        delta = 2.0 * self.rho
        for corner in (0.0, TWO_PI, 2.0 * TWO_PI):
            near = np.abs(s - corner) < delta
            if not near.any():
                continue
            lo, hi = corner - delta, corner + delta
            (p0, p1), (m0, m1) = self._legs(np.array([lo, hi]))
            m0, m1 = m0 * 2.0 * delta, m1 * 2.0 * delta
            tau = ((s[near] - lo) / (2.0 * delta))[..., None]
            tau2, tau3 = tau * tau, tau * tau * tau
            point[near] = (
                (2 * tau3 - 3 * tau2 + 1) * p0
                + (tau3 - 2 * tau2 + tau) * m0
                + (-2 * tau3 + 3 * tau2) * p1
                + (tau3 - tau2) * m1
            )
            velocity[near] = (
                (6 * tau2 - 6 * tau) * p0
                + (3 * tau2 - 4 * tau + 1) * m0
                + (-6 * tau2 + 6 * tau) * p1
                + (3 * tau2 - 2 * tau) * m1
            ) / (2.0 * delta)
        return point, 2.0 * velocity

    def eval_many(self, ts: np.ndarray) -> np.ndarray:
        return self._evaluate(ts)[0]

    def tangent_many(self, ts: np.ndarray) -> np.ndarray:
        return self._evaluate(ts)[1]


@dataclass
class EmbeddingReport:
    """Sampled diagnostics of a curve."""

    curve: str
    injective: bool
    margin: float
    min_tangent_norm: float
    winding: int | None = None
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    def to_dict(self) -> dict[str, Any]:
        return {
            "curve": self.curve,
            "ok": self.ok,
            "injective": self.injective,
            "margin": self.margin,
            "min_tangent_norm": self.min_tangent_norm,
            "winding": self.winding,
            "problems": list(self.problems),
        }


def tangent_winding(curve: Curve, samples: int = TANGENT_SAMPLES) -> int:
    """Turning number of a planar curve from wrapped tangent-angle increments."""
    ts = np.arange(samples) * (TWO_PI / samples)
    tangents = curve.tangent_many(ts)
    angles = np.arctan2(tangents[:, 1], tangents[:, 0])
    steps = np.diff(np.append(angles, angles[0]))
    steps = (steps + math.pi) % TWO_PI - math.pi
    return int(round(steps.sum() / TWO_PI))


def check_embedding(curve: Curve) -> EmbeddingReport:
    """Sample a curve for injectivity, tangent norm and (in the plane) orientation.

    Never raises on a bad curve; the problems are listed in the report.
    """
    n = INJECTIVITY_SAMPLES
    points = curve.eval_many(np.arange(n) * (TWO_PI / n))
    distances = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=-1)
    steps = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    separated = np.minimum(steps, n - steps) >= MIN_SEPARATION_STEPS
    margin = float(distances[separated].min())

    tangents = curve.tangent_many(np.arange(TANGENT_SAMPLES) * (TWO_PI / TANGENT_SAMPLES))
    min_norm = float(np.linalg.norm(tangents, axis=-1).min())

    report = EmbeddingReport(
        curve=curve.name,
        injective=margin > INJECTIVITY_TOL,
        margin=margin,
        min_tangent_norm=min_norm,
    )
    if not report.injective:
        report.problems.append(f"self-intersection: sampled points {margin:.3g} apart")
    if min_norm <= TANGENT_TOL:
        report.problems.append("vanishing tangent")
    if curve.dim == 2:
        report.winding = tangent_winding(curve)
        if report.winding == -1:
            report.problems.append("clockwise orientation (tangent winding -1)")
        elif report.winding != 1:
            report.problems.append(f"tangent winding {report.winding}")
    return report


def ensure_counterclockwise(curve: Curve) -> Curve:
    """Reverse a clockwise planar curve; other curves are returned unchanged.

    Reversing a reversed curve hands back the original.
    """
    if curve.dim == 2 and tangent_winding(curve) == -1:
        logger.info("reversing clockwise curve %s", curve.name)
        if isinstance(curve, Reversed):
            return curve.curve
        return Reversed(curve)
    return curve


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError as e:
        raise CurveError(f"Invalid {what}: {text!r}") from e


def curve_from_spec(spec: str) -> Curve:
    """Build a curve from its command-line description.

    Accepted forms: ``circle``, ``ellipse:a,b``,
    ``rounded-poly:x1,y1;x2,y2;...[@rho]``, ``helix-chord[:rho]`` and
    ``file:path.csv``.

    Raises:
        CurveError: If the description cannot be parsed
    """
    kind, _, rest = spec.strip().partition(":")
    if kind == "circle" and not rest:
        return UnitCircle()
    if kind == "ellipse":
        values = _floats(rest, "ellipse axes")
        if len(values) != 2:
            raise CurveError(f"Expected ellipse:a,b, got {spec!r}")
        return Ellipse(*values)
    if kind == "rounded-poly":
        body, _, rho_text = rest.partition("@")
        rho = _floats(rho_text, "corner radius")[0] if rho_text else DEFAULT_CORNER_RADIUS
        vertices = [_floats(chunk, "vertex") for chunk in body.split(";") if chunk]
        if any(len(v) != 2 for v in vertices):
            raise CurveError(f"Vertices must be x,y pairs: {spec!r}")
        return RoundedPolygon(vertices, rho)
    if kind == "helix-chord":
        return HelixChord(_floats(rest, "smoothing radius")[0] if rest else DEFAULT_HELIX_RADIUS)
    if kind == "file" and rest:
        return SampledCurve.from_csv(Path(rest))
    raise CurveError(f"Unknown curve spec {spec!r}; expected one of {', '.join(SPEC_PREFIXES)}")
