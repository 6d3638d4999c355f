"""Reference transversality computations and boundary non-vanishing checks.

Each case is self-contained: it builds its own curve and configuration,
never calls the solver, and reports named pass/fail checks together with
the measured values.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
import sympy as sp
from scipy.optimize import brentq

from pegs.configspace import TWO_PI
from pegs.cyclohedron import StratumLabel, enumerate_faces
from pegs.curves import Curve, Ellipse, HelixChord, RoundedPolygon, UnitCircle
from pegs.testmaps import (
    TestMapKind,
    collapse_limit,
    hexagon_test,
    invariant_norms,
    jacobian,
    rescaled_values,
    rhombus_test,
    square_values,
)

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20080604
DEFAULT_SAMPLES = 100
BOUNDARY_SCALES = (1e-2, 1e-3, 1e-4)
FINE_SCALES = (1e-4, 1e-5, 1e-6)
BOUNDARY_FLOOR = 1e-3
DET_RTOL = 1e-6
RICHARDSON_RTOL = 1e-3

TRIANGLE = ((0.0, 0.0), (6.0, 0.0), (3.0, 3.0 * math.sqrt(3.0)))
TRIANGLE_RHO = 0.02

# Columns of the ellipse frame as sign multipliers of (u1, u2, s, t).
ELLIPSE_SIGNS = np.array(
    [
        [1, 1, 1, 1],
        [1, -1, -1, 1],
        [-1, -1, 1, 1],
        [-1, 1, -1, 1],
    ],
    dtype=float,
).T

HELIX_VERTICES = (
    (0.0, 1.0, math.pi / 2),
    (-1.0, 0.0, math.pi),
    (0.0, -1.0, 3 * math.pi / 2),
    (1.0, 0.0, math.pi),
)
HELIX_PARAMS = (math.pi / 4, math.pi / 2, 3 * math.pi / 4, 3 * math.pi / 2)


class VerifyError(Exception):
    """Raised when a reference case is asked for an input it cannot certify."""


class ReferenceCase(enum.Enum):
    ELLIPSE_SQUARE = "ellipse-square"
    TRIANGLE_HEXAGON = "triangle-hexagon"
    HELIX_RHOMBUS = "helix-rhombus"
    BOUNDARY = "boundary"


@dataclass
class CaseReport:
    """Outcome of one reference case."""

    case: str
    checks: dict[str, bool] = field(default_factory=dict)
    values: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def check(self, name: str, ok: bool) -> None:
        self.checks[name] = bool(ok)
        if not ok:
            logger.warning("%s: check %s failed", self.case, name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "case": self.case,
            "passed": self.passed,
            "checks": dict(self.checks),
            "values": self.values,
        }


def _relative(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def ellipse_square_params(a: float, b: float) -> tuple[float, float, float, float]:
    """Parameters of the inscribed square of the ellipse (a cos t, b sin t).

    The square is symmetric under both axis reflections, so its first vertex
    is where the ellipse meets the diagonal y = x.
    """
    t_star = brentq(lambda t: a * math.cos(t) - b * math.sin(t), 0.0, math.pi / 2, xtol=1e-15)
    return (t_star, math.pi - t_star, math.pi + t_star, TWO_PI - t_star)


def verify_ellipse_square(a: float = 2.0, b: float = 1.0, h: float = 1e-6) -> CaseReport:
    """Check the determinant identity of the symmetric frame at the ellipse square.

    The frame v1..v4 is the tangent at the first vertex and its images under
    the two axis reflections. Column i of the frame matrix is the derivative
    of the square test as vertex i moves along v_i, computed by central
    differences; (u1, u2, s, t) are read from the first column.

    Raises:
        VerifyError: If a == b (rotation-degenerate) or an axis is not positive
    """
    if a <= 0 or b <= 0:
        raise VerifyError(f"Ellipse axes must be positive, got ({a}, {b})")
    if a == b:
        raise VerifyError("rotation-degenerate: a circle carries a rotation family of squares")

    report = CaseReport(ReferenceCase.ELLIPSE_SQUARE.value)
    curve = Ellipse(a, b)
    params = ellipse_square_params(a, b)
    points = curve.eval_many(np.asarray(params))
    t_star = params[0]
    big_a, big_b = a * math.sin(t_star), b * math.cos(t_star)
    frame = np.array([[-big_a, big_b], [big_a, big_b], [big_a, -big_b], [-big_a, -big_b]])

    columns = np.empty((4, 4))
    for i in range(4):
        shift = np.zeros_like(points)
        shift[i] = h * frame[i]
        columns[:, i] = (square_values(points + shift) - square_values(points - shift)) / (2.0 * h)

    u1, u2, s, t = columns[:, 0]
    expected = (-big_a / 2, big_b / 2, (big_b - big_a) / math.sqrt(2.0), -(big_a + big_b))
    det = float(np.linalg.det(columns))
    formula = -16.0 * s * t * u1 * u2

    report.check("square-is-zero", float(np.linalg.norm(square_values(points))) < 1e-12)
    report.check("first-column", np.allclose(columns[:, 0], expected, rtol=1e-8, atol=1e-12))
    pattern = ELLIPSE_SIGNS * columns[:, :1]
    report.check(
        "sign-pattern",
        np.array_equal(np.sign(columns), np.sign(pattern)) and np.allclose(columns, pattern, rtol=1e-8, atol=1e-12),
    )
    report.check("det-formula", _relative(det, formula) < DET_RTOL)
    report.check("det-nonzero", det != 0.0)

    curve_jac = jacobian(curve, params, TestMapKind.SQUARE)
    curve_det = float(np.linalg.det(curve_jac))
    report.check("curve-det-sign", np.sign(curve_det) == np.sign(det))

    report.values.update(
        {
            "a": a,
            "b": b,
            "params": list(params),
            "u1": float(u1),
            "u2": float(u2),
            "s": float(s),
            "t": float(t),
            "det": det,
            "det_formula": formula,
            "curve_det": curve_det,
        }
    )
    return report


def triangle_matrix() -> sp.Matrix:
    """Exact 6x6 hexagon Jacobian with sides BC=(1,0), CA=(-1,1), AB=(0,-1).

    Rows are the alpha, beta and delta blocks; column j is the derivative
    as point j moves along its side.
    """
    bc, ca, ab = sp.Matrix([1, 0]), sp.Matrix([-1, 1]), sp.Matrix([0, -1])
    zero = sp.zeros(2, 1)
    blocks = [
        [bc, -bc, zero, ca, -ab, zero],
        [zero, bc, -ca, zero, ab, -ab],
        [bc, -bc, ca, -ca, ab, -ab],
    ]
    return sp.Matrix.vstack(*(sp.Matrix.hstack(*row) for row in blocks))


def trisection_fractions() -> tuple[sp.Rational, sp.Rational]:
    """Fractions along each side placing an affine-regular hexagon in a triangle.

    With points at fractions lam and mu along each side, opposite vertices
    share the centroid as midpoint; matching barycentric weights gives a
    linear system.
    """
    lam, mu = sp.symbols("lam mu")
    third = sp.Rational(2, 3)
    (solution,) = sp.linsolve([1 - lam - third, lam + 1 - mu - third], [lam, mu])
    return solution[0], solution[1]


def trisection_hexagon() -> np.ndarray:
    lam, mu = (float(v) for v in trisection_fractions())
    vertices = np.asarray(TRIANGLE)
    points = []
    for k in range(3):
        start, end = vertices[k], vertices[(k + 1) % 3]
        points.append(start + lam * (end - start))
        points.append(start + mu * (end - start))
    return np.asarray(points)


def verify_triangle_hexagon(h: float = 1e-6) -> CaseReport:
    """Exact determinant of the triangle hexagon frame plus its numeric counterpart."""
    report = CaseReport(ReferenceCase.TRIANGLE_HEXAGON.value)
    matrix = triangle_matrix()
    det = matrix.det()
    swapped = matrix.copy()
    swapped.col_swap(0, 1)
    report.check("exact-det", det == 3)
    report.check("swapped-det", swapped.det() == -3)

    lam, mu = trisection_fractions()
    report.check("trisection", (lam, mu) == (sp.Rational(1, 3), sp.Rational(2, 3)))
    hexagon = trisection_hexagon()
    report.check("hexagon-is-zero", hexagon_test(hexagon).norm() < 1e-12)

    curve = RoundedPolygon(TRIANGLE, TRIANGLE_RHO)
    params = np.array([curve.nearest_param(p) for p in hexagon])
    on_curve = float(np.linalg.norm(curve.eval_many(params) - hexagon, axis=-1).max())
    report.check("hexagon-on-curve", on_curve < 1e-9)
    numeric = float(np.linalg.det(jacobian(curve, params, TestMapKind.HEXAGON, h)))
    halved = float(np.linalg.det(jacobian(curve, params, TestMapKind.HEXAGON, h / 2)))
    report.check("numeric-nondegenerate", abs(numeric) > 1e-4)
    report.check("richardson", _relative(halved, numeric) < RICHARDSON_RTOL)
    report.check("curve-det-sign", np.sign(numeric) == np.sign(int(det)))

    report.values.update(
        {
            "det": int(det),
            "swapped_det": int(swapped.det()),
            "fractions": [str(lam), str(mu)],
            "params": [float(p) for p in params],
            "numeric_det": numeric,
            "numeric_det_half_step": halved,
        }
    )
    return report


def helix_matrix() -> sp.Matrix:
    return sp.Matrix(
        [
            [-1, 0, 1, 0],
            [0, 1, 0, 0],
            [1, -1, 1, 1],
            [-2, 2 + sp.pi, -2, sp.pi],
        ]
    )


def _helix_exact() -> tuple[list[sp.Matrix], list[sp.Matrix]]:
    pi = sp.pi
    vertices = [
        sp.Matrix([0, 1, pi / 2]),
        sp.Matrix([-1, 0, pi]),
        sp.Matrix([0, -1, 3 * pi / 2]),
        sp.Matrix([1, 0, pi]),
    ]
    tangents = [sp.Matrix([-1, 0, 1]), sp.Matrix([0, -1, 1]), sp.Matrix([1, 0, 1]), sp.Matrix([0, 0, -1])]
    return vertices, tangents


def derived_helix_matrix() -> sp.Matrix:
    """The helix Jacobian rebuilt from the vertices and tangents.

    Column i stacks d(psi1) = s_i * x_i' over
    lambda * d(psi2) = s_i * <x_(i-1) - x_(i+1), x_i'>, with s = (+, -, +, -).
    """
    vertices, tangents = _helix_exact()
    columns = []
    for i in range(4):
        sign = 1 if i % 2 == 0 else -1
        prev, nxt = vertices[(i - 1) % 4], vertices[(i + 1) % 4]
        psi2 = sign * (prev - nxt).dot(tangents[i])
        columns.append((sign * tangents[i]).col_join(sp.Matrix([psi2])))
    return sp.Matrix.hstack(*columns)


def parallelogram_psi2(t: float) -> float:
    """Psi2 of the chord pair with common midpoint (0, 0, t + pi/2)."""
    return 2.0 * (
        math.sqrt(2.0 + 2.0 * math.cos(t) + (math.pi - t) ** 2) - math.sqrt(2.0 - 2.0 * math.cos(t) + t**2)
    )


def parallelogram(t: float) -> np.ndarray:
    return np.array(
        [
            [math.cos(t), math.sin(t), t],
            [-1.0, 0.0, math.pi],
            [math.cos(t + math.pi), math.sin(t + math.pi), t + math.pi],
            [1.0, 0.0, 2.0 * t],
        ]
    )


def verify_helix_rhombus(h: float = 1e-6) -> CaseReport:
    """Rhombus on the helix closed by a vertical chord."""
    report = CaseReport(ReferenceCase.HELIX_RHOMBUS.value)
    vertices = np.asarray(HELIX_VERTICES)
    report.check("vertices-are-zero", rhombus_test(vertices).norm() < 1e-12)

    ts = [0.1 * k * math.pi for k in range(11)]
    family = [rhombus_test(parallelogram(t)) for t in ts]
    report.check("family-psi1", max(float(np.linalg.norm(v.block("psi1"))) for v in family) < 1e-12)
    report.check(
        "family-psi2-formula",
        max(abs(float(v.block("psi2")[0]) - parallelogram_psi2(t)) for v, t in zip(family, ts)) < 1e-12,
    )
    signs = [np.sign(parallelogram_psi2(t)) for t in ts if abs(parallelogram_psi2(t)) > 1e-12]
    changes = sum(1 for p, q in zip(signs, signs[1:]) if p != q)
    root = brentq(parallelogram_psi2, 0.0, math.pi, xtol=1e-14)
    report.check("single-sign-change", changes == 1)
    report.check("rhombus-at-half-pi", abs(root - math.pi / 2) < 1e-9)

    matrix = helix_matrix()
    det = sp.expand(matrix.det())
    constant, pi_coeff = det.subs(sp.pi, 0), det.coeff(sp.pi)
    report.check("exact-det", constant == -4 and pi_coeff == -2)
    report.check("det-value", abs(float(det) + (2 * math.pi + 4)) < 1e-12)
    report.check("derived-matrix", sp.simplify(derived_helix_matrix() - matrix) == sp.zeros(4, 4))

    side = math.sqrt(2.0 + math.pi**2 / 4)
    numeric = np.empty((4, 4))
    tangents = np.array([[-1.0, 0.0, 1.0], [0.0, -1.0, 1.0], [1.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
    for i in range(4):
        shift = np.zeros_like(vertices)
        shift[i] = h * tangents[i]
        diff = (rhombus_test(vertices + shift).components - rhombus_test(vertices - shift).components) / (2.0 * h)
        numeric[:3, i] = diff[:3]
        numeric[3, i] = side * diff[3]
    exact = np.array(matrix.evalf(), dtype=float)
    report.check("finite-difference-rows", float(np.abs(numeric - exact).max()) < 1e-5)

    curve = HelixChord()
    on_curve = float(np.linalg.norm(curve.eval_many(np.asarray(HELIX_PARAMS)) - vertices, axis=-1).max())
    report.check("vertices-on-curve", on_curve < 1e-12)
    curve_det = float(np.linalg.det(jacobian(curve, HELIX_PARAMS, TestMapKind.RHOMBUS)))
    report.check("curve-det-sign", curve_det < 0)

    report.values.update(
        {
            "det": str(det),
            "det_float": float(det),
            "det_constant": int(constant),
            "det_pi_coefficient": int(pi_coeff),
            "rhombus_t": root,
            "sign_changes": changes,
            "side": side,
            "curve_det": curve_det,
        }
    )
    return report


def stratum_gap_depths(label: StratumLabel) -> list[int]:
    """How many brackets of the label contain each gap (gap i joins i and i+1)."""
    n = label.n
    depths = [0] * n
    for bracket in label.brackets:
        for gap in range(n):
            if bracket.is_full:
                inside = gap + 1 != bracket.cut
            else:
                inside = (gap + 1 - bracket.start) % n < bracket.length - 1
            depths[gap] += inside
    return depths


def collapsed_params(
    label: StratumLabel,
    weights: np.ndarray,
    anchors: np.ndarray,
    scale: float,
) -> np.ndarray:
    """Configurations approaching a stratum at the given scale.

    Gap i is ``scale ** depth_i * weights[:, i]``. With a full bracket the
    cut gap takes up the rest of the circle; otherwise the gaps are
    normalised to sum to 2*pi.
    """
    depths = np.asarray(stratum_gap_depths(label))
    gaps = weights * scale ** depths
    full = label.full_bracket
    if full is not None:
        cut = full.cut - 1
        gaps[:, cut] = 0.0
        gaps[:, cut] = TWO_PI - gaps.sum(axis=-1)
    else:
        gaps = gaps * (TWO_PI / gaps.sum(axis=-1, keepdims=True))
    starts = np.concatenate([np.zeros((len(gaps), 1)), np.cumsum(gaps[:, :-1], axis=-1)], axis=-1)
    return (anchors[:, None] + starts) % TWO_PI


def extrapolate_to_zero(scales: Sequence[float], values: Sequence[np.ndarray]) -> np.ndarray:
    """Evaluate at 0 the quadratic through (scale, value) samples."""
    total = np.zeros_like(values[0])
    for k, (ek, vk) in enumerate(zip(scales, values)):
        weight = 1.0
        for j, ej in enumerate(scales):
            if j != k:
                weight *= -ej / (ek - ej)
        total = total + weight * vk
    return total


def boundary_limits(
    curve: Curve,
    kind: TestMapKind,
    label: StratumLabel,
    rng: np.random.Generator,
    samples: int,
    scales: Sequence[float] = BOUNDARY_SCALES,
) -> np.ndarray:
    """Extrapolated rescaled test values at random points of a stratum."""
    weights = rng.uniform(0.5, 1.5, size=(samples, kind.n))
    anchors = rng.uniform(0.0, TWO_PI, size=samples)
    values = [rescaled_values(curve, collapsed_params(label, weights, anchors, e), kind) for e in scales]
    return extrapolate_to_zero(scales, values)


def verify_boundary_nonvanishing(
    curve: Curve,
    kind: TestMapKind,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    scales: Sequence[float] = BOUNDARY_SCALES,
) -> CaseReport:
    """Sample every codimension-1 and -2 stratum and bound the limit away from zero.

    For the rhombus, the strata (23)(41) and (12)(34) are also checked for
    a vanishing psi1 block with psi2 staying away from zero.
    """
    report = CaseReport(f"boundary:{kind.value}:{curve.name}")
    rng = np.random.default_rng(seed)
    lattice = enumerate_faces(kind.n)
    minima: dict[str, float] = {}
    for label in lattice.faces:
        if label.codim not in (1, 2):
            continue
        limits = boundary_limits(curve, kind, label, rng, samples, scales)
        minima[str(label)] = float(invariant_norms(kind, limits).min())
    worst = min(minima, key=minima.get)
    report.check("nonvanishing", minima[worst] > BOUNDARY_FLOOR)
    report.values.update({"strata": len(minima), "min_norm": minima[worst], "worst_stratum": worst})

    if kind is TestMapKind.RHOMBUS:
        for text in ("(23)(41)", "(12)(34)"):
            label = StratumLabel.parse(text, 4)
            limits = boundary_limits(curve, kind, label, rng, samples, FINE_SCALES)
            psi1 = float(np.linalg.norm(limits[:, :3], axis=-1).max())
            psi2 = float(np.abs(limits[:, 3]).min())
            report.check(f"psi1-vanishes-{text}", psi1 < 1e-6)
            report.check(f"psi2-nonzero-{text}", psi2 > BOUNDARY_FLOOR)
            report.values[f"stratum {text}"] = {"max_psi1": psi1, "min_psi2": psi2}
    logger.info("%s: %d strata, min extrapolated norm %.3g", report.case, len(minima), minima[worst])
    return report


def hexagon_collapse_escape(samples: int = 1000, seed: int = DEFAULT_SEED) -> CaseReport:
    """Totally collapsed hexagons never satisfy the hexagon system."""
    report = CaseReport("boundary:hexagon-collapse")
    rng = np.random.default_rng(seed)
    tangent = np.array([1.0, 0.0])
    norms = [
        collapse_limit(TestMapKind.HEXAGON, tangent, np.sort(rng.uniform(0.0, 1.0, size=6))).invariant_norm()
        for _ in range(samples)
    ]
    report.check("nonvanishing", min(norms) > BOUNDARY_FLOOR)
    report.values["min_norm"] = min(norms)
    return report


def check_collapse_consistency(
    curve: Curve,
    kind: TestMapKind,
    anchor: float,
    offsets: Sequence[float],
    scales: Sequence[float] = (1e-3,),
) -> list[float]:
    """Distance between the rescaled test at anchor + eps * offsets and its collapse limit.

    Returns one error per scale; for a smooth curve each is O(eps).
    """
    r = np.asarray(offsets, dtype=float)
    limit = collapse_limit(kind, curve.tangent(anchor), r).components
    errors = []
    for eps in scales:
        values = rescaled_values(curve, anchor + eps * r, kind)
        errors.append(float(np.linalg.norm(values - limit)))
    return errors


def boundary_battery() -> list[tuple[Curve, TestMapKind]]:
    return [
        (Ellipse(2.0, 1.0), TestMapKind.SQUARE),
        (RoundedPolygon(TRIANGLE, TRIANGLE_RHO), TestMapKind.HEXAGON),
        (HelixChord(), TestMapKind.RHOMBUS),
    ]


def verify_boundary(samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED) -> CaseReport:
    """The whole boundary suite as a single report."""
    report = CaseReport(ReferenceCase.BOUNDARY.value)
    parts = [verify_boundary_nonvanishing(curve, kind, samples, seed) for curve, kind in boundary_battery()]
    parts.append(hexagon_collapse_escape(seed=seed))
    for part in parts:
        for name, ok in part.checks.items():
            report.check(f"{part.case}:{name}", ok)
        report.values[part.case] = part.values

    eps = 1e-3
    (error,) = check_collapse_consistency(UnitCircle(), TestMapKind.SQUARE, 0.7, (0.0, 0.3, 0.55, 1.0), (eps,))
    report.check("collapse-consistency", error <= 10 * eps)
    report.values["collapse_error"] = error
    return report


def run_case(case: ReferenceCase, seed: int = DEFAULT_SEED, samples: int = DEFAULT_SAMPLES) -> CaseReport:
    if case is ReferenceCase.ELLIPSE_SQUARE:
        report = verify_ellipse_square()
    elif case is ReferenceCase.TRIANGLE_HEXAGON:
        report = verify_triangle_hexagon()
    elif case is ReferenceCase.HELIX_RHOMBUS:
        report = verify_helix_rhombus()
    else:
        report = verify_boundary(samples, seed)
    logger.info("case %s: %s", case.value, "pass" if report.passed else "FAIL")
    return report


def run_all(seed: int = DEFAULT_SEED, samples: int = DEFAULT_SAMPLES) -> list[CaseReport]:
    return [run_case(case, seed, samples) for case in ReferenceCase]
