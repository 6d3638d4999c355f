"""Tests for testmaps module."""

from __future__ import annotations

import math

import numpy as np
import pytest

from pegs.configspace import CyclicConfiguration
from pegs.curves import Ellipse, HelixChord, UnitCircle
from pegs.testmaps import (
    HexagonShape,
    TestMapError,
    TestMapKind,
    TestValue,
    collapse_limit,
    hexagon_degeneracy,
    hexagon_gamma,
    hexagon_test,
    jacobian,
    raw_values,
    rescaled_test,
    rescaled_values,
    rhombus_test,
    square_test,
)

UNIT_SQUARE = [(1, 0), (0, 1), (-1, 0), (0, -1)]
REGULAR_HEXAGON = [(math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)) for k in range(6)]


def random_points(rng: np.random.Generator, kind: TestMapKind, count: int) -> np.ndarray:
    return rng.normal(size=(count, kind.n, kind.dim))


def rotation(angle: float) -> np.ndarray:
    return np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])


def space_rotation(rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


class TestRawMaps:
    """Tests for the unscaled test maps."""

    def test_square_zero(self) -> None:
        """Test a square is a zero."""
        assert square_test(UNIT_SQUARE).norm() == 0.0

    def test_rectangle_fails_side_condition(self) -> None:
        """Test a rectangle passes the diagonal conditions but not the side condition."""
        value = square_test([(2, 1), (-2, 1), (-2, -1), (2, -1)])
        assert value.block("phi1") == pytest.approx([0.0, 0.0])
        assert value.block("phi2")[0] == pytest.approx(0.0)
        assert value.block("phi3")[0] == pytest.approx(4.0)

    def test_rhombus_fails_diagonal_condition(self) -> None:
        """Test a planar rhombus has equal sides but unequal diagonals."""
        value = square_test([(2, 0), (0, 1), (-2, 0), (0, -1)])
        assert value.block("phi2")[0] == pytest.approx(2.0)
        assert value.block("phi3")[0] == pytest.approx(0.0)

    def test_hexagon_zero_regular_and_affine(self) -> None:
        """Test regular hexagons and their affine images are zeros."""
        assert hexagon_test(REGULAR_HEXAGON).norm() < 1e-15
        affine = np.asarray(REGULAR_HEXAGON) @ np.array([[2.0, 0.3], [-0.5, 1.0]]) + [4.0, -1.0]
        assert hexagon_test(affine).norm() < 1e-14

    def test_hexagon_gamma(self) -> None:
        """Test the implicit block equals the direct third midpoint condition."""
        x = np.random.default_rng(1).normal(size=(6, 2))
        np.testing.assert_allclose(hexagon_test(x).gamma(), hexagon_gamma(x), atol=1e-14)

    def test_rhombus_zero(self) -> None:
        """Test a skew rhombus in space."""
        rhombus = [(0, 1, math.pi / 2), (-1, 0, math.pi), (0, -1, 3 * math.pi / 2), (1, 0, math.pi)]
        assert rhombus_test(rhombus).norm() < 1e-15

    def test_shape_mismatch(self) -> None:
        """Test wrong point counts and dimensions."""
        with pytest.raises(TestMapError, match="4 points in R\\^2"):
            raw_values(TestMapKind.SQUARE, np.zeros((5, 2)))
        with pytest.raises(TestMapError):
            rhombus_test(UNIT_SQUARE)

    def test_gamma_only_for_hexagon(self) -> None:
        """Test gamma on other kinds."""
        with pytest.raises(TestMapError, match="hexagon"):
            square_test(UNIT_SQUARE).gamma()


class TestInvariance:
    """Property checks over seeded random inputs."""

    @pytest.mark.parametrize("kind", list(TestMapKind))
    def test_translation(self, kind: TestMapKind) -> None:
        """Test values are translation invariant."""
        rng = np.random.default_rng(7)
        x = random_points(rng, kind, 1000)
        shift = rng.normal(size=(1000, 1, kind.dim))
        np.testing.assert_allclose(raw_values(kind, x + shift), raw_values(kind, x), atol=1e-10)

    @pytest.mark.parametrize("kind", list(TestMapKind))
    def test_scaling(self, kind: TestMapKind) -> None:
        """Test values are homogeneous of degree one."""
        rng = np.random.default_rng(8)
        x = random_points(rng, kind, 1000)
        np.testing.assert_allclose(raw_values(kind, 3.5 * x), 3.5 * raw_values(kind, x), atol=1e-10)

    @pytest.mark.parametrize("kind", list(TestMapKind))
    def test_rotation_preserves_norm(self, kind: TestMapKind) -> None:
        """Test rotating the plane or space leaves the norm unchanged."""
        rng = np.random.default_rng(9)
        x = random_points(rng, kind, 1000)
        turn = rotation(0.83) if kind.dim == 2 else space_rotation(rng)
        rotated = x @ turn.T
        np.testing.assert_allclose(
            np.linalg.norm(raw_values(kind, rotated), axis=-1),
            np.linalg.norm(raw_values(kind, x), axis=-1),
            atol=1e-10,
        )

    @pytest.mark.parametrize("kind", list(TestMapKind))
    def test_relabelling_action(self, kind: TestMapKind) -> None:
        """Test TestValue.shifted matches evaluating on relabelled points."""
        rng = np.random.default_rng(10)
        for x in random_points(rng, kind, 200):
            before = raw_values(kind, x)
            after = raw_values(kind, np.roll(x, -1, axis=0))
            np.testing.assert_allclose(TestValue(kind, before).shifted().components, after, atol=1e-12)

    @pytest.mark.parametrize("kind", list(TestMapKind))
    def test_invariant_norm(self, kind: TestMapKind) -> None:
        """Test the invariant norm survives every relabelling."""
        rng = np.random.default_rng(11)
        for x in random_points(rng, kind, 200):
            norms = [TestValue(kind, raw_values(kind, np.roll(x, -k, axis=0))).invariant_norm() for k in range(kind.n)]
            assert norms == pytest.approx([norms[0]] * kind.n)

    def test_plain_hexagon_norm_not_invariant(self) -> None:
        """Test that the plain hexagon norm does change under relabelling."""
        x = np.random.default_rng(13).normal(size=(6, 2))
        assert hexagon_test(x).norm() != pytest.approx(hexagon_test(np.roll(x, -1, axis=0)).norm())


class TestRescaled:
    """Tests for the rescaled test map."""

    def test_divides_by_eta(self, ellipse: Ellipse) -> None:
        """Test rescaling."""
        q = CyclicConfiguration((0.1, 0.4, 0.9, 1.5))
        raw = raw_values(TestMapKind.SQUARE, ellipse.eval_many(q.array()))
        np.testing.assert_allclose(rescaled_test(ellipse, q, TestMapKind.SQUARE).components, raw / 1.4)

    def test_batched_matches_single(self, ellipse: Ellipse) -> None:
        """Test batch evaluation."""
        params = np.array([[0.1, 0.4, 0.9, 1.5], [0.0, 1.0, 3.0, 5.0]])
        batch = rescaled_values(ellipse, params, TestMapKind.SQUARE)
        single = rescaled_test(ellipse, CyclicConfiguration(tuple(params[1])), TestMapKind.SQUARE)
        np.testing.assert_allclose(batch[1], single.components)

    def test_dimension_mismatch(self, ellipse: Ellipse) -> None:
        """Test a planar curve with the rhombus test."""
        with pytest.raises(TestMapError, match="R\\^3"):
            rescaled_values(ellipse, np.zeros(4), TestMapKind.RHOMBUS)

    def test_point_count_mismatch(self, ellipse: Ellipse) -> None:
        """Test a configuration of the wrong size."""
        q = CyclicConfiguration((0.0, 1.0, 2.0))
        with pytest.raises(TestMapError, match="4 points"):
            rescaled_test(ellipse, q, TestMapKind.SQUARE)


class TestCollapseLimit:
    """Tests for collapse_limit."""

    @pytest.mark.parametrize("kind", [TestMapKind.SQUARE, TestMapKind.HEXAGON])
    def test_matches_small_clusters(self, circle: UnitCircle, kind: TestMapKind) -> None:
        """Test the limit against a cluster of size 1e-3 on the circle."""
        offsets = np.linspace(0.0, 1.0, kind.n) ** 1.3
        eps = 1e-3
        anchor = 0.4
        limit = collapse_limit(kind, circle.tangent(anchor), offsets).components
        values = rescaled_values(circle, anchor + eps * offsets, kind)
        assert np.linalg.norm(values - limit) <= 10 * eps

    def test_cut_relabels(self) -> None:
        """Test that the cut moves the first offset to the point after it."""
        tangent = [1.0, 0.0]
        offsets = [0.0, 0.2, 0.7, 1.0]
        shifted = collapse_limit(TestMapKind.SQUARE, tangent, offsets, cut=1)
        plain = collapse_limit(TestMapKind.SQUARE, tangent, offsets)
        assert shifted.invariant_norm() == pytest.approx(plain.invariant_norm())

    def test_square_never_vanishes(self) -> None:
        """Test the collapsed square test stays away from zero."""
        rng = np.random.default_rng(12)
        for _ in range(1000):
            offsets = np.sort(rng.uniform(0, 1, 4))
            assert collapse_limit(TestMapKind.SQUARE, [0.0, 1.0], offsets).norm() > 1e-3

    def test_rejects_unsorted(self) -> None:
        """Test offsets must increase."""
        with pytest.raises(TestMapError, match="increasing"):
            collapse_limit(TestMapKind.SQUARE, [1.0, 0.0], [0.0, 2.0, 1.0, 3.0])

    def test_rejects_zero_tangent(self) -> None:
        """Test a vanishing tangent."""
        with pytest.raises(TestMapError, match="tangent"):
            collapse_limit(TestMapKind.SQUARE, [0.0, 0.0], [0.0, 1.0, 2.0, 3.0])


class TestJacobian:
    """Tests for the finite-difference Jacobian."""

    @pytest.mark.parametrize("t", [0.3, 1.0, 2.5])
    def test_richardson(self, ellipse: Ellipse, t: float) -> None:
        """Test h against h/2 at a generic configuration."""
        params = np.array([t, t + 1.1, t + 2.9, t + 4.4])
        full = jacobian(ellipse, params, TestMapKind.SQUARE, 1e-5)
        half = jacobian(ellipse, params, TestMapKind.SQUARE, 5e-6)
        np.testing.assert_allclose(half, full, rtol=1e-4, atol=1e-8)

    def test_columns_are_parameters(self, ellipse: Ellipse) -> None:
        """Test column j moves only point j."""
        params = np.array([0.2, 1.5, 3.0, 4.6])
        jac = jacobian(ellipse, params, TestMapKind.SQUARE)
        h = 1e-6
        bumped = params.copy()
        bumped[2] += h
        lowered = params.copy()
        lowered[2] -= h
        column = (
            rescaled_values(ellipse, bumped, TestMapKind.SQUARE) - rescaled_values(ellipse, lowered, TestMapKind.SQUARE)
        ) / (2 * h)
        np.testing.assert_allclose(jac[:, 2], column)

    @pytest.mark.parametrize("kind", list(TestMapKind))
    def test_relabelling_permutes_rows_and_columns(
        self, ellipse: Ellipse, helix: HelixChord, kind: TestMapKind
    ) -> None:
        """Test the Jacobian at a relabelled configuration is the shift action on the rolled columns."""
        curve = helix if kind.dim == 3 else ellipse
        params = np.sort(np.random.default_rng(14).uniform(0.0, 2 * math.pi, kind.n))
        jac = jacobian(curve, params, kind)
        relabelled = jacobian(curve, np.roll(params, -1), kind)
        expected = np.stack(
            [TestValue(kind, column).shifted().components for column in np.roll(jac, -1, axis=1).T], axis=1
        )
        np.testing.assert_allclose(relabelled, expected, rtol=1e-7, atol=1e-7)

    def test_step_bounds(self, ellipse: Ellipse) -> None:
        """Test finite-difference steps outside [1e-8, 1e-4]."""
        with pytest.raises(TestMapError, match="outside"):
            jacobian(ellipse, [0.0, 1.0, 2.0, 3.0], TestMapKind.SQUARE, 1e-2)


class TestHexagonDegeneracy:
    """Tests for hexagon_degeneracy."""

    def test_regular(self) -> None:
        """Test a genuine hexagon."""
        assert hexagon_degeneracy(REGULAR_HEXAGON) is HexagonShape.AFFINE_REGULAR

    def test_one_point(self) -> None:
        """Test a fully collapsed hexagon."""
        assert hexagon_degeneracy([(1.0, 2.0)] * 6) is HexagonShape.ONE_POINT

    def test_three_point(self) -> None:
        """Test coincident pairs."""
        a, b, c = (0.0, 0.0), (1.0, 0.0), (0.0, 1.0)
        assert hexagon_degeneracy([a, a, b, b, c, c]) is HexagonShape.THREE_POINT

    def test_collinear(self) -> None:
        """Test a collinear zero of the hexagon system."""
        points = [(float(k), 2.0 * k) for k in (0, 1, 2, 3, 4, 5)]
        assert hexagon_degeneracy(points) is HexagonShape.COLLINEAR
