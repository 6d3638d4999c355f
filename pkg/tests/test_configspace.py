"""Tests for configspace module."""

from __future__ import annotations

import math

import numpy as np
import pytest

from pegs.configspace import (
    TWO_PI,
    ConfigurationError,
    CyclicConfiguration,
    DegenerateInputError,
    Infinite,
    chord_direction,
    classify_stratum,
    collapsed,
    cyclic_gaps,
    eta,
    eta_many,
    fmask_alpha,
    fmask_beta,
    is_cyclically_ordered,
    screen,
    theta,
    xi,
)
from pegs.cyclohedron import Bracket


class TestCyclicConfiguration:
    """Tests for CyclicConfiguration."""

    def test_normalises_angles(self) -> None:
        """Test that parameters are reduced to [0, 2*pi)."""
        q = CyclicConfiguration((TWO_PI + 0.5, 1.0, 2.0))
        assert q.params[0] == pytest.approx(0.5)

    def test_wrapping_order_accepted(self) -> None:
        """Test that order is judged cyclically, not by raw angles."""
        q = CyclicConfiguration((5.0, 6.0, 0.5, 2.0))
        assert sum(q.gaps) == pytest.approx(TWO_PI)

    def test_rejects_duplicates(self) -> None:
        """Test that coincident points are rejected."""
        with pytest.raises(ConfigurationError, match="distinct"):
            CyclicConfiguration((0.0, 1.0, 1.0, 2.0))

    def test_rejects_clockwise(self) -> None:
        """Test that points out of cyclic order are rejected."""
        with pytest.raises(ConfigurationError, match="cyclic order"):
            CyclicConfiguration((0.0, 2.0, 1.0, 3.0))

    def test_rejects_too_few(self) -> None:
        """Test the minimum number of points."""
        with pytest.raises(ConfigurationError, match="at least 3"):
            CyclicConfiguration((0.0, 1.0))

    def test_from_thetas_roundtrip(self) -> None:
        """Test that thetas determine the configuration up to rotation."""
        q = CyclicConfiguration((0.3, 1.1, 2.9, 4.0, 5.5))
        thetas = [theta(q, i) for i in range(2, 6)]
        rebuilt = CyclicConfiguration.from_thetas(thetas, anchor=q.params[0])
        np.testing.assert_allclose(rebuilt.params, q.params, atol=1e-12)

    def test_from_thetas_range(self) -> None:
        """Test that thetas must lie strictly between 0 and 1."""
        with pytest.raises(ConfigurationError, match=r"\(0, 1\)"):
            CyclicConfiguration.from_thetas([0.5, 1.0])

    def test_shifted_and_canonical(self) -> None:
        """Test relabelling."""
        q = CyclicConfiguration((4.0, 5.0, 0.5, 2.0))
        assert q.shifted(1).params == (5.0, 0.5, 2.0, 4.0)
        assert q.canonical().params == (0.5, 2.0, 4.0, 5.0)

    def test_rotation_preserves_gaps(self) -> None:
        """Test that rotation leaves gaps unchanged."""
        q = CyclicConfiguration((0.1, 1.0, 3.0, 5.0))
        np.testing.assert_allclose(q.rotated(2.5).gaps, q.gaps, atol=1e-12)


class TestCoordinates:
    """Tests for theta, screen, eta and xi."""

    def test_theta_even_spacing(self) -> None:
        """Test theta is 1/2 for evenly spaced points."""
        q = CyclicConfiguration(tuple(k * TWO_PI / 5 for k in range(5)))
        for i in range(1, 6):
            assert theta(q, i) == pytest.approx(0.5)

    def test_screen_sums_to_one(self) -> None:
        """Test the screen is a barycentric triple."""
        q = CyclicConfiguration((0.0, 0.1, 0.3, 0.6, 3.0))
        point = screen(q, (1, 2, 3, 4))
        assert point.as_tuple() == pytest.approx((1 / 6, 2 / 6, 3 / 6))

    def test_screen_rejects_order(self) -> None:
        """Test indices out of cyclic order."""
        q = CyclicConfiguration((0.0, 1.0, 2.0, 3.0))
        with pytest.raises(ConfigurationError, match="cyclic order"):
            screen(q, (1, 3, 2, 4))

    def test_eta_and_xi(self) -> None:
        """Test the arc-length diameter."""
        q = CyclicConfiguration((0.0, 0.5, 1.0, 1.5))
        assert eta(q) == pytest.approx(1.5)
        assert xi(q) == pytest.approx(1 / 1.5)

    def test_batched_helpers(self) -> None:
        """Test gaps, eta and ordering over a batch."""
        params = np.array([[0.0, 0.5, 1.0, 1.5], [0.0, 2.0, 1.0, 3.0]])
        np.testing.assert_allclose(cyclic_gaps(params)[0], [0.5, 0.5, 0.5, TWO_PI - 1.5])
        assert eta_many(params)[0] == pytest.approx(1.5)
        assert list(is_cyclically_ordered(params)) == [True, False]


class TestClassifyStratum:
    """Tests for stratum classification."""

    def test_interior(self) -> None:
        """Test evenly spaced points are interior."""
        q = CyclicConfiguration(tuple(k * TWO_PI / 4 for k in range(4)))
        assert classify_stratum(q).is_interior

    def test_pair_collision(self) -> None:
        """Test a two-point cluster."""
        q = CyclicConfiguration((0.0, 0.001, 2.0, 4.0))
        assert str(classify_stratum(q)) == "(12)"

    def test_total_collapse(self) -> None:
        """Test a total collapse is cut at the largest gap."""
        q = CyclicConfiguration((0.0, 0.01, 0.02, 0.03))
        assert str(classify_stratum(q)) == "(1234)"
        assert str(classify_stratum(q.shifted(1))) == "(4123)"

    def test_two_separate_pairs(self) -> None:
        """Test two antipodal pair collisions give two disjoint brackets."""
        q = CyclicConfiguration((0.0, 1e-6, math.pi, math.pi + 1e-6))
        assert str(classify_stratum(q)) == "(12)(34)"

    def test_two_scale_collapse(self) -> None:
        """Test a tight pair inside a total collapse nests in the full bracket."""
        q = CyclicConfiguration((0.0, 1e-8, 1e-4, 2e-4))
        label = classify_stratum(q, 0.05)
        assert label.brackets == (Bracket.proper(1, 2, 4), Bracket.full(4, 4))
        assert str(label) == "(12)(1234)"

    def test_threshold_range(self) -> None:
        """Test invalid thresholds."""
        q = CyclicConfiguration((0.0, 1.0, 2.0, 3.0))
        with pytest.raises(ConfigurationError):
            classify_stratum(q, 1.5)


class TestFmask:
    """Tests for the blow-up charts and chord directions."""

    def test_chord_direction_limit_is_negated_tangent(self) -> None:
        """Test the coincident limit."""
        x = 0.7
        np.testing.assert_allclose(chord_direction(x, x), [math.sin(x), -math.cos(x)])

    def test_chord_direction_matches_difference(self) -> None:
        """Test against the normalised chord."""
        x, y = 0.3, 2.0
        diff = np.array([math.cos(x) - math.cos(y), math.sin(x) - math.sin(y)])
        np.testing.assert_allclose(chord_direction(x, y), diff / np.linalg.norm(diff), atol=1e-12)

    def test_alpha(self) -> None:
        """Test the direction chart."""
        np.testing.assert_allclose(fmask_alpha((0, 0), (3, 4)), [0.6, 0.8])

    def test_alpha_degenerate(self) -> None:
        """Test coincident points raise."""
        with pytest.raises(DegenerateInputError):
            fmask_alpha((1, 1), (1, 1))

    def test_beta(self) -> None:
        """Test the ratio chart and its infinite value."""
        assert fmask_beta((0, 0), (1, 0), (2, 0)) == pytest.approx(0.5)
        assert fmask_beta((0, 0), (1, 0), (0, 0)) is Infinite.INFINITE

    def test_collapsed(self) -> None:
        """Test the scaled cluster constructor."""
        q = collapsed(1.0, (0.0, 1.0, 3.0), 0.01)
        assert q.params == pytest.approx((1.0, 1.01, 1.03))
