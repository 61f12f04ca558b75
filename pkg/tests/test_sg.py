"""Tests for square-grid discrete Z^gamma maps."""

from __future__ import annotations

import cmath
import math

import pytest

from qcpattern.core import CirclePattern, check_pattern
from qcpattern.exceptions import DomainError, InputError
from qcpattern.sg import (
    alpha_psi,
    convex_parameters,
    cross_ratio,
    from_quadrant,
    map_to_pattern,
    quadrant_radii,
    sg_labelling,
    solve_cross_ratio,
    to_quadrant,
    zgamma_checks,
    zgamma_map,
)


class TestCrossRatio:
    """Test the cross-ratio helpers."""

    def test_alpha_psi(self) -> None:
        """Test the labels of rising and falling diagonals."""
        assert alpha_psi(0, 1 + 1j, 1.0) == 1.0
        assert alpha_psi(2, 1 + 1j, 1.0) == pytest.approx(math.pi - 1.0)
        with pytest.raises(InputError):
            alpha_psi(0, 2, 1.0)

    def test_square(self) -> None:
        """Test the fourth corner of the unit square."""
        assert solve_cross_ratio(0, 1, 1 + 1j, -1) == pytest.approx(1j)

    def test_rhombus(self) -> None:
        """Test the fourth corner of a 60 degree rhombus."""
        psi = 2 * math.pi / 3
        q = cmath.exp(2j * (psi - math.pi))
        omega = cmath.exp(1j * math.pi / 3)
        p4 = solve_cross_ratio(0, 1, 1 + omega, q)
        assert p4 == pytest.approx(omega)
        assert cross_ratio(0, 1, 1 + omega, p4) == pytest.approx(q)

    def test_repeated_points(self) -> None:
        """Test that the three given points must differ."""
        with pytest.raises(InputError):
            solve_cross_ratio(0, 1, 1, -1)


class TestZgammaMap:
    """Test the discrete power map."""

    def test_identity(self) -> None:
        """Test that Z^1 is the identity on the grid."""
        zmap = zgamma_map(1.0, math.pi / 2, 10)
        for (n, m), value in zmap.values.items():
            assert abs(value - complex(n, m)) < 1e-10

    def test_axis_values(self) -> None:
        """Test the first values on both axes."""
        zmap = zgamma_map(1.5, math.pi / 2, 4)
        assert zmap.values[0, 0] == 0
        assert zmap.values[1, 0] == 1
        assert zmap.values[2, 0] == pytest.approx(4.0)
        assert zmap.values[0, 1] == pytest.approx(cmath.exp(1.5j * math.pi / 2))

    @pytest.mark.parametrize(("gamma", "psi"), [(1.5, math.pi / 2), (1.5, 2 * math.pi / 3)])
    def test_residuals(self, gamma: float, psi: float) -> None:
        """Test that both defining equations hold."""
        zmap = zgamma_map(gamma, psi, 10)
        assert zmap.max_cross_ratio_residual() < 1e-9
        assert zmap.max_constraint_residual() < 1e-9

    def test_window(self) -> None:
        """Test the staircase window."""
        zmap = zgamma_map(1.5, math.pi / 2, 3)
        assert set(zmap.values) == {(n, m) for n in range(7) for m in range(7 - n)}

    @pytest.mark.parametrize(
        ("gamma", "psi", "size"),
        [(2.5, math.pi / 2, 5), (0.0, math.pi / 2, 5), (1.5, math.pi, 5), (1.5, 1.0, 0)],
    )
    def test_out_of_range(self, gamma: float, psi: float, size: int) -> None:
        """Test parameter validation."""
        with pytest.raises(DomainError):
            zgamma_map(gamma, psi, size)


class TestPattern:
    """Test the circle pattern of a map."""

    def test_embedded_with_boundary_on_rays(self) -> None:
        """Test that the orthogonal Z^(3/2) pattern is embedded in its sector."""
        pattern = map_to_pattern(zgamma_map(1.5, math.pi / 2, 15))
        assert check_pattern(pattern, ("embedded",)).ok
        for (n, m), c in pattern.centers.items():
            if m == 0 and n > 0:
                assert abs(cmath.phase(c)) < 1e-9
            if n == 0 and m > 0:
                assert cmath.phase(c) == pytest.approx(3 * math.pi / 4)

    def test_labelling(self, zgamma_orthogonal: CirclePattern) -> None:
        """Test that the pattern carries alpha_psi."""
        assert zgamma_orthogonal.labelling == sg_labelling(zgamma_orthogonal.graph, math.pi / 2)

    def test_quadrant_radii(self, zgamma_orthogonal: CirclePattern) -> None:
        """Test the re-indexing onto the quadrant."""
        radii = quadrant_radii(zgamma_orthogonal)
        assert radii[0, 0] == pytest.approx(1.0)
        assert all(big_m >= abs(big_n) for big_n, big_m in radii)

    def test_quadrant_indices(self) -> None:
        """Test the white point re-indexing."""
        assert to_quadrant(3, 1) == (1, 2)
        assert from_quadrant(1, 2) == (3, 1)
        with pytest.raises(InputError):
            to_quadrant(1, 0)


class TestZgammaChecks:
    """Test the sign, identity and convexity checks."""

    def test_orthogonal(self) -> None:
        """Test that orthogonal Z^(3/2) passes the sign check."""
        report = zgamma_checks(zgamma_map(1.5, math.pi / 2, 15))
        assert report.sign_violations == ()
        assert report.ok
        assert report.admissible

    def test_identity(self) -> None:
        """Test the radius identity at psi = 2 pi / 3."""
        report = zgamma_checks(zgamma_map(1.5, 2 * math.pi / 3, 12))
        assert report.identity_points > 0
        assert report.identity_residual < 1e-7
        assert report.to_dict()["identity_residual"] == report.identity_residual

    def test_pattern_input(self, zgamma_orthogonal: CirclePattern) -> None:
        """Test that a pattern needs its parameters."""
        with pytest.raises(InputError):
            zgamma_checks(zgamma_orthogonal)
        report = zgamma_checks(zgamma_orthogonal, math.pi / 2, 1.5)
        assert report.ok

    def test_convex_parameters(self) -> None:
        """Test the convexity window lookup."""
        assert convex_parameters(1.5, math.pi / 2)
        assert convex_parameters(1.0, math.pi / 5)
        assert not convex_parameters(1.5, math.pi / 5)
