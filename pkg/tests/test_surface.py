"""Tests for quad-surfaces: lifting, bricks, monotonicity and flips."""

from __future__ import annotations

import cmath
import logging
import math

import pytest

from qcpattern.exceptions import FlipError, GraphError, StripConditionError, StripError
from qcpattern.hirota import (
    assign_arguments,
    extend_to_brick,
    pattern_from_comparison,
    zgamma_axis_values,
)
from qcpattern.lattice import Facet, facet_from_corners, oriented_corners
from qcpattern.projection import LiftedEmbedding
from qcpattern.surface import (
    Brick,
    QuadSurface,
    brick_of,
    check_monotone,
    lift_embedding,
    project_surface,
    simple_flip,
    strip_flip,
)
from tests.conftest import grid_embedding

OMEGA = cmath.exp(1j * math.pi / 3)
HEXAGONAL = (1 + 0j, OMEGA, OMEGA**2)

CUBE_CORNER = QuadSurface(
    frozenset({Facet((0, 0, 0), 0, 1), Facet((0, 0, 0), 1, 2), Facet((0, 1, 0), 0, 2)}),
    3,
)
FLIPPED_CORNER = QuadSurface(
    frozenset({Facet((0, 0, 1), 0, 1), Facet((0, 0, 0), 0, 2), Facet((1, 0, 0), 1, 2)}),
    3,
)


def _ribbon(length: int, gap: int | None = None) -> QuadSurface:
    facets = set()
    for n in range(length):
        if n != gap:
            facets |= {Facet((0, n, 0), 0, 1), Facet((0, n, 0), 1, 2)}
    facets |= {Facet((0, length, 0), 0, 2), Facet((1, 0, 0), 0, 1)}
    return QuadSurface(frozenset(facets), 3)


def _crossing_ribbon() -> QuadSurface:
    facets = {Facet((0, n, 0), 0, 1) for n in range(-2, 3)}
    facets |= {Facet((0, n, 0), 1, 2) for n in range(-2, 3)}
    facets.add(Facet((0, 3, 0), 0, 2))
    return QuadSurface(frozenset(facets), 3)


def _mirror(surface: QuadSurface) -> QuadSurface:
    facets = set()
    for facet in surface.facets:
        mirrored = facet_from_corners([(x, -y, z) for x, y, z in facet.corners()])
        assert mirrored is not None
        facets.add(mirrored)
    return QuadSurface(frozenset(facets), surface.dimension)


class TestQuadSurface:
    """Test surface bookkeeping."""

    def test_facet_dimension(self) -> None:
        """Test that facets must live in Z^d."""
        with pytest.raises(GraphError):
            QuadSurface(frozenset({Facet((0, 0), 0, 2)}), 2)

    def test_brick_of_single_facet(self) -> None:
        """Test the bounding brick of one facet."""
        surface = QuadSurface(frozenset({Facet((0, 0, 0), 0, 1)}), 3)
        brick = brick_of(surface)
        assert (brick.lower, brick.upper) == ((0, 0, 0), (1, 1, 0))
        assert brick.shape == (2, 2, 1)

    def test_brick_contents(self) -> None:
        """Test the points and facets of the unit cube."""
        brick = Brick((0, 0, 0), (1, 1, 1))
        assert brick.size == 8
        assert len(list(brick.vertices())) == 8
        assert len(list(brick.facets())) == 6
        assert (1, 0, 1) in brick
        assert (2, 0, 0) not in brick

    def test_translate_and_manifold(self) -> None:
        """Test translation and the manifold condition."""
        moved = CUBE_CORNER.translate((1, 2, 3))
        assert Facet((1, 2, 3), 0, 1) in moved.facets
        assert moved.is_manifold()
        hinge = QuadSurface(frozenset({Facet((0, 0, 0), 0, 1), Facet((0, 0, 0), 0, 2)}), 3)
        assert hinge.is_manifold()
        book = hinge.replace([], [Facet((0, -1, 0), 0, 1)])
        assert not book.is_manifold()


class TestLiftAndProject:
    """Test the correspondence between embeddings and surfaces."""

    def test_project_single_facet(self) -> None:
        """Test the planar image of a facet."""
        surface = QuadSurface(frozenset({Facet((0, 0), 0, 1)}), 2)
        graph, positions = project_surface(surface, (1 + 0j, 1j))
        assert positions == {(0, 0): 0j, (1, 0): 1 + 0j, (1, 1): 1 + 1j, (0, 1): 1j}
        assert graph.faces == (((0, 0), (1, 0), (1, 1), (0, 1)),)

    def test_lift_then_project(self, five_fold: LiftedEmbedding) -> None:
        """Test that projecting the lift reproduces the embedding up to translation."""
        surface = lift_embedding(five_fold)
        _, positions = project_surface(surface, five_fold.directions)
        seed = five_fold.seed
        anchor = five_fold.positions[seed]
        for v, p in five_fold.positions.items():
            lifted = tuple(a - b for a, b in zip(v, seed, strict=True))
            assert abs(positions[lifted] - (p - anchor)) < 1e-9
        assert len(surface.facets) == len(five_fold.graph.faces)


class TestMonotone:
    """Test the monotone path criterion."""

    def test_single_facet(self) -> None:
        """Test that one facet is monotone."""
        assert check_monotone(QuadSurface(frozenset({Facet((0, 0, 0), 0, 1)}), 3)).monotone

    def test_folded_surface(self) -> None:
        """Test that four faces of a cube are not monotone."""
        surface = CUBE_CORNER.replace([], [Facet((0, 0, 1), 0, 1)])
        result = check_monotone(surface)
        assert not result.monotone
        assert result.witness is not None

    def test_lifted_staircase(self) -> None:
        """Test that a lifted staircase patch is monotone."""
        surface = lift_embedding(grid_embedding(math.pi / 2, 3))
        assert check_monotone(surface).monotone


class TestSimpleFlip:
    """Test cube-corner flips."""

    def test_flip(self) -> None:
        """Test the flipped cube corner."""
        assert simple_flip(CUBE_CORNER, (0, 1, 0)) == FLIPPED_CORNER

    def test_flip_back(self) -> None:
        """Test that flipping the opposite corner restores the surface."""
        assert simple_flip(FLIPPED_CORNER, (1, 0, 1)) == CUBE_CORNER

    def test_four_facets(self) -> None:
        """Test that a flat vertex of degree four cannot be flipped."""
        surface = QuadSurface(
            frozenset(
                {
                    Facet((0, 0), 0, 1),
                    Facet((-1, 0), 0, 1),
                    Facet((-1, -1), 0, 1),
                    Facet((0, -1), 0, 1),
                }
            ),
            2,
        )
        with pytest.raises(FlipError):
            simple_flip(surface, (0, 0))


class TestStripFlip:
    """Test ribbon flips."""

    def test_length_one_is_simple_flip(self) -> None:
        """Test that a one-facet ribbon flip equals the simple flip."""
        assert strip_flip(CUBE_CORNER, (0, 0, 0), (0, 1, 2), "+", HEXAGONAL) == simple_flip(
            CUBE_CORNER, (0, 1, 0)
        )

    def test_ribbon(self) -> None:
        """Test the facets of a flipped ribbon of length three."""
        flipped = strip_flip(_ribbon(3), (0, 0, 0), (0, 1, 2), "+", HEXAGONAL)
        expected = {Facet((0, n, 1), 0, 1) for n in range(3)} | {
            Facet((1, n, 0), 1, 2) for n in range(3)
        }
        expected |= {Facet((0, 0, 0), 0, 2), Facet((1, 0, 0), 0, 1)}
        assert flipped.facets == frozenset(expected)

    def test_minus_half_mirrors_plus(self) -> None:
        """Test that a ribbon along -e_j2 flips like the mirror image of one along +e_j2."""
        plus = strip_flip(_ribbon(3), (0, 0, 0), (0, 1, 2), "+", HEXAGONAL)
        mirrored = (1 + 0j, -OMEGA, OMEGA**2)
        minus = strip_flip(_mirror(_ribbon(3)), (0, 0, 0), (0, 1, 2), "-", mirrored)
        assert minus == _mirror(plus)

    def test_both_halves(self) -> None:
        """Test a ribbon crossing the pivot with a closing facet at one end only."""
        flipped = strip_flip(_crossing_ribbon(), (0, 0, 0), (0, 1, 2), "both", HEXAGONAL)
        expected = {Facet((0, n, 1), 0, 1) for n in range(-2, 3)}
        expected |= {Facet((1, n, 0), 1, 2) for n in range(-2, 3)}
        assert flipped.facets == frozenset(expected)

    def test_black_pivot(self, caplog: pytest.LogCaptureFixture) -> None:
        """Test that a flip at a black pivot matches the translated white flip."""
        plus = strip_flip(_ribbon(3), (0, 0, 0), (0, 1, 2), "+", HEXAGONAL)
        with caplog.at_level(logging.WARNING, logger="qcpattern.surface"):
            flipped = strip_flip(
                _ribbon(3).translate((1, 0, 0)), (1, 0, 0), (0, 1, 2), "+", HEXAGONAL
            )
        assert flipped == plus.translate((1, 0, 0))
        assert "black pivot" in caplog.text

    def test_gap(self) -> None:
        """Test that a ribbon with a hole is rejected."""
        with pytest.raises(StripError):
            strip_flip(_ribbon(4, gap=2), (0, 0, 0), (0, 1, 2), "+", HEXAGONAL)

    def test_bad_axes(self) -> None:
        """Test that the three axes must differ."""
        with pytest.raises(StripError):
            strip_flip(_ribbon(3), (0, 0, 0), (0, 0, 2), "+", HEXAGONAL)

    def test_angle_condition(self) -> None:
        """Test that labels meeting neither condition are refused."""
        directions = (1 + 0j, cmath.exp(2j * math.pi / 3), 1j)
        for half in ("+", "both"):
            with pytest.raises(StripConditionError):
                strip_flip(_ribbon(3), (0, 0, 0), (0, 1, 2), half, directions)

    def test_minus_condition_refused_for_plus(self) -> None:
        """Test that labels of the minus case do not admit a plus flip."""
        directions = (1 + 0j, cmath.exp(2j * math.pi / 3), cmath.exp(4j * math.pi / 3))
        with pytest.raises(StripConditionError):
            strip_flip(_ribbon(3), (0, 0, 0), (0, 1, 2), "+", directions)

    def test_minus_condition_admits_both(self) -> None:
        """Test that "both" accepts labels of the minus case."""
        directions = (1 + 0j, cmath.exp(2j * math.pi / 3), cmath.exp(4j * math.pi / 3))
        flipped = strip_flip(_crossing_ribbon(), (0, 0, 0), (0, 1, 2), "both", directions)
        assert flipped == strip_flip(_crossing_ribbon(), (0, 0, 0), (0, 1, 2), "both", HEXAGONAL)

    def test_missing_directions(self) -> None:
        """Test that the angle condition cannot be skipped."""
        with pytest.raises(StripConditionError):
            strip_flip(_ribbon(3), (0, 0, 0), (0, 1, 2), "+")

    def test_patterns_agree_on_shared_faces(self) -> None:
        """Test that flipping a ribbon leaves the Z^gamma pattern of other faces unchanged."""
        directions = (1 + 0j, OMEGA, OMEGA**2)
        before = _ribbon(3)
        after = strip_flip(before, (0, 0, 0), (0, 1, 2), "+", directions)

        ordered = assign_arguments(directions, 0.0)
        brick = Brick((0, 0, 0), (2, 3, 1))
        axis = zgamma_axis_values(1.5, ordered, 3)
        w = extend_to_brick(axis.restrict(v for v in axis.values if v in brick), brick, ordered)

        patterns = []
        for surface in (before, after):
            graph, positions = project_surface(surface, directions)
            patterns.append(pattern_from_comparison(graph, positions, w.values, (0, 0, 0)))
        first, second = patterns

        shared = oriented_corners(Facet((1, 0, 0), 0, 1), directions)
        kite_a = first.kites[first.graph.faces.index(shared)]
        kite_b = second.kites[second.graph.faces.index(shared)]
        for p, q in zip(kite_a.points, kite_b.points, strict=True):
            assert abs(p - q) < 1e-8
        for v in set(first.points) & set(second.points):
            assert abs(first.points[v] - second.points[v]) < 1e-8
