"""Shared fixtures: embeddings and patterns that several test modules reuse."""

from __future__ import annotations

import cmath
import math

import pytest

from qcpattern.core import BQuadGraph, CirclePattern, rhombic_pattern
from qcpattern.lattice import Facet
from qcpattern.projection import LiftedEmbedding, generate_embedding, symmetric_plane
from qcpattern.sg import grid_graph, map_to_pattern, zgamma_map
from qcpattern.surface import QuadSurface, project_surface

PENROSE_OFFSET = -0.2


@pytest.fixture(scope="session")
def five_fold() -> LiftedEmbedding:
    """Five-fold embedding of the plane through -0.2 (1, ..., 1), window 6."""
    return generate_embedding(symmetric_plane(5, PENROSE_OFFSET), 6.0)


@pytest.fixture(scope="session")
def five_fold_wide() -> LiftedEmbedding:
    """Five-fold embedding with window 8."""
    return generate_embedding(symmetric_plane(5, PENROSE_OFFSET), 8.0)


@pytest.fixture(scope="session")
def square_grid() -> BQuadGraph:
    """4 x 4 square-grid b-quad-graph."""
    return grid_graph(4, 4)


@pytest.fixture(scope="session")
def isoradial_grid(square_grid: BQuadGraph) -> CirclePattern:
    """Unit squares of the 4 x 4 grid as an isoradial pattern."""
    positions = {v: complex(*v) for v in square_grid.vertices}
    return rhombic_pattern(square_grid, positions)


@pytest.fixture(scope="session")
def zgamma_orthogonal() -> CirclePattern:
    """Orthogonal Z^(3/2) pattern on ten generations."""
    return map_to_pattern(zgamma_map(1.5, math.pi / 2, 10))


def grid_embedding(psi: float, size: int) -> LiftedEmbedding:
    """Rhombic embedding of the staircase window n + m <= 2 size with axes 1, e^(i(pi - psi))."""
    top = 2 * size
    facets = frozenset(Facet((n, m), 0, 1) for n in range(top - 1) for m in range(top - 1 - n))
    directions = (1 + 0j, cmath.exp(1j * (math.pi - psi)))
    graph, positions = project_surface(QuadSurface(facets, 2), directions)
    return LiftedEmbedding(
        graph=graph,
        positions=positions,
        directions=directions,
        scales=(1.0, 1.0),
        window=float(4 * top),
    )
