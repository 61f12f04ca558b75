"""Quad-surfaces in Z^d: lifting, monotonicity, bricks and flips."""

from __future__ import annotations

import itertools
import logging
import math
import typing as t
from collections import deque
from dataclasses import dataclass
from functools import cached_property

import networkx as nx
import numpy as np

from qcpattern.core import BQuadGraph
from qcpattern.exceptions import FlipError, GraphError, LiftError, StripConditionError, StripError
from qcpattern.lattice import (
    Coord,
    Facet,
    facet_from_corners,
    is_white,
    oriented_corners,
    project,
    shift,
)

if t.TYPE_CHECKING:
    from collections.abc import Iterable, Iterator, Mapping, Sequence

    from qcpattern.core import VertexId
    from qcpattern.projection import LiftedEmbedding

logger = logging.getLogger(__name__)

DIRECTION_TOL = 1e-9
ANGLE_TOL = 1e-9

Edge = tuple[Coord, Coord]


def _edge(a: Coord, b: Coord) -> Edge:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class QuadSurface:
    """Two-dimensional subcomplex of Z^d given by its unit facets."""

    facets: frozenset[Facet]
    dimension: int

    def __post_init__(self) -> None:
        """Validate facet shapes.

        Raises:
            GraphError: If a facet does not live in Z^dimension.
        """
        for facet in self.facets:
            if len(facet.base) != self.dimension or not 0 <= facet.j < facet.l < self.dimension:
                msg = f"Facet {facet} is not a facet of Z^{self.dimension}"
                raise GraphError(msg)

    @cached_property
    def vertices(self) -> tuple[Coord, ...]:
        """Sorted vertices."""
        return tuple(sorted({c for f in self.facets for c in f.corners()}))

    @cached_property
    def vertex_facets(self) -> dict[Coord, list[Facet]]:
        """Incident facets per vertex."""
        incident: dict[Coord, list[Facet]] = {}
        for facet in sorted(self.facets):
            for c in facet.corners():
                incident.setdefault(c, []).append(facet)
        return incident

    @cached_property
    def edge_facets(self) -> dict[Edge, list[Facet]]:
        """Incident facets per edge."""
        incident: dict[Edge, list[Facet]] = {}
        for facet in sorted(self.facets):
            corners = facet.corners()
            for i in range(4):
                incident.setdefault(_edge(corners[i], corners[(i + 1) % 4]), []).append(facet)
        return incident

    def is_manifold(self) -> bool:
        """No edge borders more than two facets."""
        return all(len(fs) <= 2 for fs in self.edge_facets.values())  # noqa: PLR2004

    def replace(self, removed: Iterable[Facet], added: Iterable[Facet]) -> QuadSurface:
        """Surface with some facets exchanged."""
        return QuadSurface((self.facets - set(removed)) | set(added), self.dimension)

    def translate(self, offset: Coord) -> QuadSurface:
        """Surface moved by a lattice vector."""
        return QuadSurface(
            frozenset(
                Facet(tuple(b + o for b, o in zip(f.base, offset, strict=True)), f.j, f.l)
                for f in self.facets
            ),
            self.dimension,
        )


@dataclass(frozen=True)
class Brick:
    """Coordinate box lower_k <= n_k <= upper_k."""

    lower: Coord
    upper: Coord

    @property
    def shape(self) -> tuple[int, ...]:
        """Number of lattice points per axis."""
        return tuple(b - a + 1 for a, b in zip(self.lower, self.upper, strict=True))

    @property
    def size(self) -> int:
        """Number of lattice points."""
        return int(np.prod(self.shape))

    def __contains__(self, coord: object) -> bool:
        """Lattice point inside the box."""
        return isinstance(coord, tuple) and all(
            a <= n <= b for a, n, b in zip(self.lower, coord, self.upper, strict=True)
        )

    def vertices(self) -> Iterator[Coord]:
        """All lattice points, lexicographically."""
        bounds = zip(self.lower, self.upper, strict=True)
        return itertools.product(*(range(a, b + 1) for a, b in bounds))

    def facets(self) -> Iterator[Facet]:
        """All unit facets inside the box."""
        d = len(self.lower)
        for j, l in itertools.combinations(range(d), 2):
            ranges = [
                range(a, b) if k in (j, l) else range(a, b + 1)
                for k, (a, b) in enumerate(zip(self.lower, self.upper, strict=True))
            ]
            for base in itertools.product(*ranges):
                yield Facet(base, j, l)


def brick_of(surface: QuadSurface) -> Brick:
    """Smallest brick containing the surface."""
    verts = np.array(surface.vertices, dtype=np.int64)
    return Brick(tuple(verts.min(axis=0).tolist()), tuple(verts.max(axis=0).tolist()))


def _match_direction(vector: complex, directions: Sequence[complex]) -> tuple[int, int]:
    gap, k, sign = min(
        (abs(vector - sign * a), k, sign) for k, a in enumerate(directions) for sign in (1, -1)
    )
    if gap > DIRECTION_TOL:
        msg = f"Edge vector {vector} matches no direction (closest +-a_{k} off by {gap:.2e})"
        raise LiftError(msg)
    return k, sign


def lift_coordinates(
    graph: BQuadGraph,
    positions: Mapping[VertexId, complex],
    directions: Sequence[complex],
    seed: VertexId,
) -> dict[VertexId, Coord]:
    """Assign Z^d coordinates to the vertices of a rhombic embedding.

    Args:
        graph: The b-quad-graph.
        positions: Planar positions.
        directions: Edge directions a_1, ..., a_d.
        seed: White vertex mapped to the origin.

    Returns:
        Lattice coordinate per vertex.

    Raises:
        LiftError: If an edge has no admissible direction or two paths disagree.
    """
    if seed not in graph.white:
        msg = f"Seed {seed} must be a white vertex"
        raise LiftError(msg)
    d = len(directions)
    neighbors: dict[VertexId, set[VertexId]] = {}
    for a, b in graph.edge_faces:
        neighbors.setdefault(a, set()).add(b)
        neighbors.setdefault(b, set()).add(a)

    coords: dict[VertexId, Coord] = {seed: (0,) * d}
    queue = deque([seed])
    while queue:
        v = queue.popleft()
        for w in sorted(neighbors[v]):
            k, sign = _match_direction(positions[w] - positions[v], directions)
            candidate = shift(coords[v], k, sign)
            known = coords.get(w)
            if known is None:
                coords[w] = candidate
                queue.append(w)
            elif known != candidate:
                msg = f"Vertex {w} lifts to both {known} and {candidate}"
                raise LiftError(msg)
    if len(coords) != len(neighbors):
        msg = f"Embedding is disconnected: lifted {len(coords)} of {len(neighbors)} vertices"
        raise LiftError(msg)
    return coords


def lift_rhombic(
    graph: BQuadGraph,
    positions: Mapping[VertexId, complex],
    directions: Sequence[complex],
    seed: VertexId,
) -> tuple[QuadSurface, dict[VertexId, Coord]]:
    """Lift a rhombic embedding with finitely many edge directions.

    Returns:
        The quad-surface and the coordinate map.

    Raises:
        LiftError: If a face does not lift to a unit facet.
    """
    coords = lift_coordinates(graph, positions, directions, seed)
    facets = set()
    for index, face in enumerate(graph.faces):
        facet = facet_from_corners([coords[v] for v in face])
        if facet is None:
            msg = f"Face {index} does not lift to a unit facet"
            raise LiftError(msg)
        facets.add(facet)
    return QuadSurface(frozenset(facets), len(directions)), coords


def lift_embedding(embedding: LiftedEmbedding, seed: VertexId | None = None) -> QuadSurface:
    """Lift an embedding to Z^d with its seed white vertex at the origin."""
    surface, _ = lift_rhombic(
        embedding.graph,
        embedding.positions,
        embedding.directions,
        embedding.seed if seed is None else seed,
    )
    logger.info(f"Lifted {len(surface.facets)} faces into Z^{surface.dimension}")
    return surface


def project_surface(
    surface: QuadSurface,
    directions: Sequence[complex],
) -> tuple[BQuadGraph, dict[Coord, complex]]:
    """Planar b-quad-graph of a quad-surface; vertex n sits at sum_k n_k a_k."""
    faces = tuple(oriented_corners(f, directions) for f in sorted(surface.facets))
    positions = {v: project(v, directions) for v in surface.vertices}
    white = frozenset(v for v in surface.vertices if is_white(v))
    return BQuadGraph(faces, white), positions  # type: ignore[arg-type]


@dataclass(frozen=True)
class MonotoneResult:
    """Outcome of `check_monotone`."""

    monotone: bool
    witness: tuple[Coord, Coord] | None = None


def check_monotone(surface: QuadSurface) -> MonotoneResult:
    """Check that every two vertices are joined by an octant-monotone path.

    A path is monotone iff its length equals the L1 distance of its ends, so the
    surface is monotone iff graph distance equals L1 distance for all pairs.
    """
    graph = nx.Graph()
    graph.add_nodes_from(surface.vertices)
    graph.add_edges_from(surface.edge_facets)
    for source, lengths in sorted(nx.all_pairs_shortest_path_length(graph)):
        for target in sorted(lengths):
            if target <= source:
                continue
            l1 = sum(abs(a - b) for a, b in zip(source, target, strict=True))
            if lengths[target] != l1:
                logger.debug(f"Pair {source}, {target}: path {lengths[target]} vs L1 {l1}")
                return MonotoneResult(monotone=False, witness=(source, target))
        if len(lengths) != graph.number_of_nodes():
            missing = min(v for v in graph.nodes if v not in lengths)
            return MonotoneResult(monotone=False, witness=(source, missing))
    return MonotoneResult(monotone=True)


def _signs_at(facet: Facet, vertex: Coord) -> dict[int, int]:
    """Direction (+1/-1) along each facet axis from a corner into the facet."""
    return {k: 1 if vertex[k] == facet.base[k] else -1 for k in (facet.j, facet.l)}


def _facet_at(vertex: Coord, axis_a: int, sign_a: int, axis_b: int, sign_b: int) -> Facet:
    """Facet spanned from `vertex` by sign_a e_a and sign_b e_b."""
    base = list(vertex)
    if sign_a < 0:
        base[axis_a] -= 1
    if sign_b < 0:
        base[axis_b] -= 1
    j, l = sorted((axis_a, axis_b))
    return Facet(tuple(base), j, l)


def simple_flip(surface: QuadSurface, vertex: Coord) -> QuadSurface:
    """Replace the three facets of a cube corner by the three opposite facets.

    Raises:
        FlipError: If the vertex does not carry exactly three facets of one cube corner.
    """
    incident = surface.vertex_facets.get(vertex, [])
    if len(incident) != 3:  # noqa: PLR2004
        msg = f"Flip needs exactly 3 facets at {vertex}, found {len(incident)}"
        raise FlipError(msg)
    signs: dict[int, int] = {}
    for facet in incident:
        for axis, sign in _signs_at(facet, vertex).items():
            if signs.setdefault(axis, sign) != sign:
                msg = f"Facets at {vertex} do not form a cube corner (axis {axis})"
                raise FlipError(msg)
    if len(signs) != 3 or {(f.j, f.l) for f in incident} != set(  # noqa: PLR2004
        itertools.combinations(sorted(signs), 2)
    ):
        msg = f"Facets at {vertex} do not form a cube corner"
        raise FlipError(msg)

    opposite = list(vertex)
    for axis, sign in signs.items():
        opposite[axis] += sign
    added = [
        _facet_at(tuple(opposite), a, -signs[a], b, -signs[b])
        for a, b in itertools.combinations(sorted(signs), 2)
    ]
    if any(f in surface.facets for f in added):
        msg = f"Flip at {vertex} would duplicate existing facets"
        raise FlipError(msg)
    logger.debug(f"Simple flip {vertex} -> {tuple(opposite)}")
    return surface.replace(incident, added)


def _sector_angle(u: complex, v: complex) -> float:
    return float(abs(np.angle(v / u)))


def _check_strip_angles(
    vertex: Coord,
    axes: tuple[int, int, int],
    signs: tuple[int, int],
    half: str,
    directions: Sequence[complex] | None,
) -> None:
    if directions is None:
        msg = f"Strip flip at {vertex} needs edge directions to check the angle condition"
        raise StripConditionError(msg)
    j1, j2, j3 = axes
    # Labels of f1, f2 and of the (j1, j3) facet at vertex + e_{j2}, read with the pivot white.
    u, v, w = signs[0] * directions[j1], directions[j2], signs[1] * directions[j3]
    alpha1 = math.pi - _sector_angle(u, v)
    alpha2 = math.pi - _sector_angle(v, w)
    alpha3 = _sector_angle(u, w)
    plus_ok = abs(alpha1 + alpha2 + alpha3 - 2 * math.pi) < ANGLE_TOL
    minus_ok = abs((math.pi - alpha1) + (math.pi - alpha2) + alpha3 - 2 * math.pi) < ANGLE_TOL
    if not {"+": plus_ok, "-": minus_ok, "both": plus_ok or minus_ok}[half]:
        msg = (
            f"Labels {alpha1:.6f}, {alpha2:.6f}, {alpha3:.6f} at {vertex} do not admit a "
            f"strip flip of half {half!r}"
        )
        raise StripConditionError(msg)


def _strip_end_ok(
    surface: QuadSurface,
    end: Coord,
    last: tuple[Facet, Facet],
    caps: tuple[int, int, int, int],
) -> Facet | None:
    """Far cap to remove at a strip end, or None if the strip runs into the boundary.

    Raises:
        StripError: If the strip end is neither capped nor on the boundary.
    """
    j1, e1, j3, e3 = caps
    cap = _facet_at(end, j1, e1, j3, e3)
    if cap in surface.facets:
        return cap
    ends = (
        (last[0], _edge(end, shift(end, j1, e1))),
        (last[1], _edge(end, shift(end, j3, e3))),
    )
    for facet, edge in ends:
        if surface.edge_facets.get(edge, [facet]) != [facet]:
            msg = f"Strip ends at {end} without reaching the boundary"
            raise StripError(msg)
    return None


def strip_flip(  # noqa: C901, PLR0912
    surface: QuadSurface,
    vertex: Coord,
    axes: tuple[int, int, int],
    half: str,
    directions: Sequence[complex] | None = None,
) -> QuadSurface:
    """Flip a ribbon of facets running along axis j2 from a pivot vertex.

    The ribbon consists of the facets f1 + n e_{j2} (axes j1, j2) and
    f2 + n e_{j2} (axes j2, j3). They are replaced by f1 + n e_{j2} + e_{j3} and
    f2 + n e_{j2} + e_{j1}; a (j1, j3) facet is inserted at the pivot and a
    closing (j1, j3) facet at the far end is removed. Strips are truncated at
    the surface boundary.

    Args:
        surface: The quad-surface.
        vertex: The pivot.
        axes: (j1, j2, j3), the ribbon runs along j2.
        half: "+" or "-" for a ribbon along +e_{j2} or -e_{j2}; "both" for a
            ribbon crossing the pivot, bounded at both ends.
        directions: Edge directions. With the labels alpha1, alpha2 of the ribbon facets
            at the pivot and alpha3 of the (j1, j3) facet at vertex + e_{j2}, all read as
            if the pivot were white, "+" needs alpha1 + alpha2 + alpha3 = 2 pi, "-" needs
            (pi - alpha1) + (pi - alpha2) + alpha3 = 2 pi and "both" accepts either.

    Returns:
        The flipped surface.

    Raises:
        StripError: If the ribbon has a gap, a missing translate, or does not end
            at a closing facet or the boundary.
        StripConditionError: If directions are missing or the angle condition fails.
    """
    j1, j2, j3 = axes
    if len({j1, j2, j3}) != 3 or half not in ("+", "-", "both"):  # noqa: PLR2004
        msg = f"Invalid strip axes {axes} or half {half!r}"
        raise StripError(msg)
    if not is_white(vertex):
        logger.warning(f"Strip flip at black pivot {vertex} is experimental")
    step = -1 if half == "-" else 1

    found = [
        (e1, e3)
        for e1, e3 in itertools.product((1, -1), repeat=2)
        if _facet_at(vertex, j1, e1, j2, step) in surface.facets
        and _facet_at(vertex, j2, step, j3, e3) in surface.facets
    ]
    if len(found) != 1:
        msg = f"Expected one ribbon start at {vertex} along axis {j2}, found {len(found)}"
        raise StripError(msg)
    e1, e3 = found[0]
    f1 = _facet_at(vertex, j1, e1, j2, step)
    f2 = _facet_at(vertex, j2, step, j3, e3)

    _check_strip_angles(vertex, axes, (e1, e3), half, directions)

    def present(n: int) -> tuple[bool, bool]:
        return (
            f1.translate(j2, n * step) in surface.facets,
            f2.translate(j2, n * step) in surface.facets,
        )

    span = max(brick_of(surface).shape) + 1
    low = 0
    if half == "both":
        while all(present(low - 1)):
            low -= 1
    high = 0
    while all(present(high)):
        high += 1
    if high == 0:
        msg = f"No ribbon at {vertex}"
        raise StripError(msg)
    for n in (*range(high, high + span), *(range(low - span, low) if half == "both" else ())):
        first, second = present(n)
        if first != second:
            msg = f"Ribbon at {vertex} misses a translated facet at offset {n}"
            raise StripError(msg)
        if first:
            msg = f"Ribbon at {vertex} has a gap before offset {n}"
            raise StripError(msg)

    removed = []
    added = []
    for n in range(low, high):
        removed += [f1.translate(j2, n * step), f2.translate(j2, n * step)]
        added += [
            f1.translate(j2, n * step).translate(j3, e3),
            f2.translate(j2, n * step).translate(j1, e1),
        ]
    caps = (j1, e1, j3, e3)
    far = shift(vertex, j2, high * step)
    cap = _strip_end_ok(surface, far, (removed[-2], removed[-1]), caps)
    if cap is not None:
        removed.append(cap)
    if half == "both":
        near = shift(vertex, j2, low * step)
        cap = _strip_end_ok(surface, near, (removed[0], removed[1]), caps)
        if cap is not None:
            removed.append(cap)
    else:
        pivot_cap = _facet_at(vertex, j1, e1, j3, e3)
        if pivot_cap in surface.facets:
            msg = f"Pivot {vertex} already carries the facet {pivot_cap}"
            raise StripError(msg)
        added.append(pivot_cap)

    flipped = surface.replace(removed, added)
    expected = len(surface.facets) - len(removed) + len(added)
    if len(flipped.facets) != expected or not flipped.is_manifold():
        msg = f"Strip flip at {vertex} does not yield a surface"
        raise StripError(msg)
    logger.info(f"Strip flip at {vertex} along axis {j2} ({half}) moved {high - low} facet pairs")
    return flipped
