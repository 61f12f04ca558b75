"""Comparison functions, the Hirota equation and quasicrystallic Z^gamma patterns.

A circle pattern on a rhombic embedding is encoded by its comparison function
w against the isoradial pattern: w(x) is the radius ratio at a white vertex x,
and the unimodular w(y) at a black vertex y rotates its edge star, so that every
edge satisfies ``P(y) - C(x) = w(x) w(y) (y - x)``. Closing this relation around
a rhombus (x0, y0, x1, y1) is the Hirota equation

    w(x0) w(y0) a0 - w(x1) w(y0) a1 - w(x1) w(y1) a0 + w(x0) w(y1) a1 = 0

with a0 = x0 - y0 and a1 = x1 - y0.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import math
import typing as t
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from qcpattern.core import BQuadGraph, CirclePattern, Kite, rhombic_labelling
from qcpattern.exceptions import (
    DomainError,
    ExtensionError,
    InconsistencyError,
    InputError,
    OctantError,
    ReachabilityError,
    SingularFaceError,
)
from qcpattern.lattice import Coord, Facet, is_white, oriented_corners, shift
from qcpattern.surface import Brick, lift_coordinates

if t.TYPE_CHECKING:
    from collections.abc import Iterable, Mapping, Sequence

    from qcpattern.core import VertexId
    from qcpattern.projection import LiftedEmbedding

logger = logging.getLogger(__name__)

UNIT_TOL = 1e-9
SINGULAR_TOL = 1e-12
RESIDUAL_TOL = 1e-9
COLOR_TOL = 1e-9
COINCIDENCE_TOL = 1e-8


@dataclass(frozen=True)
class EdgeDirectionSet:
    """Edge directions in circular order a_1, ..., a_d, -a_1, ..., -a_d with arguments.

    `axes[i]` and `signs[i]` record which input direction (and sign) became a_{i+1}.
    """

    directions: tuple[complex, ...]
    thetas: tuple[float, ...]
    axes: tuple[int, ...]
    signs: tuple[int, ...]

    @property
    def dimension(self) -> int:
        """Number of directions d."""
        return len(self.directions)

    def theta(self, m: int) -> float:
        """Argument theta_m for any integer m (1-based), theta_{m+d} = theta_m + pi."""
        q, r = divmod(m - 1, self.dimension)
        return self.thetas[r] + q * math.pi

    def direction(self, m: int) -> complex:
        """a_m for any integer m (1-based), a_{m+d} = -a_m."""
        q, r = divmod(m - 1, self.dimension)
        return self.directions[r] * (-1) ** q

    def to_oriented(self, coord: Coord) -> Coord:
        """Coordinates of an input-axis lattice point in the ordered axes."""
        return tuple(s * coord[k] for k, s in zip(self.axes, self.signs, strict=True))

    def from_oriented(self, coord: Coord) -> Coord:
        """Inverse of `to_oriented`."""
        out = [0] * self.dimension
        for i, (k, s) in enumerate(zip(self.axes, self.signs, strict=True)):
            out[k] = s * coord[i]
        return tuple(out)


def assign_arguments(
    directions: Sequence[complex],
    theta1: float | None = None,
) -> EdgeDirectionSet:
    """Order edge directions circularly and assign arguments.

    Each direction is replaced by its negative if needed so that all of them lie
    in the half turn [theta1, theta1 + pi); then theta_{m+1} - theta_m lies in (0, pi).

    Args:
        directions: d unit complex numbers, pairwise independent over R.
        theta1: Argument of the first direction; defaults to the principal
            argument of `directions[0]`.

    Returns:
        The ordered set with arguments.

    Raises:
        DomainError: If a direction is not unimodular.
        InputError: If two directions are parallel or theta1 is not an argument of
            one of the +-a_k.
    """
    dirs = [complex(a) for a in directions]
    if len(dirs) < 2:  # noqa: PLR2004
        msg = "Need at least two edge directions"
        raise InputError(msg)
    for k, a in enumerate(dirs):
        if abs(abs(a) - 1.0) > UNIT_TOL:
            msg = f"Direction {k} is not unimodular (|a| = {abs(a)})"
            raise DomainError(msg)
    for j, l in itertools.combinations(range(len(dirs)), 2):
        if abs((dirs[j].conjugate() * dirs[l]).imag) <= UNIT_TOL:
            msg = f"Directions {j} and {l} are equal or opposite"
            raise InputError(msg)

    start = math.atan2(dirs[0].imag, dirs[0].real) if theta1 is None else float(theta1)
    entries = []
    for k, a in enumerate(dirs):
        delta = (math.atan2(a.imag, a.real) - start) % (2 * math.pi)
        if delta > 2 * math.pi - UNIT_TOL:
            delta -= 2 * math.pi
        sign = 1
        if delta >= math.pi - UNIT_TOL:
            delta -= math.pi
            sign = -1
        entries.append((delta, k, sign))
    entries.sort()
    if abs(entries[0][0]) > UNIT_TOL:
        msg = f"theta1 = {start} is not an argument of any +-a_k"
        raise InputError(msg)

    thetas = tuple(start + (0.0 if i == 0 else delta) for i, (delta, _, _) in enumerate(entries))
    return EdgeDirectionSet(
        directions=tuple(s * dirs[k] for _, k, s in entries),
        thetas=thetas,
        axes=tuple(k for _, k, _ in entries),
        signs=tuple(s for _, _, s in entries),
    )


@dataclass(frozen=True)
class ComparisonFunction:
    """Partial map w on vertices: real positive on white, unimodular on black."""

    values: dict[VertexId, complex] = field(repr=False)
    white: frozenset[VertexId]

    @classmethod
    def on_lattice(cls, values: Mapping[Coord, complex]) -> ComparisonFunction:
        """Comparison function on Z^d points colored by coordinate parity."""
        return cls(dict(values), frozenset(v for v in values if is_white(v)))

    def __len__(self) -> int:
        """Number of vertices with a value."""
        return len(self.values)

    def restrict(self, vertices: Iterable[VertexId]) -> ComparisonFunction:
        """Values on a subset."""
        keep = {v: self.values[v] for v in vertices}
        return ComparisonFunction(keep, self.white & frozenset(keep))

    def color_deviation(self) -> float:
        """Largest departure from white-real-positive / black-unimodular."""
        worst = 0.0
        for v, value in self.values.items():
            if v in self.white:
                scale = max(1.0, abs(value))
                worst = max(worst, abs(value.imag) / scale, max(0.0, -value.real) / scale)
            else:
                worst = max(worst, abs(abs(value) - 1.0))
        return worst

    def max_residual(self, facets: Iterable[Facet], directions: Sequence[complex]) -> float:
        """Largest normalised Hirota residual over the facets with four values."""
        worst = 0.0
        for facet in facets:
            corners = oriented_corners(facet, directions)
            if any(c not in self.values for c in corners):
                continue
            a0, a1 = _face_edges(corners, directions)
            worst = max(worst, hirota_residual(*(self.values[c] for c in corners), a0, a1))
        return worst


def hirota_residual(
    wx0: complex, wy0: complex, wx1: complex, wy1: complex, a0: complex, a1: complex
) -> float:
    """Hirota residual normalised by its largest term (floor 1)."""
    terms = (wx0 * wy0 * a0, -wx1 * wy0 * a1, -wx1 * wy1 * a0, wx0 * wy1 * a1)
    return abs(sum(terms)) / max(1.0, *(abs(x) for x in terms))


def hirota_solve_face(
    x0: complex | None,
    y0: complex | None,
    x1: complex | None,
    y1: complex | None,
    a0: complex,
    a1: complex,
) -> complex:
    """Solve the Hirota equation of one rhombus for its missing value.

    Args:
        x0: w at the first white corner, or None if unknown.
        y0: w at the first black corner, or None.
        x1: w at the second white corner, or None.
        y1: w at the second black corner, or None.
        a0: x0 - y0 in the plane.
        a1: x1 - y0 in the plane.

    Returns:
        The missing value.

    Raises:
        InputError: If not exactly one value is missing.
        SingularFaceError: If the linear solve degenerates.
    """
    unknown = [name for name, v in (("x0", x0), ("y0", y0), ("x1", x1), ("y1", y1)) if v is None]
    if len(unknown) != 1:
        msg = f"Exactly one corner value must be missing, got {unknown}"
        raise InputError(msg)
    if unknown == ["y1"]:
        num, den, factor = x1 * a1 - x0 * a0, x0 * a1 - x1 * a0, y0  # type: ignore[operator]
    elif unknown == ["y0"]:
        num, den, factor = x1 * a0 - x0 * a1, x0 * a0 - x1 * a1, y1  # type: ignore[operator]
    elif unknown == ["x1"]:
        num, den, factor = y0 * a0 + y1 * a1, y0 * a1 + y1 * a0, x0  # type: ignore[operator]
    else:
        num, den, factor = y0 * a1 + y1 * a0, y0 * a0 + y1 * a1, x1  # type: ignore[operator]
    if abs(den) <= SINGULAR_TOL:
        msg = f"Singular face while solving for {unknown[0]} (|denominator| = {abs(den):.2e})"
        raise SingularFaceError(msg)
    return factor * num / den  # type: ignore[operator]


def _face_edges(corners: Sequence[Coord], directions: Sequence[complex]) -> tuple[complex, complex]:
    x0, y0, x1, _ = corners
    a0 = sum((p - q) * a for p, q, a in zip(x0, y0, directions, strict=True))
    a1 = sum((p - q) * a for p, q, a in zip(x1, y0, directions, strict=True))
    return complex(a0), complex(a1)


def _down_set(targets: Iterable[Coord], lower: Coord) -> set[Coord]:
    region: set[Coord] = set()
    for top in set(targets):
        ranges = (range(a, b + 1) for a, b in zip(lower, top, strict=True))
        region.update(itertools.product(*ranges))
    return region


def _facets_at(vertex: Coord, region: set[Coord]) -> Iterable[Facet]:
    d = len(vertex)
    for j, l in itertools.combinations(range(d), 2):
        for dj, dl in itertools.product((0, 1), repeat=2):
            base = shift(shift(vertex, j, -dj), l, -dl)
            facet = Facet(base, j, l)
            if all(c in region for c in facet.corners()):
                yield facet


def extend_to_brick(  # noqa: C901
    w: ComparisonFunction,
    brick: Brick,
    directions: EdgeDirectionSet | Sequence[complex],
    *,
    targets: Iterable[Coord] | None = None,
    rng: np.random.Generator | None = None,
    verify: bool = True,
) -> ComparisonFunction:
    """Extend a Hirota-consistent comparison function through a brick.

    Facets with exactly three known corners are solved for the fourth until
    nothing is left. Ready facets are taken in lexicographic order, or in a
    random order drawn from `rng`.

    Args:
        w: Known values on lattice points of the brick.
        brick: Target brick.
        directions: Planar image of every axis.
        targets: If given, only the part of the brick below these points is filled.
        rng: Random generator for a random fill order.
        verify: Check residuals and colors of the result.

    Returns:
        The comparison function on the filled region.

    Raises:
        ExtensionError: If a singular face is met or the result fails verification.
        ReachabilityError: If the fill stalls before the region is complete.
    """
    dirs = directions.directions if isinstance(directions, EdgeDirectionSet) else tuple(directions)
    region = set(brick.vertices()) if targets is None else _down_set(targets, brick.lower)
    known = {v: complex(x) for v, x in w.values.items() if v in region}

    ready: list[tuple[t.Any, Facet]] = []

    def offer(vertex: Coord) -> None:
        for facet in _facets_at(vertex, region):
            if sum(c in known for c in facet.corners()) == 3:  # noqa: PLR2004
                key = rng.random() if rng is not None else facet
                heapq.heappush(ready, (key, facet))

    for v in sorted(known):
        offer(v)
    while ready:
        _, facet = heapq.heappop(ready)
        corners = oriented_corners(facet, dirs)
        missing = [c for c in corners if c not in known]
        if len(missing) != 1:
            continue
        a0, a1 = _face_edges(corners, dirs)
        try:
            value = hirota_solve_face(*(known.get(c) for c in corners), a0, a1)
        except SingularFaceError as exc:
            msg = f"Singular face {facet} during extension: {exc}"
            raise ExtensionError(msg) from exc
        known[missing[0]] = value
        offer(missing[0])

    if len(known) < len(region):
        absent = min(v for v in region if v not in known)
        msg = f"Extension stalled: {len(known)} of {len(region)} points filled, {absent} missing"
        raise ReachabilityError(msg)

    result = ComparisonFunction.on_lattice(known)
    if verify:
        facets = {f for v in region for f in _facets_at(v, region)}
        residual = result.max_residual(facets, dirs)
        deviation = result.color_deviation()
        if residual >= RESIDUAL_TOL or deviation >= COLOR_TOL:
            msg = f"Extension is inconsistent (residual {residual:.2e}, color {deviation:.2e})"
            raise ExtensionError(msg)
        logger.debug(f"Extension verified on {len(facets)} facets (residual {residual:.2e})")
    logger.info(f"Extended comparison function to {len(known)} lattice points")
    return result


def zgamma_axis_values(
    gamma: float,
    directions: EdgeDirectionSet,
    n_max: int,
) -> ComparisonFunction:
    """Semi-axis data of the quasicrystallic Z^gamma on Z^d_+.

    w(0) = 1, w(n e_k) = a_k^(gamma - 1) = exp(i (gamma - 1) theta_k) for odd n and
    prod_{m=1}^{n/2} (m - 1 + gamma/2) / (m - gamma/2) for even n >= 2.

    Raises:
        DomainError: If gamma is outside (0, 2).
    """
    if not 0 < gamma < 2:  # noqa: PLR2004
        msg = f"gamma must lie in (0, 2), got {gamma}"
        raise DomainError(msg)
    d = directions.dimension
    origin = (0,) * d
    values: dict[Coord, complex] = {origin: 1.0 + 0j}
    even = [1.0]
    for m in range(1, n_max // 2 + 1):
        even.append(even[-1] * (m - 1 + gamma / 2) / (m - gamma / 2))
    for k in range(d):
        odd = complex(np.exp(1j * (gamma - 1) * directions.thetas[k]))
        for n in range(1, n_max + 1):
            values[shift(origin, k, n)] = odd if n % 2 else complex(even[n // 2])
    return ComparisonFunction.on_lattice(values)


def comparison_function(reference: CirclePattern, pattern: CirclePattern) -> ComparisonFunction:
    """Comparison function of a pattern against an isoradial reference.

    Raises:
        InputError: If the combinatorics differ or the reference is not isoradial.
    """
    if reference.graph.faces != pattern.graph.faces:
        msg = "Patterns have different combinatorics"
        raise InputError(msg)
    labels = reference.labelling
    if any(abs(labels[f] - pattern.labelling[f]) > UNIT_TOL for f in labels):
        msg = "Patterns have different labellings"
        raise InputError(msg)
    radii = list(reference.radii.values())
    if max(radii) - min(radii) > UNIT_TOL * max(radii):
        msg = "Reference pattern is not isoradial"
        raise InputError(msg)

    graph = pattern.graph
    values: dict[VertexId, complex] = {
        v: complex(pattern.radii[v] / reference.radii[v]) for v in graph.white
    }
    ref_points, points = reference.points, pattern.points
    for face in graph.faces:
        x = face[0]
        for y in (face[1], face[3]):
            if y not in values:
                ratio = (points[y] - points[x]) / (ref_points[y] - ref_points[x])
                values[y] = ratio / values[x]
    return ComparisonFunction(values, frozenset(graph.white))


def pattern_from_comparison(
    graph: BQuadGraph,
    positions: Mapping[VertexId, complex],
    w: Mapping[VertexId, complex],
    origin: VertexId,
    origin_point: complex = 0j,
) -> CirclePattern:
    """Integrate P(y) - C(x) = w(x) w(y) (y - x) over the edges of a rhombic embedding.

    Args:
        graph: The b-quad-graph of the embedding.
        positions: Rhombic positions.
        w: Comparison values of all vertices.
        origin: Vertex placed at `origin_point`.
        origin_point: Image of the origin vertex.

    Returns:
        The circle pattern.

    Raises:
        InconsistencyError: If two paths reach a vertex at different points.
    """
    neighbors: dict[VertexId, set[VertexId]] = {}
    for a, b in graph.edge_faces:
        neighbors.setdefault(a, set()).add(b)
        neighbors.setdefault(b, set()).add(a)

    points = {origin: complex(origin_point)}
    queue = deque([origin])
    while queue:
        v = queue.popleft()
        for u in sorted(neighbors[v]):
            x, y = (v, u) if v in graph.white else (u, v)
            step = w[x] * w[y] * (positions[y] - positions[x])
            candidate = points[v] + step if v == x else points[v] - step
            known = points.get(u)
            if known is None:
                points[u] = candidate
                queue.append(u)
            elif abs(known - candidate) > COINCIDENCE_TOL * max(1.0, abs(known)):
                msg = f"Vertex {u} reached at {known} and {candidate}"
                raise InconsistencyError(msg)

    radii = {}
    for x in sorted(graph.white):
        face = graph.faces[graph.vertex_faces[x][0]]
        y = face[(face.index(x) + 1) % 4]
        radii[x] = float(abs(points[y] - points[x]))
    return CirclePattern(
        graph=graph,
        labelling=rhombic_labelling(graph, positions),
        centers={x: points[x] for x in sorted(graph.white)},
        radii=radii,
        kites=tuple(
            Kite(i, tuple(points[v] for v in face))  # type: ignore[arg-type]
            for i, face in enumerate(graph.faces)
        ),
    )


@dataclass(frozen=True)
class QuasiZgamma:
    """Octant part of an embedding with the extended Z^gamma comparison function."""

    gamma: float
    graph: BQuadGraph
    positions: dict[VertexId, complex] = field(repr=False)
    directions: EdgeDirectionSet
    coords: dict[VertexId, Coord] = field(repr=False)
    brick: Brick
    comparison: ComparisonFunction = field(repr=False)

    def values(self) -> dict[VertexId, complex]:
        """Comparison value of every vertex of the octant part."""
        return {v: self.comparison.values[self.coords[v]] for v in self.graph.vertices}

    def pattern(self) -> CirclePattern:
        """Circle pattern with the lattice origin mapped to 0."""
        anchor = min(self.graph.white, key=lambda v: (sum(self.coords[v]), self.coords[v]))
        point = _walk_from_origin(self.coords[anchor], self.comparison, self.directions)
        return pattern_from_comparison(
            self.graph, self.positions, self.values(), anchor, origin_point=point
        )


def _walk_from_origin(
    target: Coord,
    w: ComparisonFunction,
    directions: EdgeDirectionSet,
) -> complex:
    """Image of a lattice point along a monotone path from the origin."""
    current = (0,) * len(target)
    point = 0j
    for k, steps in enumerate(target):
        for _ in range(steps):
            nxt = shift(current, k)
            x, y = (current, nxt) if is_white(current) else (nxt, current)
            point += w.values[x] * w.values[y] * directions.directions[k]
            current = nxt
    return point


def zgamma_extension(
    embedding: LiftedEmbedding,
    gamma: float,
    theta1: float | None = None,
    origin: VertexId | None = None,
    *,
    clip: bool = True,
    rng: np.random.Generator | None = None,
) -> QuasiZgamma:
    """Z^gamma comparison function on the octant part of an embedding.

    The embedding is lifted with `origin` (default: its seed) at the lattice
    origin, the axes are re-signed and ordered circularly, and the faces inside
    Z^d_+ are kept (largest connected part). Semi-axis data are extended through
    the part of the octant brick below the kept vertices.

    Raises:
        OctantError: If no face lies in the octant, or `clip` is False and some do not.
    """
    directions = assign_arguments(embedding.directions, theta1)
    seed = embedding.seed if origin is None else origin
    lifted = lift_coordinates(embedding.graph, embedding.positions, embedding.directions, seed)
    coords = {v: directions.to_oriented(c) for v, c in lifted.items()}

    graph = embedding.graph
    inside = [i for i, face in enumerate(graph.faces) if all(min(coords[v]) >= 0 for v in face)]
    if not inside:
        msg = "No face of the embedding lies in the octant of the seed"
        raise OctantError(msg)
    if not clip and len(inside) != len(graph.faces):
        msg = f"{len(graph.faces) - len(inside)} faces leave the octant; translate or clip"
        raise OctantError(msg)
    part = graph.subgraph(inside)
    components = part.face_components()
    if len(components) > 1:
        part = part.subgraph(components[0])
    logger.info(f"Octant part keeps {len(part.faces)} of {len(graph.faces)} faces")

    targets = [coords[v] for v in part.vertices]
    upper = tuple(max(c[k] for c in targets) for k in range(directions.dimension))
    brick = Brick((0,) * directions.dimension, upper)
    axis = zgamma_axis_values(gamma, directions, max(upper))
    seeds = ComparisonFunction.on_lattice({v: x for v, x in axis.values.items() if v in brick})
    comparison = extend_to_brick(seeds, brick, directions, targets=targets, rng=rng)
    return QuasiZgamma(
        gamma=gamma,
        graph=part,
        positions={v: embedding.positions[v] for v in part.vertices},
        directions=directions,
        coords={v: coords[v] for v in part.vertices},
        brick=brick,
        comparison=comparison,
    )


def zgamma_pattern(
    embedding: LiftedEmbedding,
    gamma: float,
    theta1: float | None = None,
    origin: VertexId | None = None,
    *,
    clip: bool = True,
    rng: np.random.Generator | None = None,
) -> CirclePattern:
    """Quasicrystallic Z^gamma circle pattern on the octant part of an embedding."""
    return zgamma_extension(embedding, gamma, theta1, origin, clip=clip, rng=rng).pattern()


def convexity_window(psi: float) -> tuple[float, float]:
    """Range of gamma with convex Z^gamma kites for the smallest angle psi.

    Returns:
        (0, 2) for psi >= pi/2, otherwise [(pi - 2 psi)/(pi - psi), pi/(pi - psi)]
        intersected with (0, 2).
    """
    if not 0 < psi < math.pi:
        msg = f"psi must lie in (0, pi), got {psi}"
        raise DomainError(msg)
    if psi >= math.pi / 2:
        return (0.0, 2.0)
    return (max(0.0, (math.pi - 2 * psi) / (math.pi - psi)), min(2.0, math.pi / (math.pi - psi)))


def closing_exponents(folds: int, p_max: int) -> list[float]:
    """Exponents gamma = folds / p (p >= 3) whose sector patterns close up by symmetry."""
    return [folds / p for p in range(3, p_max + 1) if 0 < folds / p < 2]  # noqa: PLR2004
