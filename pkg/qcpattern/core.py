"""B-quad-graphs, labellings, the angle function and circle pattern layout."""

from __future__ import annotations

import logging
import typing as t
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import shapely
from scipy.spatial import KDTree

from qcpattern.exceptions import (
    DomainError,
    GraphError,
    InputError,
    LabellingError,
    LayoutError,
    NonClosingError,
)

if t.TYPE_CHECKING:
    from collections.abc import Iterable, Mapping, Sequence

    import numpy.typing as npt

logger = logging.getLogger(__name__)

VertexId = tuple[int, ...]
Face = tuple[VertexId, VertexId, VertexId, VertexId]
Labelling = dict[int, float]
RadiusFunction = dict[VertexId, float]

ADMISSIBLE_TOL = 1e-12
CLOSING_TOL = 1e-9
IMMERSION_TOL = 1e-8
COINCIDENCE_TOL = 1e-8
OVERLAP_SLACK = 1e-10

CHECKS = ("immersed", "embedded", "convex", "closing")


def edge_key(a: VertexId, b: VertexId) -> tuple[VertexId, VertexId]:
    """Undirected edge key."""
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class BQuadGraph:
    """Bipartite quadrilateral cell complex.

    Faces list their corners counter-clockwise as (white, black, white, black).
    Vertices not listed in `white` are black.
    """

    faces: tuple[Face, ...]
    white: frozenset[VertexId]

    def __post_init__(self) -> None:
        """Validate the combinatorial invariants.

        Raises:
            GraphError: If a face is malformed or an edge borders too many faces.
        """
        directed: set[tuple[VertexId, VertexId]] = set()
        for index, face in enumerate(self.faces):
            if len(face) != 4 or len(set(face)) != 4:  # noqa: PLR2004
                msg = f"Face {index} must have 4 distinct vertices, got {face}"
                raise GraphError(msg)
            colors = [v in self.white for v in face]
            if colors != [True, False, True, False]:
                msg = f"Face {index} must alternate white/black starting white, got {face}"
                raise GraphError(msg)
            for i in range(4):
                edge = (face[i], face[(i + 1) % 4])
                if edge in directed:
                    msg = f"Edge {edge} is used twice with the same orientation (face {index})"
                    raise GraphError(msg)
                directed.add(edge)

    @cached_property
    def vertices(self) -> tuple[VertexId, ...]:
        """All vertices in sorted order."""
        return tuple(sorted({v for face in self.faces for v in face}))

    @cached_property
    def vertex_faces(self) -> dict[VertexId, list[int]]:
        """Incident face indices per vertex."""
        incident: dict[VertexId, list[int]] = {}
        for index, face in enumerate(self.faces):
            for v in face:
                incident.setdefault(v, []).append(index)
        return incident

    @cached_property
    def edge_faces(self) -> dict[tuple[VertexId, VertexId], list[int]]:
        """Incident face indices per undirected edge."""
        incident: dict[tuple[VertexId, VertexId], list[int]] = {}
        for index, face in enumerate(self.faces):
            for i in range(4):
                incident.setdefault(edge_key(face[i], face[(i + 1) % 4]), []).append(index)
        return incident

    @cached_property
    def _directed_faces(self) -> dict[tuple[VertexId, VertexId], int]:
        return {
            (face[i], face[(i + 1) % 4]): index
            for index, face in enumerate(self.faces)
            for i in range(4)
        }

    def face_cycle(self, vertex: VertexId) -> list[int] | None:
        """Faces around an interior vertex in counter-clockwise order.

        Returns:
            The closed face cycle, or None if the vertex is on the boundary.
        """
        incident = self.vertex_faces.get(vertex, [])
        if not incident:
            return None
        start = incident[0]
        cycle = [start]
        current = start
        while True:
            face = self.faces[current]
            i = face.index(vertex)
            nxt = self._directed_faces.get((vertex, face[(i - 1) % 4]))
            if nxt is None:
                return None
            if nxt == start:
                break
            cycle.append(nxt)
            current = nxt
            if len(cycle) > len(incident):
                return None
        return cycle if len(cycle) == len(incident) else None

    @cached_property
    def interior_vertices(self) -> frozenset[VertexId]:
        """Vertices with a single closed face cycle."""
        return frozenset(v for v in self.vertex_faces if self.face_cycle(v) is not None)

    @cached_property
    def boundary_vertices(self) -> frozenset[VertexId]:
        """Vertices that are not interior."""
        return frozenset(self.vertex_faces) - self.interior_vertices

    @cached_property
    def white_neighbors(self) -> dict[VertexId, list[tuple[VertexId, int]]]:
        """Per white vertex the opposite white vertex of every incident face."""
        neighbors: dict[VertexId, list[tuple[VertexId, int]]] = {}
        for index, (w1, _, w2, _) in enumerate(self.faces):
            neighbors.setdefault(w1, []).append((w2, index))
            neighbors.setdefault(w2, []).append((w1, index))
        return neighbors

    @cached_property
    def euler_characteristic(self) -> int:
        """V - E + F."""
        return len(self.vertex_faces) - len(self.edge_faces) + len(self.faces)

    def face_components(self) -> list[list[int]]:
        """Edge-connected components of faces, largest first."""
        seen: set[int] = set()
        components: list[list[int]] = []
        for start in range(len(self.faces)):
            if start in seen:
                continue
            seen.add(start)
            component = [start]
            queue = deque([start])
            while queue:
                face = self.faces[queue.popleft()]
                for i in range(4):
                    for other in self.edge_faces[edge_key(face[i], face[(i + 1) % 4])]:
                        if other not in seen:
                            seen.add(other)
                            component.append(other)
                            queue.append(other)
            components.append(sorted(component))
        components.sort(key=lambda c: (-len(c), c[0]))
        return components

    def subgraph(self, face_indices: Iterable[int]) -> BQuadGraph:
        """Graph on a subset of faces (kept in their original relative order)."""
        faces = tuple(self.faces[i] for i in sorted(face_indices))
        used = {v for face in faces for v in face}
        return BQuadGraph(faces, frozenset(self.white & used))


def angle_function(
    x: float | npt.ArrayLike,
    theta: float | npt.ArrayLike,
    order: int = 0,
) -> t.Any:
    """Evaluate f_theta(x) or its derivative.

    f_theta(x) is the half kite angle at a circle center for the log radius ratio x
    of the neighbouring circle, f_theta(x) = -arg(1 - exp(x + i theta)).

    Args:
        x: Log radius ratio (scalar or array).
        theta: Intersection angle in (0, pi) (scalar or array).
        order: 0 for the function, 1 for its derivative.

    Returns:
        A float for scalar input, an array otherwise.

    Raises:
        DomainError: If theta leaves (0, pi), x is not finite or order is not 0 or 1.
    """
    xs = np.asarray(x, dtype=float)
    thetas = np.asarray(theta, dtype=float)
    if np.any((thetas <= 0) | (thetas >= np.pi)):
        msg = "theta must lie in (0, pi)"
        raise DomainError(msg)
    if not np.all(np.isfinite(xs)):
        msg = "x must be finite"
        raise DomainError(msg)
    if order == 1:
        with np.errstate(over="ignore"):
            out = np.sin(thetas) / (2.0 * (np.cosh(xs) - np.cos(thetas)))
    elif order == 0:
        # e^x overflows for large x; use f(x) = pi - theta - f(-x) there
        base = -np.angle(1.0 - np.exp(-np.abs(xs) + 1j * thetas))
        out = np.where(xs > 0, np.pi - thetas - base, base)
    else:
        msg = f"order must be 0 or 1, got {order}"
        raise DomainError(msg)
    if out.ndim == 0:
        return float(out)
    return out


def closing_residual(
    center_radius: float,
    neighbor_radii: Sequence[float],
    angles: Sequence[float],
) -> float:
    """Closing residual of the kite chain around one white vertex.

    Returns:
        sum_j f_{alpha_j}(log r_j - log r_0) - pi.

    Raises:
        InputError: If the star has fewer than three neighbours or the lengths differ.
        DomainError: If a radius is not positive.
    """
    if len(neighbor_radii) != len(angles):
        msg = f"{len(neighbor_radii)} radii but {len(angles)} angles"
        raise InputError(msg)
    if len(neighbor_radii) < 3:  # noqa: PLR2004
        msg = "A closed star needs at least three neighbours"
        raise InputError(msg)
    radii = np.asarray(neighbor_radii, dtype=float)
    if center_radius <= 0 or np.any(radii <= 0):
        msg = "Radii must be positive"
        raise DomainError(msg)
    x = np.log(radii) - np.log(center_radius)
    return float(np.sum(angle_function(x, np.asarray(angles, dtype=float))) - np.pi)


def check_admissible(graph: BQuadGraph, labelling: Mapping[int, float]) -> list[Violation]:
    """Interior black vertices whose incident angles do not sum to 2 pi.

    Raises:
        LabellingError: If a face has no label.
    """
    missing = [i for i in range(len(graph.faces)) if i not in labelling]
    if missing:
        msg = f"Labelling misses {len(missing)} faces, first {missing[0]}"
        raise LabellingError(msg)
    violations = []
    for v in sorted(graph.interior_vertices - graph.white):
        deviation = sum(labelling[i] for i in graph.vertex_faces[v]) - 2 * np.pi
        if abs(deviation) > ADMISSIBLE_TOL:
            violations.append(Violation("admissible", v, float(deviation)))
    return violations


def invert_radii(radii: Mapping[VertexId, float]) -> RadiusFunction:
    """Radius function 1/r, which again satisfies the closing condition.

    Raises:
        DomainError: If a radius is not positive.
    """
    if any(r <= 0 for r in radii.values()):
        msg = "Radii must be positive"
        raise DomainError(msg)
    return {v: 1.0 / r for v, r in radii.items()}


def star_residuals(
    graph: BQuadGraph,
    labelling: Mapping[int, float],
    radii: Mapping[VertexId, float],
    vertices: Iterable[VertexId] | None = None,
) -> dict[VertexId, float]:
    """Closing residuals at interior white vertices (all of them by default)."""
    targets = sorted(graph.interior_vertices & graph.white) if vertices is None else vertices
    residuals = {}
    for v in targets:
        star = graph.white_neighbors[v]
        residuals[v] = closing_residual(
            radii[v], [radii[w] for w, _ in star], [labelling[f] for _, f in star]
        )
    return residuals


@dataclass(frozen=True)
class Violation:
    """One finding of a pattern check."""

    check: str
    subject: t.Any
    amount: float


@dataclass(frozen=True)
class PatternReport:
    """Result of `check_pattern`."""

    checks: tuple[str, ...]
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        """True when no check found anything."""
        return not self.violations

    def by_check(self, check: str) -> list[Violation]:
        """Violations of one check."""
        return [v for v in self.violations if v.check == check]

    def to_dict(self) -> dict[str, t.Any]:
        """JSON friendly form."""
        return {
            "checks": list(self.checks),
            "ok": self.ok,
            "violations": [
                {"check": v.check, "subject": _jsonable(v.subject), "amount": v.amount}
                for v in self.violations
            ],
        }


def _jsonable(value: t.Any) -> t.Any:
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    return value


@dataclass(frozen=True)
class Kite:
    """Kite (white center, black point, white center, black point) of one face."""

    face: int
    points: tuple[complex, complex, complex, complex]

    @cached_property
    def polygon(self) -> shapely.Polygon:
        """Shapely polygon of the kite."""
        return shapely.Polygon([(p.real, p.imag) for p in self.points])

    def angle_at(self, index: int) -> float:
        """Interior angle at one corner (counter-clockwise orientation)."""
        p = self.points[index]
        prev, nxt = self.points[(index - 1) % 4], self.points[(index + 1) % 4]
        return float(np.angle((prev - p) / (nxt - p)) % (2 * np.pi))

    def is_convex(self, tol: float = 1e-12) -> bool:
        """All turns are left turns."""
        pts = self.points
        for i in range(4):
            e1 = pts[(i + 1) % 4] - pts[i]
            e2 = pts[(i + 2) % 4] - pts[(i + 1) % 4]
            if (e1.conjugate() * e2).imag <= tol * abs(e1) * abs(e2):
                return False
        return True

    def translated(self, delta: complex) -> Kite:
        """Copy moved by `delta`."""
        return Kite(self.face, tuple(p + delta for p in self.points))  # type: ignore[arg-type]


@dataclass(frozen=True)
class CirclePattern:
    """Circles at white vertices together with one kite per face."""

    graph: BQuadGraph
    labelling: dict[int, float]
    centers: dict[VertexId, complex]
    radii: dict[VertexId, float]
    kites: tuple[Kite, ...] = field(repr=False)

    @cached_property
    def points(self) -> dict[VertexId, complex]:
        """Position of every vertex (first kite wins)."""
        positions: dict[VertexId, complex] = {}
        for kite in self.kites:
            for v, p in zip(self.graph.faces[kite.face], kite.points, strict=True):
                positions.setdefault(v, p)
        return positions

    def replace_kite(self, kite: Kite) -> CirclePattern:
        """Copy with one kite exchanged."""
        kites = tuple(kite if k.face == kite.face else k for k in self.kites)
        return CirclePattern(self.graph, self.labelling, self.centers, self.radii, kites)


@dataclass(frozen=True)
class LayoutSeed:
    """Placement of the first kite: its white vertex, center and direction.

    `direction` points from the seed center towards the other white center of
    the seed face.
    """

    vertex: VertexId
    center: complex = 0j
    direction: complex = 1 + 0j
    face: int | None = None


def rotate_face(face: Face, vertex: VertexId) -> Face:
    """Cyclically rotate a face so that `vertex` comes first."""
    i = face.index(vertex)
    return (*face[i:], *face[:i])  # type: ignore[return-value]


def kite_points(
    center: complex,
    direction: complex,
    r0: float,
    r1: float,
    alpha: float,
) -> tuple[complex, complex, complex, complex]:
    """Kite of two circles from the first center and the direction to the second.

    Returns:
        (center, next black point, other center, previous black point), counter-clockwise.
    """
    distance = np.sqrt(r0 * r0 + r1 * r1 - 2.0 * r0 * r1 * np.cos(alpha))
    half = angle_function(np.log(r1) - np.log(r0), alpha)
    u = direction / abs(direction)
    return (
        center,
        center + r0 * u * np.exp(-1j * half),
        center + distance * u,
        center + r0 * u * np.exp(1j * half),
    )


def check_disk(graph: BQuadGraph) -> None:
    """Require an edge-connected graph with the Euler characteristic of a disk.

    Raises:
        GraphError: If the faces are disconnected or the graph is not a disk.
    """
    if not graph.faces:
        msg = "Graph has no faces"
        raise GraphError(msg)
    components = graph.face_components()
    if len(components) > 1:
        msg = f"Graph is disconnected ({len(components)} face components)"
        raise GraphError(msg)
    if graph.euler_characteristic != 1:
        msg = f"Graph is not simply connected (Euler characteristic {graph.euler_characteristic})"
        raise GraphError(msg)


def layout_pattern(
    graph: BQuadGraph,
    labelling: Mapping[int, float],
    radii: Mapping[VertexId, float],
    seed: LayoutSeed,
) -> CirclePattern:
    """Lay out the circle pattern of a radius function breadth-first from a seed kite.

    Args:
        graph: A simply connected b-quad-graph.
        labelling: Intersection angle per face.
        radii: Radius per white vertex, closing at every interior white vertex.
        seed: Placement of the first kite.

    Returns:
        The immersed circle pattern.

    Raises:
        LabellingError: If a face has no label.
        GraphError: If the graph is not a disk or the seed vertex is invalid.
        NonClosingError: If the radii do not close around some interior vertex.
        LayoutError: If a point is reached twice at different positions.
    """
    missing = [i for i in range(len(graph.faces)) if i not in labelling]
    if missing:
        msg = f"Labelling misses {len(missing)} faces, first {missing[0]}"
        raise LabellingError(msg)
    check_disk(graph)

    residuals = star_residuals(graph, labelling, radii)
    if residuals:
        worst = max(residuals, key=lambda v: abs(residuals[v]))
        if abs(residuals[worst]) >= CLOSING_TOL:
            msg = f"Radii do not close at vertex {worst} (residual {residuals[worst]:.3e})"
            raise NonClosingError(msg)

    if seed.vertex not in graph.white or seed.vertex not in graph.vertex_faces:
        msg = f"Seed {seed.vertex} is not a white vertex of the graph"
        raise GraphError(msg)
    first = min(graph.vertex_faces[seed.vertex]) if seed.face is None else seed.face
    if seed.vertex not in graph.faces[first]:
        msg = f"Seed face {first} does not contain {seed.vertex}"
        raise GraphError(msg)

    positions: dict[VertexId, complex] = {}
    kites: dict[int, Kite] = {}

    def place(index: int, white: VertexId, center: complex, direction: complex) -> None:
        face = graph.faces[index]
        local = rotate_face(face, white)
        pts = kite_points(center, direction, radii[local[0]], radii[local[2]], labelling[index])
        placed = dict(zip(local, pts, strict=True))
        for v, p in placed.items():
            known = positions.get(v)
            if known is None:
                positions[v] = p
            elif abs(known - p) > COINCIDENCE_TOL * max(1.0, abs(known)):
                msg = f"Vertex {v} placed at {known} and {p} (face {index})"
                raise LayoutError(msg)
        kites[index] = Kite(index, tuple(placed[v] for v in face))  # type: ignore[arg-type]

    place(first, seed.vertex, seed.center, seed.direction)
    queue = deque([first])
    while queue:
        face = graph.faces[queue.popleft()]
        for i in range(4):
            a, b = face[i], face[(i + 1) % 4]
            for other in graph.edge_faces[edge_key(a, b)]:
                if other in kites:
                    continue
                white, black = (a, b) if a in graph.white else (b, a)
                local = rotate_face(graph.faces[other], white)
                half = angle_function(
                    np.log(radii[local[2]]) - np.log(radii[white]), labelling[other]
                )
                spoke = (positions[black] - positions[white]) / radii[white]
                turn = np.exp(1j * half) if local[1] == black else np.exp(-1j * half)
                place(other, white, positions[white], spoke * turn)
                queue.append(other)

    logger.debug(f"Laid out {len(kites)} kites from seed {seed.vertex}")
    return CirclePattern(
        graph=graph,
        labelling=dict(labelling),
        centers={v: positions[v] for v in sorted(graph.white)},
        radii={v: float(radii[v]) for v in sorted(graph.white)},
        kites=tuple(kites[i] for i in range(len(graph.faces))),
    )


def rhombic_labelling(
    graph: BQuadGraph,
    positions: Mapping[VertexId, complex],
) -> Labelling:
    """Labelling read off a rhombic embedding: the rhombus angle at the black corners."""
    labelling = {}
    for index, (w1, b1, w2, _) in enumerate(graph.faces):
        p = positions[b1]
        labelling[index] = float(abs(np.angle((positions[w2] - p) / (positions[w1] - p))))
    return labelling


def rhombic_pattern(
    graph: BQuadGraph,
    positions: Mapping[VertexId, complex],
) -> CirclePattern:
    """Isoradial circle pattern whose kites are the rhombi of an embedding."""
    radii = {}
    for v, star in graph.white_neighbors.items():
        face = graph.faces[star[0][1]]
        local = rotate_face(face, v)
        radii[v] = float(abs(positions[local[1]] - positions[v]))
    return CirclePattern(
        graph=graph,
        labelling=rhombic_labelling(graph, positions),
        centers={v: positions[v] for v in sorted(graph.white)},
        radii=dict(sorted(radii.items())),
        kites=tuple(
            Kite(i, tuple(positions[v] for v in face))  # type: ignore[arg-type]
            for i, face in enumerate(graph.faces)
        ),
    )


def _overlap_areas(
    polygons: npt.NDArray[t.Any],
    pairs: npt.NDArray[np.int64],
) -> npt.NDArray[np.float64]:
    if not len(pairs):
        return np.zeros(0)
    return shapely.area(shapely.intersection(polygons[pairs[:, 0]], polygons[pairs[:, 1]]))


def _embedding_violations(pattern: CirclePattern, threads: int) -> list[Violation]:
    polygons = np.array([kite.polygon for kite in pattern.kites], dtype=object)
    if len(polygons) < 2:  # noqa: PLR2004
        return []
    shapely.prepare(polygons)
    centroids = shapely.get_coordinates(shapely.centroid(polygons))
    reach = 4.0 * float(np.max(shapely.minimum_bounding_radius(polygons)))
    pairs = KDTree(centroids).query_pairs(reach, output_type="ndarray")
    logger.debug(f"Embedding check: {len(pairs)} candidate kite pairs")

    if threads > 1 and len(pairs) > threads:
        chunks = np.array_split(pairs, threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            areas = np.concatenate(list(pool.map(lambda c: _overlap_areas(polygons, c), chunks)))
        pairs = np.concatenate(chunks)
    else:
        areas = _overlap_areas(polygons, pairs)

    own = shapely.area(polygons)
    threshold = OVERLAP_SLACK * np.minimum(own[pairs[:, 0]], own[pairs[:, 1]])
    hits = np.nonzero(areas > threshold)[0]
    return [
        Violation(
            "embedded",
            (min(int(pairs[k, 0]), int(pairs[k, 1])), max(int(pairs[k, 0]), int(pairs[k, 1]))),
            float(areas[k]),
        )
        for k in hits
    ]


def _immersion_violations(pattern: CirclePattern) -> list[Violation]:
    graph = pattern.graph
    violations = []
    seen: dict[VertexId, complex] = {}
    mismatch: dict[VertexId, float] = {}
    for kite in pattern.kites:
        for v, p in zip(graph.faces[kite.face], kite.points, strict=True):
            known = seen.setdefault(v, p)
            gap = abs(known - p)
            if gap > COINCIDENCE_TOL * max(1.0, abs(known)):
                mismatch[v] = max(mismatch.get(v, 0.0), gap)
    violations.extend(Violation("immersed", v, d) for v, d in mismatch.items())

    kites = {kite.face: kite for kite in pattern.kites}
    for v in sorted(graph.interior_vertices & graph.white):
        total = sum(
            kites[f].angle_at(graph.faces[f].index(v)) for f in graph.vertex_faces[v]
        )
        if abs(total - 2 * np.pi) > IMMERSION_TOL:
            violations.append(Violation("immersed", v, float(total - 2 * np.pi)))
    return violations


def check_pattern(
    pattern: CirclePattern,
    checks: Iterable[str] = ("immersed", "embedded", "convex"),
    threads: int = 1,
) -> PatternReport:
    """Run validity checks on a laid out pattern.

    Args:
        pattern: The pattern.
        checks: Any of immersed, embedded, convex, closing.
        threads: Worker threads for the embedding narrow phase.

    Returns:
        A report listing every violation, sorted.

    Raises:
        InputError: If an unknown check is requested.
    """
    selected = tuple(dict.fromkeys(checks))
    unknown = [c for c in selected if c not in CHECKS]
    if unknown:
        msg = f"Unknown checks {unknown}; choose from {CHECKS}"
        raise InputError(msg)

    violations: list[Violation] = []
    if "immersed" in selected:
        violations.extend(_immersion_violations(pattern))
    if "embedded" in selected:
        violations.extend(_embedding_violations(pattern, threads))
    if "convex" in selected:
        violations.extend(
            Violation("convex", kite.face, 0.0) for kite in pattern.kites if not kite.is_convex()
        )
    if "closing" in selected:
        residuals = star_residuals(pattern.graph, pattern.labelling, pattern.radii)
        violations.extend(
            Violation("closing", v, r) for v, r in residuals.items() if abs(r) >= CLOSING_TOL
        )

    violations.sort(key=lambda v: (v.check, v.subject))
    if violations:
        logger.info(f"Pattern checks {selected} found {len(violations)} violations")
    return PatternReport(selected, tuple(violations))
