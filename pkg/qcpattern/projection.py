"""Quasicrystallic rhombic embeddings from a 2-plane in R^d.

A lattice point p of the scaled lattice c_1 Z x ... x c_d Z is a vertex when its
Voronoi box meets the plane E. In plane coordinates X the box condition reads
``n_j - 1/2 <= s_j(X) <= n_j + 1/2`` with ``s_j(X) = (t_j + X . (u1_j, u2_j)) / c_j``,
so the tiling is the dual of the multigrid of lines ``s_j = k + 1/2``: every
crossing of two lines is one rhombus.
"""

from __future__ import annotations

import itertools
import logging
import math
import typing as t
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from qcpattern.core import BQuadGraph, CirclePattern, Labelling, rhombic_labelling, rhombic_pattern
from qcpattern.exceptions import DegeneracyError, DomainError, PlaneError, UnsupportedSymmetryError
from qcpattern.lattice import Coord, Facet, facet_from_corners, is_white, oriented_corners

if t.TYPE_CHECKING:
    import numpy.typing as npt

logger = logging.getLogger(__name__)

ORTHONORMAL_TOL = 1e-12
DEGENERACY_TOL = 1e-9
EXACT_TOL = 1e-12


@dataclass(frozen=True)
class PlaneSpec:
    """Affine 2-plane E = t + span(u1, u2) in R^d."""

    u1: tuple[float, ...]
    u2: tuple[float, ...]
    t: tuple[float, ...]

    def __post_init__(self) -> None:
        """Check dimensions and orthonormality.

        Raises:
            PlaneError: If the vectors are inconsistent or not orthonormal.
        """
        d = len(self.u1)
        if d < 2 or len(self.u2) != d or len(self.t) != d:  # noqa: PLR2004
            sizes = (len(self.u1), len(self.u2), len(self.t))
            msg = f"Plane vectors need a common dimension >= 2, got {sizes}"
            raise PlaneError(msg)
        u1, u2 = np.asarray(self.u1), np.asarray(self.u2)
        gram = [u1 @ u1 - 1.0, u2 @ u2 - 1.0, u1 @ u2]
        if max(abs(g) for g in gram) > ORTHONORMAL_TOL:
            msg = f"Spanning vectors are not orthonormal (Gram deviation {max(map(abs, gram)):.2e})"
            raise PlaneError(msg)

    @property
    def dimension(self) -> int:
        """Ambient dimension d."""
        return len(self.u1)

    @property
    def basis(self) -> npt.NDArray[np.float64]:
        """(d, 2) array with columns u1, u2."""
        return np.stack([np.asarray(self.u1), np.asarray(self.u2)], axis=1)

    @property
    def center(self) -> complex:
        """Projection of t into plane coordinates."""
        b = self.basis
        tv = np.asarray(self.t)
        return complex(tv @ b[:, 0], tv @ b[:, 1])


def projection_scales(plane: PlaneSpec) -> npt.NDArray[np.float64]:
    """Scales c_j making the projected scaled basis vectors unit length.

    Returns:
        Array of c_j = 1 / |P_E(e_j)|.

    Raises:
        PlaneError: If an axis projects (almost) to zero, the plane contains a
            single coordinate direction, or two axes project parallel.
    """
    basis = plane.basis
    norms = np.hypot(basis[:, 0], basis[:, 1])
    for j, norm in enumerate(norms):
        if norm <= DEGENERACY_TOL:
            msg = f"Axis {j} projects degenerately onto the plane (|P e_{j}| = {norm:.2e})"
            raise PlaneError(msg)
    contained = [j for j, norm in enumerate(norms) if abs(norm - 1.0) <= ORTHONORMAL_TOL]
    if plane.dimension > 2 and contained:  # noqa: PLR2004
        msg = f"Plane contains the coordinate direction(s) {contained}"
        raise PlaneError(msg)
    directions = (basis[:, 0] + 1j * basis[:, 1]) / norms
    for j, l in itertools.combinations(range(plane.dimension), 2):
        if abs((directions[j].conjugate() * directions[l]).imag) <= DEGENERACY_TOL:
            msg = f"Facet ({j}, {l}) projects degenerately"
            raise PlaneError(msg)
    return 1.0 / norms


def symmetric_plane(folds: int, offset: float | t.Sequence[float] = 0.0) -> PlaneSpec:
    """Rotation invariant plane of the cyclic coordinate shift of R^n.

    Args:
        folds: Odd n >= 5.
        offset: Translation, a scalar meaning offset * (1, ..., 1).

    Returns:
        The plane; its projected axes are the n-th roots of unity.

    Raises:
        UnsupportedSymmetryError: If n is even or below 5.
        PlaneError: If the offset has the wrong length.
    """
    if folds < 5 or folds % 2 == 0:  # noqa: PLR2004
        msg = f"Symmetric planes need an odd fold number >= 5, got {folds}"
        raise UnsupportedSymmetryError(msg)
    k = np.arange(folds)
    norm = math.sqrt(2.0 / folds)
    u1 = norm * np.cos(2 * np.pi * k / folds)
    u2 = norm * np.sin(2 * np.pi * k / folds)
    translation = np.asarray(offset, dtype=float)
    if translation.ndim == 0:
        translation = np.full(folds, float(translation))
    if translation.shape != (folds,):
        msg = f"Offset must have {folds} entries, got {translation.shape}"
        raise PlaneError(msg)
    return PlaneSpec(tuple(u1.tolist()), tuple(u2.tolist()), tuple(translation.tolist()))


def coordinate_plane(offset: t.Sequence[float] = (0.0, 0.0)) -> PlaneSpec:
    """The plane R^2 itself; it yields the square grid."""
    return PlaneSpec((1.0, 0.0), (0.0, 1.0), (float(offset[0]), float(offset[1])))


@dataclass(frozen=True)
class LiftedEmbedding:
    """Rhombic embedding whose vertices carry their Z^d coordinates."""

    graph: BQuadGraph
    positions: dict[Coord, complex] = field(repr=False)
    directions: tuple[complex, ...]
    scales: tuple[float, ...]
    window: float
    center: complex = 0j
    plane: PlaneSpec | None = None

    @property
    def dimension(self) -> int:
        """Number of axes d."""
        return len(self.directions)

    def lattice_point(self, vertex: Coord) -> tuple[float, ...]:
        """Vertex as a point of the scaled lattice."""
        return tuple(c * n for c, n in zip(self.scales, vertex, strict=True))

    @cached_property
    def seed(self) -> Coord:
        """White vertex nearest the window center (ties broken lexicographically)."""
        return min(
            (v for v in self.graph.white),
            key=lambda v: (round(abs(self.positions[v] - self.center), 9), v),
        )

    @cached_property
    def facets(self) -> tuple[Facet, ...]:
        """Lattice facet of every face."""
        facets = []
        for face in self.graph.faces:
            facet = facet_from_corners(face)
            if facet is None:
                msg = f"Face {face} is not a unit facet"
                raise PlaneError(msg)
            facets.append(facet)
        return tuple(facets)

    @cached_property
    def labelling(self) -> Labelling:
        """Rhombus angles at the black corners."""
        return rhombic_labelling(self.graph, self.positions)

    @cached_property
    def minimum_rhombus_area(self) -> float:
        """Smallest rhombus area; all rhombi have unit edges."""
        return min(
            abs((self.directions[f.j].conjugate() * self.directions[f.l]).imag)
            for f in set(self.facets)
        )

    def isoradial_pattern(self) -> CirclePattern:
        """Unit circles at white vertices with the rhombi as kites."""
        return rhombic_pattern(self.graph, self.positions)


def _split_point(
    point: npt.NDArray[np.float64],
    concurrent: list[int],
    lines: dict[int, int],
    mesh: npt.NDArray[np.int64],
    grads: npt.NDArray[np.float64],
    scales: npt.NDArray[np.float64],
    plane: PlaneSpec,
) -> list[Facet]:
    """Quadrangulate the 2k-gon dual to a point where k >= 3 grid lines meet.

    The hypercuboid corner around the point that no mesh selects and that is
    nearest to E is adjoined by pushing E towards it. The k lines then cross
    pairwise, and every crossing is one of the k(k - 1)/2 rhombi tiling the 2k-gon.
    For k = 3 the corner is joined to the hexagon by three facets.

    Raises:
        DegeneracyError: If the pushed lines still meet three at a time.
    """
    critical = []
    for i in concurrent:
        normal = math.atan2(grads[i, 1], grads[i, 0])
        critical += [(normal + math.pi / 2) % (2 * math.pi), (normal - math.pi / 2) % (2 * math.pi)]
    critical.sort()
    gaps = [*critical[1:], critical[0] + 2 * math.pi]
    achieved = set()
    for a, b in zip(critical, gaps, strict=True):
        mid = (a + b) / 2
        step = np.array([math.cos(mid), math.sin(mid)])
        achieved.add(tuple(int(grads[i] @ step > 0) for i in concurrent))

    basis = plane.basis
    tv = np.asarray(plane.t)
    candidates = []
    for corner in itertools.product((0, 1), repeat=len(concurrent)):
        if corner in achieved:
            continue
        n = mesh.copy()
        for i, up in zip(concurrent, corner, strict=True):
            n[i] = lines[i] + up
        q = scales * n - tv
        off_plane = float(q @ q - (q @ basis[:, 0]) ** 2 - (q @ basis[:, 1]) ** 2)
        candidates.append((round(math.sqrt(max(off_plane, 0.0)), 12), tuple(n.tolist())))
    _, chosen = min(candidates)
    logger.debug(
        f"Split degree-{2 * len(concurrent)} face at {point.tolist()} through corner {chosen}"
    )

    # Pushed lines in local coordinates W: g_i . W = -sigma_i / 2, the corner's cell holds W = 0.
    g = grads[concurrent]
    sigma = np.array([2 * (chosen[i] - lines[i]) - 1 for i in concurrent], dtype=float)
    facets = []
    for a, b in itertools.combinations(range(len(concurrent)), 2):
        crossing = np.linalg.solve(g[[a, b]], -sigma[[a, b]] / 2)
        side = g @ crossing + sigma / 2
        others = np.delete(side, [a, b])
        if np.any(np.abs(others) < DEGENERACY_TOL):
            msg = f"Grid lines through {point.tolist()} stay concurrent after the split"
            raise DegeneracyError(msg)
        base = list(chosen)
        for m, i in enumerate(concurrent):
            base[i] = lines[i] + int(side[m] > 0)
        j, l = concurrent[a], concurrent[b]
        base[j], base[l] = lines[j], lines[l]
        facets.append(Facet(tuple(base), j, l))
    return facets


def generate_embedding(plane: PlaneSpec, window: float) -> LiftedEmbedding:
    """Rhombic embedding of the plane, clipped to a disk.

    Args:
        plane: The plane E.
        window: Disk radius rho > 2 around the projection of t; a face is kept when
            all four of its vertices lie inside.

    Returns:
        The largest edge-connected patch of kept faces.

    Raises:
        DomainError: If the window is too small.
        DegeneracyError: If E passes within 1e-9 of a lower dimensional cell
            without hitting it exactly.
    """
    if window <= 2:  # noqa: PLR2004
        msg = f"Window radius must exceed 2, got {window}"
        raise DomainError(msg)
    scales = projection_scales(plane)
    d = plane.dimension
    basis = plane.basis
    grads = basis / scales[:, None]
    offsets = np.asarray(plane.t) / scales
    directions = scales * (basis[:, 0] + 1j * basis[:, 1])
    center = plane.center
    reach = window + d / 2 + 1

    lines = []
    for j in range(d):
        spread = float(np.hypot(*grads[j])) * reach
        lo = math.ceil(offsets[j] - spread - 0.5)
        hi = math.floor(offsets[j] + spread - 0.5)
        lines.append(np.arange(lo, hi + 1))

    facets: set[Facet] = set()
    split_seen: set[tuple[tuple[int, int], ...]] = set()
    for j, l in itertools.combinations(range(d), 2):
        kj, kl = (g.ravel() for g in np.meshgrid(lines[j], lines[l], indexing="ij"))
        rhs = np.stack([kj + 0.5 - offsets[j], kl + 0.5 - offsets[l]])
        points = np.linalg.solve(grads[[j, l]], rhs).T
        inside = np.hypot(points[:, 0], points[:, 1]) <= reach
        points, kj, kl = points[inside], kj[inside], kl[inside]

        s = offsets + points @ grads.T
        meshes = np.floor(s + 0.5).astype(np.int64)
        meshes[:, j], meshes[:, l] = kj, kl
        frac = np.abs((s - 0.5) - np.rint(s - 0.5))
        frac[:, [j, l]] = 1.0
        near = frac < DEGENERACY_TOL
        exact = frac < EXACT_TOL
        if np.any(near & ~exact):
            row = int(np.nonzero(np.any(near & ~exact, axis=1))[0][0])
            msg = (
                f"Plane passes within {DEGENERACY_TOL:g} of a multiple crossing near "
                f"{points[row].tolist()}; perturb the offset t"
            )
            raise DegeneracyError(msg)

        simple = ~np.any(exact, axis=1)
        facets.update(Facet(tuple(n), j, l) for n in meshes[simple].tolist())

        for row in np.nonzero(~simple)[0]:
            concurrent = sorted([j, l, *np.nonzero(exact[row])[0].tolist()])
            crossing = {i: int(np.rint(s[row, i] - 0.5)) for i in concurrent}
            key = tuple(sorted(crossing.items()))
            if key in split_seen:
                continue
            split_seen.add(key)
            facets.update(
                _split_point(points[row], concurrent, crossing, meshes[row], grads, scales, plane)
            )

    ordered = sorted(facets)
    corners = [oriented_corners(f, directions.tolist()) for f in ordered]
    vertex_ids = sorted({v for face in corners for v in face})
    coords = np.array(vertex_ids, dtype=float)
    placed = coords @ directions
    positions = dict(zip(vertex_ids, placed.tolist(), strict=True))
    kept = [face for face in corners if all(abs(positions[v] - center) < window for v in face)]
    logger.info(f"Multigrid produced {len(ordered)} facets, {len(kept)} inside the window")

    white = frozenset(v for face in kept for v in face if is_white(v))
    graph = BQuadGraph(tuple(kept), white)
    components = graph.face_components()
    if len(components) > 1:
        logger.info(f"Keeping the largest of {len(components)} face components")
        graph = graph.subgraph(components[0])
    return LiftedEmbedding(
        graph=graph,
        positions={v: positions[v] for v in graph.vertices},
        directions=tuple(complex(a) for a in directions),
        scales=tuple(float(c) for c in scales),
        window=float(window),
        center=center,
        plane=plane,
    )
