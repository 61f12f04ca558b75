"""Square-grid discrete Z^gamma maps and their circle patterns.

The map is indexed by (n, m) in Z^2_+ and defined by two equations: every
elementary quadrilateral has cross-ratio exp(2i(psi - pi)), and

    gamma f(n,m) = 2n (f(n+1,m) - f)(f - f(n-1,m)) / (f(n+1,m) - f(n-1,m))
                 + 2m (f(n,m+1) - f)(f - f(n,m-1)) / (f(n,m+1) - f(n,m-1))

holds at every point. White points (n + m even) carry the circle centers;
re-indexed by z = N + iM with N = (n - m)/2 and M = (n + m)/2 they fill the
quadrant {M >= |N|}.
"""

from __future__ import annotations

import cmath
import logging
import math
import typing as t
from dataclasses import dataclass, field
from functools import cached_property

from qcpattern.core import (
    BQuadGraph,
    CirclePattern,
    Kite,
    Violation,
    check_pattern,
    edge_key,
)
from qcpattern.exceptions import (
    DomainError,
    InconsistencyError,
    InputError,
    RecursionBlowupError,
    SingularFaceError,
)
from qcpattern.hirota import convexity_window

if t.TYPE_CHECKING:
    from collections.abc import Iterable, Mapping

    from qcpattern.core import Face, VertexId

logger = logging.getLogger(__name__)

Index = tuple[int, int]
# alpha_psi per face index of a square-grid graph
SGLabelling = dict[int, float]

BLOWUP_TOL = 1e-12
SINGULAR_TOL = 1e-14
EDGE_TOL = 1e-8
SIGN_SLACK = 1e-9


@dataclass(frozen=True)
class DiscreteMap:
    """Values f(n, m) on the staircase window n + m <= 2 * size."""

    gamma: float
    psi: float
    size: int
    values: dict[Index, complex] = field(repr=False)

    @property
    def cross_ratio(self) -> complex:
        """Cross-ratio of every elementary quadrilateral."""
        return cmath.exp(2j * (self.psi - math.pi))

    def quads(self) -> list[Index]:
        """Base points of the complete elementary quadrilaterals."""
        return sorted(b for b in self.values if (b[0] + 1, b[1] + 1) in self.values)

    def max_cross_ratio_residual(self) -> float:
        """Largest |q(quad) - q| over the window."""
        f = self.values
        worst = 0.0
        for n, m in self.quads():
            q = cross_ratio(f[n, m], f[n + 1, m], f[n + 1, m + 1], f[n, m + 1])
            worst = max(worst, abs(q - self.cross_ratio))
        return worst

    def max_constraint_residual(self) -> float:
        """Largest relative residual of the constraint at points with all four neighbours."""
        f = self.values
        worst = 0.0
        for (n, m), value in f.items():
            terms = [self.gamma * value]
            for step, dn, dm in ((n, 1, 0), (m, 0, 1)):
                if step == 0:
                    continue
                nxt, prev = f.get((n + dn, m + dm)), f.get((n - dn, m - dm))
                if nxt is None or prev is None:
                    break
                terms.append(-2 * step * (nxt - value) * (value - prev) / (nxt - prev))
            else:
                worst = max(worst, abs(sum(terms)) / max(1.0, abs(terms[0])))
        return worst


def cross_ratio(p1: complex, p2: complex, p3: complex, p4: complex) -> complex:
    """q(p1, p2, p3, p4) = (p1 - p2)(p3 - p4) / ((p2 - p3)(p4 - p1))."""
    return (p1 - p2) * (p3 - p4) / ((p2 - p3) * (p4 - p1))


def alpha_psi(z1: complex, z2: complex, psi: float) -> float:
    """Intersection angle on the square-grid edge between two white points.

    Args:
        z1: White point n + i m.
        z2: A diagonal neighbour of z1.
        psi: The angle in (0, pi).

    Returns:
        psi if the imaginary part increases with the real part, pi - psi otherwise.

    Raises:
        InputError: If the points are not diagonal neighbours.
    """
    delta = complex(z2) - complex(z1)
    if abs(abs(delta.real) - 1) > EDGE_TOL or abs(abs(delta.imag) - 1) > EDGE_TOL:
        msg = f"{z1} and {z2} are not diagonal neighbours"
        raise InputError(msg)
    return psi if delta.real * delta.imag > 0 else math.pi - psi


def solve_cross_ratio(p1: complex, p2: complex, p3: complex, q: complex) -> complex:
    """Fourth point p4 with q(p1, p2, p3, p4) = q.

    Raises:
        InputError: If the three points are not distinct.
        SingularFaceError: If the linear solve degenerates.
    """
    if p1 == p2 or p2 == p3 or p1 == p3:
        msg = f"Points must be distinct, got {(p1, p2, p3)}"
        raise InputError(msg)
    den = (p1 - p2) + q * (p2 - p3)
    if abs(den) <= SINGULAR_TOL * max(abs(p1 - p2), abs(p2 - p3)):
        msg = f"Cross-ratio {q} cannot be reached from {(p1, p2, p3)}"
        raise SingularFaceError(msg)
    return ((p1 - p2) * p3 + q * (p2 - p3) * p1) / den


def _axis(first: complex, gamma: float, length: int) -> list[complex]:
    values = [0j, first]
    for n in range(1, length):
        prev, cur = values[-2], values[-1]
        step = cur - prev
        den = gamma * cur - 2 * n * step
        if abs(den) <= BLOWUP_TOL * abs(cur):
            msg = f"Axis recursion blows up at n = {n} for gamma = {gamma}"
            raise RecursionBlowupError(msg)
        nxt = cur * (gamma * prev - 2 * n * step) / den
        if abs(nxt - prev) <= BLOWUP_TOL * abs(cur):
            msg = f"Axis recursion returns to f({n - 1}) at n = {n}"
            raise RecursionBlowupError(msg)
        values.append(nxt)
    return values


def zgamma_map(gamma: float, psi: float, size: int) -> DiscreteMap:
    """Discrete Z^gamma on the window n + m <= 2 * size.

    The axes follow the constraint restricted to m = 0 and n = 0 from
    f(0,0) = 0, f(1,0) = 1, f(0,1) = exp(i gamma (pi - psi)); the interior is
    filled column by column from the cross-ratio.

    Raises:
        DomainError: If gamma or psi is out of range or size < 1.
        RecursionBlowupError: If the axis recursion degenerates.
    """
    if not 0 < gamma < 2:  # noqa: PLR2004
        msg = f"gamma must lie in (0, 2), got {gamma}"
        raise DomainError(msg)
    if not 0 < psi < math.pi:
        msg = f"psi must lie in (0, pi), got {psi}"
        raise DomainError(msg)
    if size < 1:
        msg = f"Window size must be at least 1, got {size}"
        raise DomainError(msg)

    top = 2 * size
    horizontal = _axis(1 + 0j, gamma, top)
    vertical = _axis(cmath.exp(1j * gamma * (math.pi - psi)), gamma, top)
    values: dict[Index, complex] = {}
    for n in range(top + 1):
        values[n, 0] = horizontal[n]
    for m in range(1, top + 1):
        values[0, m] = vertical[m]

    # the quad at (n-1, m-1) read from its last corner has the reciprocal cross-ratio
    q = cmath.exp(-2j * (psi - math.pi))
    for n in range(1, top + 1):
        for m in range(1, top - n + 1):
            values[n, m] = solve_cross_ratio(
                values[n - 1, m], values[n - 1, m - 1], values[n, m - 1], q
            )
    logger.info(f"Computed Z^{gamma} (psi = {psi:.6f}) on {len(values)} points")
    return DiscreteMap(gamma=gamma, psi=psi, size=size, values=values)


def to_quadrant(n: int, m: int) -> tuple[int, int]:
    """(N, M) = ((n - m)/2, (n + m)/2) of a white point.

    Raises:
        InputError: If n + m is odd.
    """
    if (n + m) % 2:
        msg = f"({n}, {m}) is not a white point"
        raise InputError(msg)
    return (n - m) // 2, (n + m) // 2


def from_quadrant(big_n: int, big_m: int) -> Index:
    """Inverse of `to_quadrant`."""
    return big_n + big_m, big_m - big_n


def _grid_face(n: int, m: int) -> Face:
    corners = ((n, m), (n + 1, m), (n + 1, m + 1), (n, m + 1))
    if (n + m) % 2:
        return (*corners[1:], corners[0])  # type: ignore[return-value]
    return corners


def _faces_graph(bases: Iterable[Index]) -> BQuadGraph:
    faces = tuple(_grid_face(n, m) for n, m in sorted(bases))
    white = frozenset(v for face in faces for v in face if sum(v) % 2 == 0)
    return BQuadGraph(faces, white)


def grid_graph(width: int, height: int) -> BQuadGraph:
    """Square-grid b-quad-graph on [0, width] x [0, height], white where n + m is even."""
    if width < 1 or height < 1:
        msg = f"Grid needs positive extent, got {width} x {height}"
        raise InputError(msg)
    return _faces_graph((n, m) for n in range(width) for m in range(height))


def sg_labelling(graph: BQuadGraph, psi: float) -> SGLabelling:
    """alpha_psi on every face of a square-grid graph."""
    return {
        index: alpha_psi(complex(*face[0]), complex(*face[2]), psi)
        for index, face in enumerate(graph.faces)
    }


def map_to_pattern(zmap: DiscreteMap) -> CirclePattern:
    """Circle pattern of a discrete map: circles at the white points, kites from the quads.

    Raises:
        InconsistencyError: If the edges at a white point differ in length.
    """
    graph = _faces_graph(zmap.quads())
    f = zmap.values
    radii: dict[VertexId, float] = {}
    for x in sorted(graph.white):
        lengths = [
            abs(f[y] - f[x]) for y in _black_neighbors(x) if edge_key(x, y) in graph.edge_faces
        ]
        spread = max(lengths) - min(lengths)
        if spread > EDGE_TOL * max(lengths):
            msg = f"Edges at {x} differ in length by {spread:.3e}"
            raise InconsistencyError(msg)
        radii[x] = lengths[0]
    return CirclePattern(
        graph=graph,
        labelling=sg_labelling(graph, zmap.psi),
        centers={x: f[x] for x in sorted(graph.white)},
        radii=radii,
        kites=tuple(
            Kite(i, tuple(f[v] for v in face))  # type: ignore[arg-type]
            for i, face in enumerate(graph.faces)
        ),
    )


def _black_neighbors(x: VertexId) -> list[VertexId]:
    n, m = x
    return [(n + 1, m), (n, m + 1), (n - 1, m), (n, m - 1)]


def quadrant_radii(pattern: CirclePattern) -> dict[tuple[int, int], float]:
    """Radius function R on the quadrant, keyed by (N, M)."""
    return {to_quadrant(*x): r for x, r in pattern.radii.items()}


def convex_parameters(gamma: float, psi: float) -> bool:
    """True when every kite of Z^gamma with angle psi is known to be convex."""
    low, high = convexity_window(psi)
    return 0 < gamma < 2 and low <= gamma <= high  # noqa: PLR2004


@dataclass(frozen=True)
class ZgammaReport:
    """Findings of `zgamma_checks`."""

    gamma: float
    psi: float
    sign_violations: tuple[Violation, ...]
    min_sign_value: float
    identity_residual: float
    identity_points: int
    admissible: bool
    convex_violations: tuple[Violation, ...]

    @cached_property
    def ok(self) -> bool:
        """No sign or convexity violations on admissible parameters."""
        return not self.sign_violations and not (self.admissible and self.convex_violations)

    def to_dict(self) -> dict[str, t.Any]:
        """JSON friendly form."""
        return {
            "gamma": self.gamma,
            "psi": self.psi,
            "sign_violations": [[list(v.subject), v.amount] for v in self.sign_violations],
            "min_sign_value": self.min_sign_value,
            "identity_residual": self.identity_residual,
            "identity_points": self.identity_points,
            "admissible": self.admissible,
            "convex_violations": [v.subject for v in self.convex_violations],
        }


def _sign_value(radii: Mapping[tuple[int, int], float], z: tuple[int, int], psi: float) -> float:
    big_n, big_m = z
    r, below, right = radii[z], radii[big_n, big_m - 1], radii[big_n + 1, big_m]
    return r * r - below * right - math.cos(psi) * r * (below - right)


def zgamma_checks(
    zmap: DiscreteMap | CirclePattern,
    psi: float | None = None,
    gamma: float | None = None,
) -> ZgammaReport:
    """Sign, identity and convexity checks of a Z^gamma pattern.

    Args:
        zmap: A discrete map, or the circle pattern of one (then pass psi and gamma).
        psi: Angle of a pattern input.
        gamma: Exponent of a pattern input.

    Returns:
        The report. The sign check covers every z with z - i and z + 1 on the window
        away from the diagonals; the identity residual is relative to its largest term.

    Raises:
        InputError: If a pattern is passed without its parameters.
    """
    if isinstance(zmap, DiscreteMap):
        pattern, gamma, psi = map_to_pattern(zmap), zmap.gamma, zmap.psi
    elif psi is None or gamma is None:
        msg = "A pattern needs explicit gamma and psi"
        raise InputError(msg)
    else:
        pattern = zmap

    radii = quadrant_radii(pattern)
    cos_psi = math.cos(psi)
    sign_violations = []
    min_sign = math.inf
    identity = 0.0
    identity_points = 0
    for z in sorted(radii):
        big_n, big_m = z
        if abs(big_n) == big_m:
            continue
        up, below, right = (big_n, big_m + 1), (big_n, big_m - 1), (big_n + 1, big_m)
        if below in radii and right in radii:
            value = (gamma - 1) * _sign_value(radii, z, psi)
            min_sign = min(min_sign, value)
            if value < -SIGN_SLACK * radii[z] ** 2:
                sign_violations.append(Violation("sign", z, value))
        if up in radii and below in radii and right in radii:
            r = radii[z]
            first = (big_n + big_m) * _sign_value(radii, z, psi) * (radii[up] + radii[right])
            second = (
                (big_m - big_n)
                * (r * r - radii[up] * radii[right] - cos_psi * r * (radii[up] - radii[right]))
                * (radii[right] + radii[below])
            )
            identity = max(identity, abs(first + second) / max(1.0, abs(first), abs(second)))
            identity_points += 1

    report = check_pattern(pattern, checks=("convex",))
    admissible = convex_parameters(gamma, psi)
    if sign_violations:
        logger.warning(f"Sign check fails at {len(sign_violations)} points")
    return ZgammaReport(
        gamma=gamma,
        psi=psi,
        sign_violations=tuple(sign_violations),
        min_sign_value=min_sign if math.isfinite(min_sign) else 0.0,
        identity_residual=identity,
        identity_points=identity_points,
        admissible=admissible,
        convex_violations=report.violations,
    )
