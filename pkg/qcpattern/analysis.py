"""Measurements on circle patterns: radius ratios, subharmonicity, resistance and rigidity."""

from __future__ import annotations

import logging
import math
import typing as t
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from qcpattern.core import Violation, star_residuals
from qcpattern.exceptions import ConvergenceError, DomainError, InputError, WindowError
from qcpattern.sg import convex_parameters, map_to_pattern, to_quadrant, zgamma_map
from qcpattern.solver import RadiusProblem, SolverReport, solve_radii

if t.TYPE_CHECKING:
    from collections.abc import Mapping

    from qcpattern.core import BQuadGraph, CirclePattern, VertexId
    from qcpattern.projection import LiftedEmbedding

logger = logging.getLogger(__name__)

CLOSING_TOL = 1e-8
SUBHARMONIC_SLACK = 1e-12


def white_graph(graph: BQuadGraph) -> nx.Graph:
    """Graph on the white vertices with one edge per face."""
    g = nx.Graph()
    g.add_nodes_from(sorted(graph.white))
    g.add_edges_from((face[0], face[2]) for face in graph.faces)
    return g


def generation_ratio_stats(pattern: CirclePattern, v0: VertexId) -> dict[int, float]:
    """Largest |r(w)/r(v) - 1| over white v at least n generations away from v0.

    The value at n is the maximum over every white v at combinatorial distance >= n and its
    white neighbours w, so the statistics never increase with n.

    Raises:
        InputError: If v0 is not a white vertex of the pattern.
    """
    if v0 not in pattern.radii:
        msg = f"{v0} is not a white vertex of the pattern"
        raise InputError(msg)
    g = white_graph(pattern.graph)
    distance = nx.single_source_shortest_path_length(g, v0)
    per_generation: dict[int, float] = {}
    for v, n in distance.items():
        r = pattern.radii[v]
        worst = max((abs(pattern.radii[w] / r - 1) for w in g[v]), default=0.0)
        per_generation[n] = max(per_generation.get(n, 0.0), worst)
    stats: dict[int, float] = {}
    tail = 0.0
    for n in sorted(per_generation, reverse=True):
        tail = max(tail, per_generation[n])
        stats[n] = tail
    return dict(sorted(stats.items()))


@dataclass(frozen=True)
class SubharmonicityReport:
    """Violations of the two comparison inequalities and the vertices that were skipped."""

    violations: tuple[Violation, ...]
    skipped: tuple[Violation, ...]
    checked: int

    @property
    def ok(self) -> bool:
        """True when no checked vertex violates an inequality."""
        return not self.violations

    def to_dict(self) -> dict[str, t.Any]:
        """JSON friendly form."""
        return {
            "checked": self.checked,
            "violations": [[v.check, list(v.subject), v.amount] for v in self.violations],
            "skipped": [[v.check, list(v.subject), v.amount] for v in self.skipped],
        }


def subharmonicity_check(
    r: Mapping[VertexId, float],
    rho: Mapping[VertexId, float],
    graph: BQuadGraph,
    labelling: Mapping[int, float],
) -> SubharmonicityReport:
    """Check sum c_j r_j/rho_j >= sum c_j r_0/rho_0 and its reciprocal at interior vertices.

    The weights are c_j = sin a_j / (rho_j/rho_0 + rho_0/rho_j - 2 cos a_j). A vertex
    where either radius function does not close, or where r_j < r_0 cos a_j or
    rho_j < rho_0 cos a_j for some neighbour, is skipped and listed.
    """
    interior = sorted(graph.interior_vertices & graph.white)
    closing_r = star_residuals(graph, labelling, r, interior)
    closing_rho = star_residuals(graph, labelling, rho, interior)
    violations: list[Violation] = []
    skipped: list[Violation] = []
    checked = 0
    for v in interior:
        worst = max(abs(closing_r[v]), abs(closing_rho[v]))
        if worst >= CLOSING_TOL:
            skipped.append(Violation("closing", v, worst))
            continue
        star = graph.white_neighbors[v]
        alphas = np.array([labelling[f] for _, f in star])
        rj = np.array([r[w] for w, _ in star])
        rhoj = np.array([rho[w] for w, _ in star])
        r0, rho0 = r[v], rho[v]
        slack = np.minimum(rj - r0 * np.cos(alphas), rhoj - rho0 * np.cos(alphas))
        if np.any(slack < 0):
            skipped.append(Violation("cosine", v, float(np.min(slack))))
            continue
        checked += 1
        c = np.sin(alphas) / (rhoj / rho0 + rho0 / rhoj - 2 * np.cos(alphas))
        for check, lhs, rhs in (
            ("subharmonic", np.sum(c * rj / rhoj), np.sum(c) * r0 / rho0),
            ("reciprocal", np.sum(c * rhoj / rj), np.sum(c) * rho0 / r0),
        ):
            deficit = float(lhs - rhs)
            if deficit < -SUBHARMONIC_SLACK * max(1.0, abs(rhs)):
                violations.append(Violation(check, v, deficit))
    if skipped:
        logger.info(f"Subharmonicity check skipped {len(skipped)} vertices")
    return SubharmonicityReport(tuple(violations), tuple(skipped), checked)


@dataclass(frozen=True)
class ResistanceProfile:
    """Edge counts between consecutive annuli and the partial sums of their inverses."""

    edge_counts: tuple[int, ...]
    partial_sums: tuple[float, ...]
    min_rhombus_area: float
    width: float

    def lower_bounds(self) -> tuple[float, ...]:
        """C1/(32 pi) ln k for k = 1, ..., K."""
        return tuple(
            resistance_lower_bound(k, self.min_rhombus_area)
            for k in range(1, len(self.partial_sums) + 1)
        )

    def to_dict(self) -> dict[str, t.Any]:
        """JSON friendly form."""
        return {
            "edge_counts": list(self.edge_counts),
            "partial_sums": list(self.partial_sums),
            "lower_bounds": list(self.lower_bounds()),
            "min_rhombus_area": self.min_rhombus_area,
            "width": self.width,
        }


def resistance_lower_bound(k: int, c1: float) -> float:
    """C1/(32 pi) ln k, the area bound on the shortened network for annulus width 4."""
    return c1 / (32 * math.pi) * math.log(k)


def shortened_resistance(
    embedding: LiftedEmbedding,
    v0: VertexId,
    k_max: int,
    width: float = 4.0,
) -> ResistanceProfile:
    """Resistance of the network that identifies the white vertices of each annulus.

    V_k holds the white vertices with width (k-1) <= |z - v0| < width k, and |E_k|
    counts white edges between V_k and V_k+1. The partial sums S_k = sum_{j<=k} 1/|E_j|
    are the resistances of the shortened network.

    Raises:
        InputError: If v0 is not white or the arguments are out of range.
        WindowError: If the embedding does not reach far enough around v0.
    """
    graph = embedding.graph
    if v0 not in graph.white:
        msg = f"{v0} is not a white vertex of the embedding"
        raise InputError(msg)
    if k_max < 1 or width <= 0:
        msg = f"Need k_max >= 1 and a positive width, got {k_max} and {width}"
        raise InputError(msg)
    origin = embedding.positions[v0]
    required = abs(origin - embedding.center) + width * (k_max + 1) + 2.0
    if embedding.window < required:
        msg = f"Window radius {embedding.window} is too small; {required:.3f} is required"
        raise WindowError(msg)

    counts = np.zeros(k_max + 1, dtype=np.int64)
    for w1, _, w2, _ in graph.faces:
        k1 = int(abs(embedding.positions[w1] - origin) // width) + 1
        k2 = int(abs(embedding.positions[w2] - origin) // width) + 1
        low = min(k1, k2)
        if k1 != k2 and low <= k_max:
            counts[low] += 1
    edges = counts[1:]
    if np.any(edges == 0):
        msg = f"Annulus {int(np.argmin(edges)) + 1} has no outgoing edges"
        raise WindowError(msg)
    sums = np.cumsum(1.0 / edges)
    logger.info(f"Shortened network with {k_max} annuli: S = {sums[-1]:.6f}")
    return ResistanceProfile(
        edge_counts=tuple(int(e) for e in edges),
        partial_sums=tuple(float(s) for s in sums),
        min_rhombus_area=embedding.minimum_rhombus_area,
        width=width,
    )


def effective_resistance(graph: BQuadGraph, source: VertexId, sink: VertexId) -> float:
    """Effective resistance between two white vertices with unit edge resistances."""
    g = white_graph(graph)
    nodes = list(g.nodes())
    index = {v: i for i, v in enumerate(nodes)}
    laplacian = nx.laplacian_matrix(g, nodelist=nodes).toarray()
    pinv = np.linalg.pinv(laplacian)
    chi = np.zeros(len(nodes))
    chi[index[source]] = 1.0
    chi[index[sink]] = -1.0
    return float(chi @ pinv @ chi)


@dataclass(frozen=True)
class RigidityReport:
    """Comparison of solved radii r with the Z^gamma radii R on a quadrant window."""

    gamma: float
    psi: float
    generations: int
    perturbation: float
    max_deviation: float
    deviations: dict[int, float] = field(repr=False)
    m1: tuple[float, ...] = field(repr=False)
    m2: tuple[float, ...] = field(repr=False)
    solver: SolverReport = field(repr=False)

    def to_dict(self) -> dict[str, t.Any]:
        """JSON friendly form."""
        return {
            "gamma": self.gamma,
            "psi": self.psi,
            "generations": self.generations,
            "perturbation": self.perturbation,
            "max_deviation": self.max_deviation,
            "deviations": {str(k): v for k, v in self.deviations.items()},
            "m1": list(self.m1),
            "m2": list(self.m2),
            "solver": self.solver.to_dict(),
        }


def rigidity_experiment(
    gamma: float,
    psi: float,
    generations: int,
    perturbation: float = 0.0,
    tol: float = 1e-12,
    max_iter: int = 50,
) -> RigidityReport:
    """Solve for the interior radii of a Z^gamma window from its boundary radii.

    The boundary radii R on the axes are kept; those on the outer staircase are
    multiplied by 1 + perturbation. The solve starts from all ones.

    Raises:
        DomainError: If (gamma, psi) lies outside the convexity window.
        ConvergenceError: If the radius solve does not converge.
    """
    if not convex_parameters(gamma, psi):
        msg = f"gamma = {gamma} and psi = {psi} lie outside the convexity window"
        raise DomainError(msg)
    oracle = map_to_pattern(zgamma_map(gamma, psi, generations))
    graph = oracle.graph
    boundary = {}
    for v in sorted(graph.boundary_vertices & graph.white):
        on_axis = v[0] == 0 or v[1] == 0
        boundary[v] = oracle.radii[v] * (1.0 if on_axis else 1.0 + perturbation)
    problem = RadiusProblem(graph, oracle.labelling, boundary)
    radii, report = solve_radii(problem, tol=tol, max_iter=max_iter)
    if not report.converged:
        msg = f"Radius solve did not converge (residual {report.residual:.2e})"
        raise ConvergenceError(msg)

    deviations: dict[int, float] = {}
    by_generation: dict[int, tuple[float, float]] = {}
    for v in problem.unknowns:
        _, big_m = to_quadrant(*v)
        ratio = radii[v] / oracle.radii[v]
        deviations[big_m] = max(deviations.get(big_m, 0.0), abs(ratio - 1))
    for v in sorted(graph.white):
        _, big_m = to_quadrant(*v)
        ratio = radii[v] / oracle.radii[v]
        high, low = by_generation.get(big_m, (ratio, ratio))
        by_generation[big_m] = (max(high, ratio), min(low, ratio))
    m1, m2 = [], []
    top, bottom = 0.0, math.inf
    for big_m in sorted(by_generation):
        high, low = by_generation[big_m]
        top, bottom = max(top, high), min(bottom, low)
        m1.append(top)
        m2.append(1 / bottom)
    worst = max(deviations.values(), default=0.0)
    logger.info(f"Rigidity over {generations} generations: max deviation {worst:.3e}")
    return RigidityReport(
        gamma=gamma,
        psi=psi,
        generations=generations,
        perturbation=perturbation,
        max_deviation=worst,
        deviations=dict(sorted(deviations.items())),
        m1=tuple(m1),
        m2=tuple(m2),
        solver=report,
    )
