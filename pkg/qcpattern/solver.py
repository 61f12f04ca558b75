"""Newton solver for radius functions with prescribed boundary radii."""

from __future__ import annotations

import logging
import math
import typing as t
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from qcpattern.core import angle_function, check_admissible
from qcpattern.exceptions import DomainError, InputError, LabellingError, NumericError

if t.TYPE_CHECKING:
    from collections.abc import Mapping

    import numpy.typing as npt

    from qcpattern.core import BQuadGraph, CirclePattern, Labelling, RadiusFunction, VertexId

logger = logging.getLogger(__name__)

ARMIJO = 2e-4
MIN_STEP = 1e-10


@dataclass(frozen=True)
class _System:
    whites: tuple[VertexId, ...]
    unknown: npt.NDArray[np.int64]
    rows: npt.NDArray[np.int64]
    cols: npt.NDArray[np.int64]
    alphas: npt.NDArray[np.float64]
    position: npt.NDArray[np.int64]
    fixed: npt.NDArray[np.float64]


@dataclass(frozen=True)
class RadiusProblem:
    """Radius system on a b-quad-graph with Dirichlet data on the boundary white vertices."""

    graph: BQuadGraph
    labelling: Labelling
    boundary: dict[VertexId, float]
    initial: dict[VertexId, float] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        """Validate the problem.

        Raises:
            InputError: If no boundary data is given or a boundary vertex is missing.
            DomainError: If a prescribed or initial radius is not positive.
            LabellingError: If the labelling is not admissible.
        """
        if not self.boundary:
            msg = "Boundary data must not be empty"
            raise InputError(msg)
        radii = [*self.boundary.values(), *(self.initial or {}).values()]
        if any(not r > 0 for r in radii):
            msg = "Prescribed and initial radii must be positive"
            raise DomainError(msg)
        missing = sorted((self.graph.boundary_vertices & self.graph.white) - set(self.boundary))
        if missing:
            msg = f"{len(missing)} boundary white vertices lack radii, first {missing[0]}"
            raise InputError(msg)
        foreign = sorted(set(self.boundary) - self.graph.white)
        if foreign:
            msg = f"Boundary radius given for {foreign[0]}, which is not a white vertex"
            raise InputError(msg)
        violations = check_admissible(self.graph, self.labelling)
        if violations:
            msg = f"Labelling is not admissible at {violations[0].subject}"
            raise LabellingError(msg)

    @classmethod
    def from_pattern(
        cls,
        pattern: CirclePattern,
        initial: Mapping[VertexId, float] | None = None,
    ) -> RadiusProblem:
        """Problem with the boundary radii of a pattern."""
        graph = pattern.graph
        boundary = {v: pattern.radii[v] for v in sorted(graph.boundary_vertices & graph.white)}
        return cls(graph, dict(pattern.labelling), boundary, dict(initial) if initial else None)

    @cached_property
    def unknowns(self) -> tuple[VertexId, ...]:
        """White vertices whose radii are solved for."""
        return tuple(v for v in sorted(self.graph.white) if v not in self.boundary)

    @cached_property
    def system(self) -> _System:
        """Index arrays of the residual assembly."""
        whites = tuple(sorted(self.graph.white))
        index = {v: i for i, v in enumerate(whites)}
        rows, cols, alphas = [], [], []
        for k, v in enumerate(self.unknowns):
            for w, face in self.graph.white_neighbors[v]:
                rows.append(k)
                cols.append(index[w])
                alphas.append(self.labelling[face])
        unknown = np.array([index[v] for v in self.unknowns], dtype=np.int64)
        position = np.full(len(whites), -1, dtype=np.int64)
        position[unknown] = np.arange(len(unknown))
        fixed = np.zeros(len(whites))
        for v, r in self.boundary.items():
            fixed[index[v]] = math.log(r)
        return _System(
            whites=whites,
            unknown=unknown,
            rows=np.array(rows, dtype=np.int64),
            cols=np.array(cols, dtype=np.int64),
            alphas=np.array(alphas, dtype=float),
            position=position,
            fixed=fixed,
        )

    def initial_guess(self) -> npt.NDArray[np.float64]:
        """Log radii of the unknowns to start from (all ones by default)."""
        start = self.initial or {}
        return np.array([math.log(start.get(v, 1.0)) for v in self.unknowns])


def _differences(problem: RadiusProblem, u: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    s = problem.system
    full = s.fixed.copy()
    full[s.unknown] = u
    return full[s.cols] - u[s.rows]


def residual_vector(problem: RadiusProblem, u: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """Closing residual sum_j f_alpha_j(u_j - u_0) - pi at every unknown vertex."""
    s = problem.system
    angles = angle_function(_differences(problem, u), s.alphas)
    return np.bincount(s.rows, weights=angles, minlength=len(s.unknown)) - np.pi


def jacobian(problem: RadiusProblem, u: npt.NDArray[np.float64]) -> sp.csc_matrix:
    """Sparse symmetric Jacobian of `residual_vector` in the log radii."""
    s = problem.system
    slopes = angle_function(_differences(problem, u), s.alphas, order=1)
    size = len(s.unknown)
    diagonal = -np.bincount(s.rows, weights=slopes, minlength=size)
    inner = s.position[s.cols] >= 0
    data = np.concatenate([diagonal, slopes[inner]])
    rows = np.concatenate([np.arange(size), s.rows[inner]])
    cols = np.concatenate([np.arange(size), s.position[s.cols[inner]]])
    return sp.coo_matrix((data, (rows, cols)), shape=(size, size)).tocsc()


@dataclass(frozen=True)
class SolverReport:
    """Convergence record of `solve_radii`."""

    converged: bool
    iterations: int
    residual: float
    residual_history: tuple[float, ...]
    step_sizes: tuple[float, ...]

    def to_dict(self) -> dict[str, t.Any]:
        """JSON friendly form."""
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "residual": self.residual,
            "residual_history": list(self.residual_history),
            "step_sizes": list(self.step_sizes),
        }


def solve_radii(
    problem: RadiusProblem,
    tol: float = 1e-10,
    max_iter: int = 50,
) -> tuple[RadiusFunction, SolverReport]:
    """Solve the radius system by damped Newton iteration in u = log r.

    Every step is a sparse Newton direction shortened by halving until the
    residual norm decreases sufficiently (Armijo rule).

    Args:
        problem: The radius problem.
        tol: Bound on the largest interior residual.
        max_iter: Maximum number of Newton steps.

    Returns:
        Radii of all white vertices and the convergence report. A run that stops
        early is reported with `converged` False.

    Raises:
        NumericError: If a non-finite value appears.
    """
    u = problem.initial_guess()
    radii = dict(problem.boundary)
    if not len(u):
        return radii, SolverReport(True, 0, 0.0, (0.0,), ())

    res = residual_vector(problem, u)
    history = [float(np.linalg.norm(res))]
    steps: list[float] = []
    iteration = 0
    while np.max(np.abs(res)) >= tol and iteration < max_iter:
        direction = -spsolve(jacobian(problem, u), res)
        if not np.all(np.isfinite(direction)):
            msg = f"Newton direction is not finite at iteration {iteration}"
            raise NumericError(msg)

        stepsize = 1.0
        trial = u + direction
        trial_res = residual_vector(problem, trial)
        while np.linalg.norm(trial_res) >= (1 - ARMIJO * stepsize) * history[-1]:
            stepsize *= 0.5
            if stepsize < MIN_STEP:
                break
            trial = u + stepsize * direction
            trial_res = residual_vector(problem, trial)
        if stepsize < MIN_STEP:
            logger.warning(f"No acceptable step size at iteration {iteration}")
            break

        u, res = trial, trial_res
        iteration += 1
        history.append(float(np.linalg.norm(res)))
        steps.append(stepsize)
        logger.debug(f"Newton {iteration}: step {stepsize:.3e}, residual {history[-1]:.3e}")

    if not np.all(np.isfinite(u)):
        msg = "Log radii are not finite"
        raise NumericError(msg)
    worst = float(np.max(np.abs(res)))
    converged = worst < tol
    if converged:
        logger.info(f"Radius solve converged in {iteration} iterations (residual {worst:.2e})")
    else:
        logger.warning(f"Radius solve stopped after {iteration} iterations (residual {worst:.2e})")

    radii.update(zip(problem.unknowns, np.exp(u).tolist(), strict=True))
    return dict(sorted(radii.items())), SolverReport(
        converged=converged,
        iterations=iteration,
        residual=worst,
        residual_history=tuple(history),
        step_sizes=tuple(steps),
    )
