"""Error hierarchy for qcpattern.

Every error carries the process exit code the CLI reports for it. Findings of
checks (overlapping kites, subharmonicity violations, ...) are data and never
raised.
"""

from __future__ import annotations


class QCPatternError(Exception):
    """Base class for all qcpattern errors."""

    exit_code = 1


class InputError(QCPatternError):
    """Invalid input: bad parameters, malformed graphs or documents."""

    exit_code = 2


class NumericError(QCPatternError):
    """A numerical procedure failed: singular solves, blow-ups, non-convergence."""

    exit_code = 3


class DomainError(InputError):
    """A parameter lies outside its mathematical domain."""


class GraphError(InputError):
    """The b-quad-graph violates a combinatorial invariant."""


class LabellingError(InputError):
    """A labelling is incomplete or not admissible."""


class PlaneError(InputError):
    """A projection plane is not orthonormal or projects degenerately."""


class DegeneracyError(InputError):
    """The plane passes (almost) through a lower dimensional cell of the lattice."""


class UnsupportedSymmetryError(InputError):
    """No symmetric plane construction exists for the requested fold number."""


class LiftError(InputError):
    """A rhombic embedding cannot be lifted consistently to Z^d."""


class FlipError(InputError):
    """A simple flip was requested at a vertex that is not a cube corner."""


class StripError(InputError):
    """A strip of translated facets has a gap or does not reach the boundary."""


class StripConditionError(InputError):
    """The angle condition of a strip flip is violated."""


class OctantError(InputError):
    """A quad-surface does not fit into a single octant."""


class WindowError(InputError):
    """The embedding window is too small for the requested analysis."""


class DocumentError(InputError):
    """A document cannot be parsed or does not match its schema."""


class VersionError(DocumentError):
    """A document was written with an unsupported schema version."""


class NonClosingError(NumericError):
    """Radii do not satisfy the closing condition around an interior vertex."""


class LayoutError(NumericError):
    """Kites placed along different paths disagree."""


class SingularFaceError(NumericError):
    """The linear solve of a face equation is singular."""


class ExtensionError(NumericError):
    """Hirota extension hit a singular face."""


class ReachabilityError(NumericError):
    """Hirota extension stalled before filling its target region."""


class RecursionBlowupError(NumericError):
    """An axis recursion divided by (almost) zero."""


class InconsistencyError(NumericError):
    """Derived geometric quantities that must agree do not."""


class ConvergenceError(NumericError):
    """An iterative solver did not converge where convergence was required."""
