"""Versioned JSON documents for every artifact of the pipeline.

Floats are written in scientific notation with 17 significant digits, so a
save/load cycle reproduces every double bit for bit. Complex numbers are
``[re, im]`` pairs and vertices are integer arrays.
"""

from __future__ import annotations

import logging
import math
import typing as t
from dataclasses import dataclass, field
from decimal import Decimal

import jsonschema
import simplejson

from qcpattern.core import BQuadGraph, CirclePattern, Kite
from qcpattern.exceptions import DocumentError, VersionError
from qcpattern.hirota import ComparisonFunction
from qcpattern.lattice import Facet
from qcpattern.projection import LiftedEmbedding, PlaneSpec
from qcpattern.schemas import PAYLOADS, SCHEMA_VERSION, envelope_schema
from qcpattern.sg import DiscreteMap
from qcpattern.solver import RadiusProblem
from qcpattern.surface import QuadSurface

if t.TYPE_CHECKING:
    from collections.abc import Callable, Mapping

    from qcpattern.core import RadiusFunction, VertexId

logger = logging.getLogger(__name__)

KINDS = tuple(PAYLOADS)


@dataclass(frozen=True)
class DocumentEnvelope:
    """A payload of one kind together with the command that produced it."""

    kind: str
    payload: dict[str, t.Any]
    provenance: dict[str, t.Any] = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def to_dict(self) -> dict[str, t.Any]:
        """Envelope as a plain mapping."""
        return {
            "schema_version": self.schema_version,
            "kind": self.kind,
            "payload": self.payload,
            "provenance": self.provenance,
        }


def _decimals(value: t.Any) -> t.Any:
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            msg = f"Cannot store the non-finite number {value}"
            raise DocumentError(msg)
        return Decimal(format(value, ".16e"))
    if isinstance(value, complex):
        return [_decimals(value.real), _decimals(value.imag)]
    if isinstance(value, dict):
        return {str(k): _decimals(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_decimals(v) for v in value]
    if hasattr(value, "item"):
        return _decimals(value.item())
    msg = f"Cannot store a value of type {type(value).__name__}"
    raise DocumentError(msg)


def _floats(value: t.Any) -> t.Any:
    if isinstance(value, Decimal):
        return float(value)
    if isinstance(value, dict):
        return {k: _floats(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_floats(v) for v in value]
    return value


def save(doc: DocumentEnvelope) -> bytes:
    """Serialise a document to UTF-8 JSON with sorted keys.

    Raises:
        DocumentError: If the payload does not match its schema or holds non-finite numbers.
    """
    encoded = _decimals(doc.to_dict())
    _validate(_floats(encoded))
    text = simplejson.dumps(
        encoded,
        use_decimal=True,
        sort_keys=True,
        indent=1,
        ensure_ascii=False,
    )
    return (text + "\n").encode("utf-8")


def load(data: bytes) -> DocumentEnvelope:
    """Parse and validate a document.

    Raises:
        DocumentError: On malformed JSON (with byte offset) or schema violations (with path).
        VersionError: If the document's major version is newer than this reader's.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        msg = f"Document is not UTF-8 (byte {exc.start})"
        raise DocumentError(msg) from exc
    try:
        raw = simplejson.loads(text, use_decimal=True)
    except simplejson.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        msg = f"Malformed document at byte {offset}: {exc.msg}"
        raise DocumentError(msg) from exc
    raw = _floats(raw)
    _validate(raw)
    return DocumentEnvelope(
        kind=raw["kind"],
        payload=raw["payload"],
        provenance=raw.get("provenance") or {},
        schema_version=raw["schema_version"],
    )


def _first_error(schema: Mapping[str, t.Any], instance: t.Any) -> str | None:
    validator = jsonschema.Draft7Validator(schema)
    errors = sorted(validator.iter_errors(instance), key=lambda e: [str(p) for p in e.path])
    if not errors:
        return None
    first = errors[0]
    location = "/".join(str(p) for p in first.absolute_path) or "<root>"
    return f"{location}: {first.message}"


def _validate(raw: t.Any) -> None:
    problem = _first_error(envelope_schema, raw)
    if problem:
        msg = f"Invalid document envelope at {problem}"
        raise DocumentError(msg)
    version = str(raw["schema_version"])
    try:
        major = int(version.split(".")[0])
    except ValueError as exc:
        msg = f"Unreadable schema version {version!r}"
        raise DocumentError(msg) from exc
    if major > int(SCHEMA_VERSION.split(".")[0]):
        msg = f"Schema version {version} is newer than the supported {SCHEMA_VERSION}"
        raise VersionError(msg)
    problem = _first_error(PAYLOADS[raw["kind"]], raw["payload"])
    if problem:
        msg = f"Invalid {raw['kind']} payload at payload/{problem}"
        raise DocumentError(msg)


def _point(value: complex) -> list[float]:
    return [float(value.real), float(value.imag)]


def _complex(pair: list[float]) -> complex:
    return complex(pair[0], pair[1])


def _vertex(raw: list[int]) -> VertexId:
    return tuple(int(c) for c in raw)


def _graph_payload(graph: BQuadGraph) -> dict[str, t.Any]:
    return {
        "faces": [[list(v) for v in face] for face in graph.faces],
        "white": [list(v) for v in sorted(graph.white)],
    }


def _graph(payload: Mapping[str, t.Any]) -> BQuadGraph:
    faces = tuple(tuple(_vertex(v) for v in face) for face in payload["faces"])
    white = frozenset(_vertex(v) for v in payload["white"])
    return BQuadGraph(faces, white)  # type: ignore[arg-type]


def _radii_payload(radii: Mapping[VertexId, float]) -> list[dict[str, t.Any]]:
    return [{"vertex": list(v), "radius": float(r)} for v, r in sorted(radii.items())]


def _radii(entries: list[dict[str, t.Any]]) -> RadiusFunction:
    return {_vertex(e["vertex"]): float(e["radius"]) for e in entries}


def embedding_payload(embedding: LiftedEmbedding) -> dict[str, t.Any]:
    """Payload of an embedding document."""
    plane = embedding.plane
    return {
        **_graph_payload(embedding.graph),
        "positions": [
            {"vertex": list(v), "point": _point(p)} for v, p in sorted(embedding.positions.items())
        ],
        "directions": [_point(a) for a in embedding.directions],
        "scales": [float(s) for s in embedding.scales],
        "window": float(embedding.window),
        "center": _point(embedding.center),
        "plane": None
        if plane is None
        else {"u1": list(plane.u1), "u2": list(plane.u2), "t": list(plane.t)},
    }


def embedding_from_payload(payload: Mapping[str, t.Any]) -> LiftedEmbedding:
    """Embedding from its payload."""
    plane = payload.get("plane")
    return LiftedEmbedding(
        graph=_graph(payload),
        positions={_vertex(e["vertex"]): _complex(e["point"]) for e in payload["positions"]},
        directions=tuple(_complex(a) for a in payload["directions"]),
        scales=tuple(float(s) for s in payload["scales"]),
        window=float(payload["window"]),
        center=_complex(payload["center"]),
        plane=None
        if plane is None
        else PlaneSpec(tuple(plane["u1"]), tuple(plane["u2"]), tuple(plane["t"])),
    )


def surface_payload(
    surface: QuadSurface,
    directions: tuple[complex, ...] | None = None,
) -> dict[str, t.Any]:
    """Payload of a surface document, optionally with the projection directions."""
    return {
        "dimension": surface.dimension,
        "facets": [{"base": list(f.base), "j": f.j, "l": f.l} for f in sorted(surface.facets)],
        "directions": None if directions is None else [_point(a) for a in directions],
    }


def surface_from_payload(payload: Mapping[str, t.Any]) -> QuadSurface:
    """Surface from its payload."""
    facets = frozenset(Facet(_vertex(f["base"]), f["j"], f["l"]) for f in payload["facets"])
    return QuadSurface(facets, int(payload["dimension"]))


def surface_directions(payload: Mapping[str, t.Any]) -> tuple[complex, ...] | None:
    """Projection directions stored with a surface, if any."""
    raw = payload.get("directions")
    return None if raw is None else tuple(_complex(a) for a in raw)


def pattern_payload(pattern: CirclePattern) -> dict[str, t.Any]:
    """Payload of a pattern document."""
    return {
        **_graph_payload(pattern.graph),
        "labelling": [float(pattern.labelling[i]) for i in range(len(pattern.graph.faces))],
        "centers": [
            {"vertex": list(v), "point": _point(c)} for v, c in sorted(pattern.centers.items())
        ],
        "radii": _radii_payload(pattern.radii),
        "kites": [
            {"face": k.face, "points": [_point(p) for p in k.points]} for k in pattern.kites
        ],
    }


def pattern_from_payload(payload: Mapping[str, t.Any]) -> CirclePattern:
    """Pattern from its payload."""
    return CirclePattern(
        graph=_graph(payload),
        labelling={i: float(a) for i, a in enumerate(payload["labelling"])},
        centers={_vertex(e["vertex"]): _complex(e["point"]) for e in payload["centers"]},
        radii=_radii(payload["radii"]),
        kites=tuple(
            Kite(int(k["face"]), tuple(_complex(p) for p in k["points"]))  # type: ignore[arg-type]
            for k in payload["kites"]
        ),
    )


def map_payload(zmap: DiscreteMap) -> dict[str, t.Any]:
    """Payload of a map document."""
    return {
        "gamma": float(zmap.gamma),
        "psi": float(zmap.psi),
        "size": zmap.size,
        "values": [
            {"index": list(i), "value": _point(v)} for i, v in sorted(zmap.values.items())
        ],
    }


def map_from_payload(payload: Mapping[str, t.Any]) -> DiscreteMap:
    """Discrete map from its payload."""
    values = {_vertex(e["index"]): _complex(e["value"]) for e in payload["values"]}
    return DiscreteMap(
        gamma=float(payload["gamma"]),
        psi=float(payload["psi"]),
        size=int(payload["size"]),
        values=values,  # type: ignore[arg-type]
    )


def comparison_payload(w: ComparisonFunction) -> dict[str, t.Any]:
    """Payload of a comparison document."""
    return {
        "values": [{"vertex": list(v), "value": _point(x)} for v, x in sorted(w.values.items())],
        "white": [list(v) for v in sorted(w.white)],
    }


def comparison_from_payload(payload: Mapping[str, t.Any]) -> ComparisonFunction:
    """Comparison function from its payload."""
    return ComparisonFunction(
        {_vertex(e["vertex"]): _complex(e["value"]) for e in payload["values"]},
        frozenset(_vertex(v) for v in payload["white"]),
    )


def problem_payload(problem: RadiusProblem) -> dict[str, t.Any]:
    """Payload of a radius problem document."""
    return {
        **_graph_payload(problem.graph),
        "labelling": [float(problem.labelling[i]) for i in range(len(problem.graph.faces))],
        "boundary": _radii_payload(problem.boundary),
        "initial": None if problem.initial is None else _radii_payload(problem.initial),
    }


def problem_from_payload(payload: Mapping[str, t.Any]) -> RadiusProblem:
    """Radius problem from its payload."""
    initial = payload.get("initial")
    return RadiusProblem(
        graph=_graph(payload),
        labelling={i: float(a) for i, a in enumerate(payload["labelling"])},
        boundary=_radii(payload["boundary"]),
        initial=None if initial is None else _radii(initial),
    )


def radii_payload(
    radii: Mapping[VertexId, float],
    solver: Mapping[str, t.Any] | None = None,
) -> dict[str, t.Any]:
    """Payload of a radii document."""
    return {"radii": _radii_payload(radii), "solver": None if solver is None else dict(solver)}


def radii_from_payload(payload: Mapping[str, t.Any]) -> RadiusFunction:
    """Radius function from its payload."""
    return _radii(payload["radii"])


def report_payload(name: str, data: Mapping[str, t.Any]) -> dict[str, t.Any]:
    """Payload of a report document."""
    return {"name": name, "data": dict(data)}


DECODERS: dict[str, Callable[[Mapping[str, t.Any]], t.Any]] = {
    "embedding": embedding_from_payload,
    "surface": surface_from_payload,
    "pattern": pattern_from_payload,
    "map": map_from_payload,
    "comparison": comparison_from_payload,
    "problem": problem_from_payload,
    "radii": radii_from_payload,
    "report": dict,
}


def decode(doc: DocumentEnvelope, *kinds: str) -> t.Any:
    """Domain object of a document, optionally requiring one of `kinds`.

    Raises:
        DocumentError: If the document has an unexpected kind.
    """
    if kinds and doc.kind not in kinds:
        msg = f"Expected a {' or '.join(kinds)} document, got {doc.kind}"
        raise DocumentError(msg)
    return DECODERS[doc.kind](doc.payload)
