"""JSON schemas of the document envelope and of every payload kind."""

from __future__ import annotations

from singer_sdk import typing as th  # JSON Schema typing helpers

SCHEMA_VERSION = "1.0"

COMPLEX = th.CustomType(
    {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
)
VERTEX = th.ArrayType(th.IntegerType)


def _vertex_value(name: str, value: th.JSONTypeHelper) -> th.ArrayType:
    return th.ArrayType(
        th.ObjectType(
            th.Property("vertex", VERTEX, required=True),
            th.Property(name, value, required=True),
        )
    )


GRAPH_PROPERTIES = (
    th.Property("faces", th.ArrayType(th.ArrayType(VERTEX)), required=True),
    th.Property("white", th.ArrayType(VERTEX), required=True),
)

envelope_schema = th.PropertiesList(
    th.Property("schema_version", th.StringType, required=True),
    th.Property(
        "kind",
        th.StringType,
        required=True,
        allowed_values=[
            "embedding",
            "surface",
            "pattern",
            "map",
            "comparison",
            "report",
            "problem",
            "radii",
        ],
    ),
    th.Property("payload", th.ObjectType(), required=True),
    th.Property("provenance", th.ObjectType()),
).to_dict()

PAYLOADS: dict[str, dict] = {
    "embedding": th.PropertiesList(
        *GRAPH_PROPERTIES,
        th.Property("positions", _vertex_value("point", COMPLEX), required=True),
        th.Property("directions", th.ArrayType(COMPLEX), required=True),
        th.Property("scales", th.ArrayType(th.NumberType), required=True),
        th.Property("window", th.NumberType, required=True),
        th.Property("center", COMPLEX, required=True),
        th.Property(
            "plane",
            th.ObjectType(
                th.Property("u1", th.ArrayType(th.NumberType), required=True),
                th.Property("u2", th.ArrayType(th.NumberType), required=True),
                th.Property("t", th.ArrayType(th.NumberType), required=True),
            ),
        ),
    ).to_dict(),
    "surface": th.PropertiesList(
        th.Property("dimension", th.IntegerType, required=True),
        th.Property(
            "facets",
            th.ArrayType(
                th.ObjectType(
                    th.Property("base", VERTEX, required=True),
                    th.Property("j", th.IntegerType, required=True),
                    th.Property("l", th.IntegerType, required=True),
                )
            ),
            required=True,
        ),
        th.Property("directions", th.ArrayType(COMPLEX)),
    ).to_dict(),
    "pattern": th.PropertiesList(
        *GRAPH_PROPERTIES,
        th.Property("labelling", th.ArrayType(th.NumberType), required=True),
        th.Property("centers", _vertex_value("point", COMPLEX), required=True),
        th.Property("radii", _vertex_value("radius", th.NumberType), required=True),
        th.Property(
            "kites",
            th.ArrayType(
                th.ObjectType(
                    th.Property("face", th.IntegerType, required=True),
                    th.Property("points", th.ArrayType(COMPLEX), required=True),
                )
            ),
            required=True,
        ),
    ).to_dict(),
    "map": th.PropertiesList(
        th.Property("gamma", th.NumberType, required=True),
        th.Property("psi", th.NumberType, required=True),
        th.Property("size", th.IntegerType, required=True),
        th.Property(
            "values",
            th.ArrayType(
                th.ObjectType(
                    th.Property("index", VERTEX, required=True),
                    th.Property("value", COMPLEX, required=True),
                )
            ),
            required=True,
        ),
    ).to_dict(),
    "comparison": th.PropertiesList(
        th.Property("values", _vertex_value("value", COMPLEX), required=True),
        th.Property("white", th.ArrayType(VERTEX), required=True),
    ).to_dict(),
    "report": th.PropertiesList(
        th.Property("name", th.StringType, required=True),
        th.Property("data", th.ObjectType(), required=True),
    ).to_dict(),
    "problem": th.PropertiesList(
        *GRAPH_PROPERTIES,
        th.Property("labelling", th.ArrayType(th.NumberType), required=True),
        th.Property("boundary", _vertex_value("radius", th.NumberType), required=True),
        th.Property("initial", _vertex_value("radius", th.NumberType)),
    ).to_dict(),
    "radii": th.PropertiesList(
        th.Property("radii", _vertex_value("radius", th.NumberType), required=True),
        th.Property("solver", th.ObjectType()),
    ).to_dict(),
}
