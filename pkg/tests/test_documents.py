"""Tests for versioned JSON documents."""

from __future__ import annotations

import math

import pytest
import simplejson

from qcpattern import documents
from qcpattern.core import CirclePattern
from qcpattern.exceptions import DocumentError, VersionError
from qcpattern.projection import LiftedEmbedding
from qcpattern.sg import zgamma_map
from qcpattern.solver import RadiusProblem


def _roundtrip(kind: str, payload: dict) -> documents.DocumentEnvelope:
    return documents.load(documents.save(documents.DocumentEnvelope(kind, payload)))


class TestRoundTrip:
    """Test that save and load reproduce the stored objects exactly."""

    def test_embedding(self, five_fold: LiftedEmbedding) -> None:
        """Test an embedding with its plane."""
        doc = _roundtrip("embedding", documents.embedding_payload(five_fold))
        loaded = documents.decode(doc, "embedding")
        assert loaded.graph.faces == five_fold.graph.faces
        assert loaded.graph.white == five_fold.graph.white
        assert loaded.positions == five_fold.positions
        assert loaded.directions == five_fold.directions
        assert loaded.plane == five_fold.plane

    def test_map(self) -> None:
        """Test a discrete map bit for bit."""
        zmap = zgamma_map(1.5, 2 * math.pi / 3, 4)
        loaded = documents.decode(_roundtrip("map", documents.map_payload(zmap)), "map")
        assert loaded.values == zmap.values
        assert (loaded.gamma, loaded.psi, loaded.size) == (zmap.gamma, zmap.psi, zmap.size)

    def test_pattern(self, zgamma_orthogonal: CirclePattern) -> None:
        """Test a pattern with kites."""
        payload = documents.pattern_payload(zgamma_orthogonal)
        loaded = documents.decode(_roundtrip("pattern", payload), "pattern")
        assert loaded.radii == zgamma_orthogonal.radii
        assert loaded.kites == zgamma_orthogonal.kites
        assert loaded.labelling == zgamma_orthogonal.labelling

    def test_problem(self, zgamma_orthogonal: CirclePattern) -> None:
        """Test a radius problem."""
        problem = RadiusProblem.from_pattern(zgamma_orthogonal)
        loaded = documents.decode(
            _roundtrip("problem", documents.problem_payload(problem)), "problem"
        )
        assert loaded.boundary == problem.boundary
        assert loaded.unknowns == problem.unknowns

    def test_provenance(self) -> None:
        """Test that provenance survives and keys come out sorted."""
        doc = documents.DocumentEnvelope(
            "report", documents.report_payload("x", {"b": 1, "a": 2}), {"command": "check"}
        )
        data = documents.save(doc)
        assert data.index(b'"a"') < data.index(b'"b"')
        assert documents.load(data).provenance == {"command": "check"}


class TestErrors:
    """Test rejection of bad documents."""

    def test_truncated(self) -> None:
        """Test that malformed JSON names a byte offset."""
        data = documents.save(
            documents.DocumentEnvelope("map", documents.map_payload(zgamma_map(1.5, 1.5, 2)))
        )
        with pytest.raises(DocumentError, match="byte"):
            documents.load(data[: len(data) // 2])

    def test_not_utf8(self) -> None:
        """Test that the input must be UTF-8."""
        with pytest.raises(DocumentError):
            documents.load(b"\xff\xfe{}")

    def test_newer_version(self) -> None:
        """Test that a newer major version is refused."""
        data = documents.save(documents.DocumentEnvelope("report", {"name": "x", "data": {}}))
        newer = data.replace(b'"schema_version": "1.0"', b'"schema_version": "2.0"')
        assert newer != data
        with pytest.raises(VersionError):
            documents.load(newer)

    def test_payload_path(self) -> None:
        """Test that schema violations report their path."""
        raw = {"schema_version": "1.0", "kind": "map", "payload": {"gamma": 1.5, "psi": 1.0}}
        with pytest.raises(DocumentError, match="payload"):
            documents.load(simplejson.dumps(raw).encode())

    def test_unknown_kind(self) -> None:
        """Test that the envelope kind is validated."""
        raw = {"schema_version": "1.0", "kind": "movie", "payload": {}}
        with pytest.raises(DocumentError):
            documents.load(simplejson.dumps(raw).encode())

    def test_non_finite(self) -> None:
        """Test that NaN cannot be stored."""
        doc = documents.DocumentEnvelope("report", documents.report_payload("x", {"v": math.nan}))
        with pytest.raises(DocumentError):
            documents.save(doc)

    def test_wrong_kind(self, five_fold: LiftedEmbedding) -> None:
        """Test that decode checks the expected kind."""
        doc = documents.DocumentEnvelope("embedding", documents.embedding_payload(five_fold))
        with pytest.raises(DocumentError, match="map"):
            documents.decode(doc, "map")
