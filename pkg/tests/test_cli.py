"""Tests for the qcpattern command line."""

from __future__ import annotations

import cmath
import math
import typing as t

import pytest
from click.testing import CliRunner

from qcpattern import documents
from qcpattern.cli import cli
from qcpattern.core import CirclePattern
from qcpattern.lattice import Facet
from qcpattern.surface import QuadSurface

if t.TYPE_CHECKING:
    from pathlib import Path


@pytest.fixture
def runner() -> CliRunner:
    """Click test runner."""
    return CliRunner()


def _write(path: Path, kind: str, payload: dict) -> str:
    path.write_bytes(documents.save(documents.DocumentEnvelope(kind, payload)))
    return str(path)


def _problem(runner: CliRunner, path: Path) -> None:
    args = ["zgamma-sg", "--gamma", "1.5", "--size", "4", "--emit", "problem", "--out", str(path)]
    assert runner.invoke(cli, args).exit_code == 0


class TestGenerate:
    """Test embedding generation."""

    def test_embedding_document(self, runner: CliRunner) -> None:
        """Test that generate writes an embedding document to stdout."""
        result = runner.invoke(cli, ["generate", "--offset", "-0.2", "--window", "5"])
        assert result.exit_code == 0, result.output
        doc = documents.load(result.stdout_bytes)
        assert doc.kind == "embedding"
        assert doc.provenance["command"] == "generate"
        assert doc.provenance["parameters"]["window"] == 5.0

    def test_deterministic(self, runner: CliRunner) -> None:
        """Test that equal arguments give equal bytes."""
        args = ["generate", "--folds", "7", "--offset", "0.13", "--window", "4"]
        assert runner.invoke(cli, args).stdout_bytes == runner.invoke(cli, args).stdout_bytes

    def test_square_grid_offset(self, runner: CliRunner) -> None:
        """Test that --folds 2 applies --offset to both coordinates."""
        args = ["generate", "--folds", "2", "--offset", "0.3", "--window", "4"]
        result = runner.invoke(cli, args)
        assert result.exit_code == 0, result.output
        embedding = documents.decode(documents.load(result.stdout_bytes), "embedding")
        assert embedding.plane is not None
        assert embedding.plane.t == pytest.approx((0.3, 0.3))
        assert embedding.center == pytest.approx(0.3 + 0.3j)
        help_text = " ".join(runner.invoke(cli, ["generate", "--help"]).output.split())
        assert "both coordinates" in help_text

    def test_unsupported_symmetry(self, runner: CliRunner) -> None:
        """Test that input errors exit with 2."""
        result = runner.invoke(cli, ["generate", "--folds", "6"])
        assert result.exit_code == 2
        assert "error:" in result.output


class TestPipeline:
    """Test commands chained through files."""

    def test_generate_lift_project(self, runner: CliRunner, tmp_path: Path) -> None:
        """Test embedding, surface and pattern documents in sequence."""
        embedding = tmp_path / "embedding.json"
        surface = tmp_path / "surface.json"
        pattern = tmp_path / "pattern.json"
        steps = [
            ["generate", "--offset", "-0.2", "--window", "5", "--out", str(embedding)],
            ["lift", str(embedding), "--out", str(surface)],
            ["project", str(surface), "--out", str(pattern)],
        ]
        for args in steps:
            result = runner.invoke(cli, args)
            assert result.exit_code == 0, result.output
        loaded = documents.decode(documents.load(pattern.read_bytes()), "pattern")
        source = documents.decode(documents.load(embedding.read_bytes()), "embedding")
        assert len(loaded.kites) == len(source.graph.faces)
        assert all(r == pytest.approx(1.0) for r in loaded.radii.values())

    def test_quasi_zgamma(self, runner: CliRunner, tmp_path: Path) -> None:
        """Test the quasicrystallic pattern and its comparison function."""
        embedding = tmp_path / "embedding.json"
        args = ["generate", "--offset", "-0.2", "--window", "6", "--out", str(embedding)]
        assert runner.invoke(cli, args).exit_code == 0
        result = runner.invoke(cli, ["zgamma-quasi", str(embedding), "--gamma", "0.8333"])
        assert result.exit_code == 0, result.output
        assert documents.load(result.stdout_bytes).kind == "pattern"
        result = runner.invoke(
            cli, ["--seed", "3", "zgamma-quasi", str(embedding), "--gamma", "1", "--comparison"]
        )
        assert result.exit_code == 0, result.output
        w = documents.decode(documents.load(result.stdout_bytes), "comparison")
        assert all(abs(x - 1) < 1e-9 for x in w.values.values())

    def test_flip(self, runner: CliRunner, tmp_path: Path) -> None:
        """Test a simple flip of a stored surface."""
        omega = cmath.exp(1j * math.pi / 3)
        corner = QuadSurface(
            frozenset({Facet((0, 0, 0), 0, 1), Facet((0, 0, 0), 1, 2), Facet((0, 1, 0), 0, 2)}),
            3,
        )
        path = _write(
            tmp_path / "surface.json",
            "surface",
            documents.surface_payload(corner, (1 + 0j, omega, omega**2)),
        )
        result = runner.invoke(cli, ["flip", path, "--vertex", "0,1,0"])
        assert result.exit_code == 0, result.output
        flipped = documents.decode(documents.load(result.stdout_bytes), "surface")
        assert Facet((0, 0, 0), 0, 2) in flipped.facets
        result = runner.invoke(cli, ["flip", path, "--vertex", "0,0,0"])
        assert result.exit_code == 2

    def test_strip_flip_needs_directions(self, runner: CliRunner, tmp_path: Path) -> None:
        """Test that a strip flip of a surface without directions exits with status 2."""
        omega = cmath.exp(1j * math.pi / 3)
        corner = QuadSurface(
            frozenset({Facet((0, 0, 0), 0, 1), Facet((0, 0, 0), 1, 2), Facet((0, 1, 0), 0, 2)}),
            3,
        )
        args = ["--vertex", "0,0,0", "--axes", "0,1,2"]
        bare = _write(tmp_path / "bare.json", "surface", documents.surface_payload(corner))
        result = runner.invoke(cli, ["flip", bare, *args])
        assert result.exit_code == 2
        path = _write(
            tmp_path / "surface.json",
            "surface",
            documents.surface_payload(corner, (1 + 0j, omega, omega**2)),
        )
        result = runner.invoke(cli, ["flip", path, *args])
        assert result.exit_code == 0, result.output
        flipped = documents.decode(documents.load(result.stdout_bytes), "surface")
        assert Facet((0, 0, 0), 0, 2) in flipped.facets


class TestSquareGrid:
    """Test square-grid Z^gamma, the solver and the checks."""

    def test_map_passes_strict_check(self, runner: CliRunner, tmp_path: Path) -> None:
        """Test that a Z^(3/2) map passes every check."""
        zmap = tmp_path / "map.json"
        result = runner.invoke(
            cli, ["zgamma-sg", "--gamma", "1.5", "--size", "4", "--emit", "map", "--out", str(zmap)]
        )
        assert result.exit_code == 0, result.output
        result = runner.invoke(cli, ["check", str(zmap), "--strict"])
        assert result.exit_code == 0, result.output
        report = documents.load(result.stdout_bytes).payload["data"]
        assert report["pattern"]["ok"] is True
        assert report["zgamma"]["sign_violations"] == []

    def test_strict_violation(
        self, runner: CliRunner, tmp_path: Path, isoradial_grid: CirclePattern
    ) -> None:
        """Test that --strict exits with 4 on an overlapping pattern."""
        last = isoradial_grid.kites[-1]
        broken = isoradial_grid.replace_kite(last.translated(-0.5 - 0.5j))
        path = _write(tmp_path / "pattern.json", "pattern", documents.pattern_payload(broken))
        assert runner.invoke(cli, ["check", path, "--embedded"]).exit_code == 0
        assert runner.invoke(cli, ["check", path, "--embedded", "--strict"]).exit_code == 4

    def test_gamma_out_of_range(self, runner: CliRunner) -> None:
        """Test that gamma outside (0, 2) exits with 2."""
        result = runner.invoke(cli, ["zgamma-sg", "--gamma", "2.5"])
        assert result.exit_code == 2
        assert "error:" in result.output

    def test_solve_problem(self, runner: CliRunner, tmp_path: Path) -> None:
        """Test solving the boundary value problem of Z^(3/2)."""
        problem = tmp_path / "problem.json"
        _problem(runner, problem)
        result = runner.invoke(cli, ["solve", str(problem), "--tol", "1e-12"])
        assert result.exit_code == 0, result.output
        payload = documents.load(result.stdout_bytes).payload
        assert payload["solver"]["converged"] is True
        assert payload["radii"]

    def test_solve_not_converged(self, runner: CliRunner, tmp_path: Path) -> None:
        """Test that a stopped solve still writes its radii and exits with 3."""
        problem = tmp_path / "problem.json"
        _problem(runner, problem)
        out = tmp_path / "radii.json"
        result = runner.invoke(cli, ["solve", str(problem), "--max-iter", "1", "--out", str(out)])
        assert result.exit_code == 3
        assert documents.load(out.read_bytes()).payload["solver"]["converged"] is False

    def test_garbage_input(self, runner: CliRunner) -> None:
        """Test that unreadable documents exit with 2."""
        result = runner.invoke(cli, ["solve", "-"], input="not a document")
        assert result.exit_code == 2

    def test_svg(self, runner: CliRunner, tmp_path: Path) -> None:
        """Test rendering a pattern document."""
        pattern = tmp_path / "pattern.json"
        runner.invoke(cli, ["zgamma-sg", "--gamma", "1.5", "--size", "3", "--out", str(pattern)])
        result = runner.invoke(cli, ["svg", str(pattern), "--no-circles"])
        assert result.exit_code == 0, result.output
        assert result.stdout_bytes.startswith(b"<?xml")
        assert b'class="circle"' not in result.stdout_bytes


class TestAnalyze:
    """Test the measurements."""

    def test_rigidity(self, runner: CliRunner) -> None:
        """Test the rigidity experiment without an input document."""
        result = runner.invoke(cli, ["analyze", "rigidity", "--size", "4"])
        assert result.exit_code == 0, result.output
        data = documents.load(result.stdout_bytes).payload["data"]
        assert data["max_deviation"] < 1e-8

    def test_ratios(self, runner: CliRunner, tmp_path: Path) -> None:
        """Test radius ratios of a pattern document."""
        pattern = tmp_path / "pattern.json"
        runner.invoke(cli, ["zgamma-sg", "--gamma", "1.5", "--size", "4", "--out", str(pattern)])
        result = runner.invoke(cli, ["analyze", "ratios", str(pattern), "--vertex", "0,0"])
        assert result.exit_code == 0, result.output
        data = documents.load(result.stdout_bytes).payload["data"]
        assert data["vertex"] == [0, 0]
        assert "0" in data["ratios"]

    def test_missing_source(self, runner: CliRunner) -> None:
        """Test that document measurements need an input."""
        assert runner.invoke(cli, ["analyze", "ratios"]).exit_code == 2

    def test_invalid_threads(self, runner: CliRunner) -> None:
        """Test that settings errors exit with 2."""
        assert runner.invoke(cli, ["--threads", "0", "analyze", "rigidity"]).exit_code == 2
