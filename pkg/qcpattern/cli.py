"""Command-line interface: every pipeline step reads and writes documents."""

from __future__ import annotations

import logging
import math
import sys
import typing as t
from pathlib import Path

import click
import numpy as np

from qcpattern import analysis, documents
from qcpattern.core import check_pattern, rhombic_pattern
from qcpattern.exceptions import InputError, QCPatternError
from qcpattern.hirota import zgamma_extension
from qcpattern.projection import coordinate_plane, generate_embedding, symmetric_plane
from qcpattern.settings import Settings, SvgOptions, configure_logging
from qcpattern.sg import map_to_pattern, zgamma_checks, zgamma_map
from qcpattern.solver import RadiusProblem, solve_radii
from qcpattern.surface import lift_embedding, project_surface, simple_flip, strip_flip
from qcpattern.svg import export_svg

if sys.version_info >= (3, 12):
    from typing import override
else:
    from typing_extensions import override

if t.TYPE_CHECKING:
    from qcpattern.documents import DocumentEnvelope

logger = logging.getLogger(__name__)

STRICT_EXIT = 4


class PipelineGroup(click.Group):
    """Click group that turns qcpattern errors into their exit codes."""

    @override
    def invoke(self, ctx: click.Context) -> t.Any:
        try:
            return super().invoke(ctx)
        except QCPatternError as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(exc.exit_code)


def _settings(ctx: click.Context) -> Settings:
    return ctx.find_object(Settings) or Settings()


def _coords(raw: str | None) -> tuple[int, ...] | None:
    if raw is None:
        return None
    try:
        return tuple(int(x) for x in raw.split(","))
    except ValueError as exc:
        msg = f"Expected comma separated integers, got {raw!r}"
        raise InputError(msg) from exc


def _read(path: str) -> DocumentEnvelope:
    stream = click.open_file(path, "rb")
    with stream:
        return documents.load(stream.read())


def _emit(data: bytes, out: str) -> None:
    if out == "-":
        click.get_binary_stream("stdout").write(data)
    else:
        Path(out).write_bytes(data)


def _write(ctx: click.Context, kind: str, payload: dict[str, t.Any], out: str) -> None:
    parameters = {k: v for k, v in ctx.params.items() if k not in {"source", "out"}}
    doc = documents.DocumentEnvelope(
        kind=kind,
        payload=payload,
        provenance={"command": ctx.info_name, "parameters": parameters},
    )
    _emit(documents.save(doc), out)


out_option = click.option(
    "--out",
    default="-",
    show_default=True,
    help="Output file, - for stdout.",
)
source_argument = click.argument("source", default="-")


@click.group(cls=PipelineGroup)
@click.option("--config", type=click.Path(dir_okay=False), help="JSON settings file.")
@click.option("--threads", type=int, help="Worker thread cap (also QCP_THREADS).")
@click.option("--seed", type=int, help="Seed of randomised procedures (also QCP_SEED).")
@click.pass_context
def cli(ctx: click.Context, config: str | None, threads: int | None, seed: int | None) -> None:
    """Quasicrystallic circle patterns from the command line."""
    settings = Settings.from_sources(config, threads=threads, seed=seed)
    configure_logging(settings.log_level)
    ctx.obj = settings


@cli.command()
@click.option("--folds", type=int, default=5, show_default=True, help="Odd fold number, or 2.")
@click.option(
    "--offset",
    type=float,
    default=0.0,
    show_default=True,
    help="Plane offset t, used for both coordinates when --folds 2.",
)
@click.option("--window", type=float, default=8.0, show_default=True, help="Window radius.")
@out_option
@click.pass_context
def generate(ctx: click.Context, folds: int, offset: float, window: float, out: str) -> None:
    """Rhombic embedding of a plane through the window."""
    if folds == 2:  # noqa: PLR2004
        plane = coordinate_plane((offset, offset))
    else:
        plane = symmetric_plane(folds, offset)
    embedding = generate_embedding(plane, window)
    _write(ctx, "embedding", documents.embedding_payload(embedding), out)


@cli.command()
@source_argument
@click.option("--origin", help="White vertex placed at the origin, e.g. 0,1,0,0,1.")
@out_option
@click.pass_context
def lift(ctx: click.Context, source: str, origin: str | None, out: str) -> None:
    """Quad-surface in Z^d of an embedding."""
    embedding = documents.decode(_read(source), "embedding")
    surface = lift_embedding(embedding, _coords(origin))
    _write(ctx, "surface", documents.surface_payload(surface, embedding.directions), out)


@cli.command()
@source_argument
@out_option
@click.pass_context
def project(ctx: click.Context, source: str, out: str) -> None:
    """Isoradial pattern of a quad-surface projected with its directions."""
    doc = _read(source)
    surface = documents.decode(doc, "surface")
    directions = documents.surface_directions(doc.payload)
    if directions is None:
        msg = "The surface document carries no projection directions"
        raise InputError(msg)
    graph, positions = project_surface(surface, directions)
    _write(ctx, "pattern", documents.pattern_payload(rhombic_pattern(graph, positions)), out)


@cli.command()
@source_argument
@click.option("--vertex", required=True, help="Flip vertex, e.g. 1,0,1.")
@click.option("--axes", help="Strip axes j1,j2,j3; omit for a simple flip.")
@click.option(
    "--half",
    type=click.Choice(["+", "-", "both"]),
    default="+",
    show_default=True,
    help="Direction of a strip flip.",
)
@out_option
@click.pass_context
def flip(
    ctx: click.Context,
    source: str,
    vertex: str,
    axes: str | None,
    half: str,
    out: str,
) -> None:
    """Simple or strip flip of a quad-surface."""
    doc = _read(source)
    surface = documents.decode(doc, "surface")
    directions = documents.surface_directions(doc.payload)
    at = _coords(vertex)
    strip = _coords(axes)
    if strip is None:
        flipped = simple_flip(surface, at)  # type: ignore[arg-type]
    elif len(strip) != 3:  # noqa: PLR2004
        msg = f"--axes needs three axes, got {axes}"
        raise InputError(msg)
    else:
        flipped = strip_flip(surface, at, strip, half, directions)  # type: ignore[arg-type]
    _write(ctx, "surface", documents.surface_payload(flipped, directions), out)


@cli.command("zgamma-sg")
@click.option("--gamma", type=float, required=True, help="Exponent in (0, 2).")
@click.option("--psi", type=float, default=math.pi / 2, show_default=True, help="Angle psi.")
@click.option("--size", type=int, default=10, show_default=True, help="Generations N.")
@click.option(
    "--emit",
    type=click.Choice(["pattern", "map", "problem"]),
    default="pattern",
    show_default=True,
)
@out_option
@click.pass_context
def zgamma_sg(
    ctx: click.Context,
    gamma: float,
    psi: float,
    size: int,
    emit: str,
    out: str,
) -> None:
    """Square-grid Z^gamma map, its circle pattern or its boundary value problem."""
    zmap = zgamma_map(gamma, psi, size)
    if emit == "map":
        _write(ctx, "map", documents.map_payload(zmap), out)
        return
    pattern = map_to_pattern(zmap)
    if emit == "problem":
        _write(ctx, "problem", documents.problem_payload(RadiusProblem.from_pattern(pattern)), out)
        return
    _write(ctx, "pattern", documents.pattern_payload(pattern), out)


@cli.command("zgamma-quasi")
@source_argument
@click.option("--gamma", type=float, required=True, help="Exponent in (0, 2).")
@click.option("--theta1", type=float, help="Argument of the first edge direction.")
@click.option("--shuffle", is_flag=True, help="Random fill order drawn from --seed.")
@click.option("--comparison", is_flag=True, help="Emit the comparison function instead.")
@out_option
@click.pass_context
def zgamma_quasi(
    ctx: click.Context,
    source: str,
    gamma: float,
    theta1: float | None,
    shuffle: bool,  # noqa: FBT001
    comparison: bool,  # noqa: FBT001
    out: str,
) -> None:
    """Quasicrystallic Z^gamma pattern on the octant part of an embedding."""
    embedding = documents.decode(_read(source), "embedding")
    rng = np.random.default_rng(_settings(ctx).seed) if shuffle else None
    result = zgamma_extension(embedding, gamma, theta1, rng=rng)
    if comparison:
        _write(ctx, "comparison", documents.comparison_payload(result.comparison), out)
    else:
        _write(ctx, "pattern", documents.pattern_payload(result.pattern()), out)


@cli.command()
@source_argument
@click.option("--tol", type=float, help="Residual tolerance (default from settings).")
@click.option("--max-iter", type=int, help="Newton iteration cap (default from settings).")
@out_option
@click.pass_context
def solve(
    ctx: click.Context,
    source: str,
    tol: float | None,
    max_iter: int | None,
    out: str,
) -> None:
    """Solve a radius problem (or the boundary value problem of a pattern)."""
    settings = _settings(ctx)
    doc = _read(source)
    obj = documents.decode(doc, "problem", "pattern")
    problem = obj if isinstance(obj, RadiusProblem) else RadiusProblem.from_pattern(obj)
    radii, report = solve_radii(
        problem,
        tol=settings.tol if tol is None else tol,
        max_iter=settings.max_iter if max_iter is None else max_iter,
    )
    _write(ctx, "radii", documents.radii_payload(radii, report.to_dict()), out)
    if not report.converged:
        click.echo(f"error: radius solve did not converge ({report.residual:.3e})", err=True)
        ctx.exit(3)


@cli.command()
@source_argument
@click.option("--immersed", is_flag=True, help="Kite and angle consistency.")
@click.option("--embedded", is_flag=True, help="No overlapping kites.")
@click.option("--convex", is_flag=True, help="All kites convex.")
@click.option("--closing", is_flag=True, help="Closing condition at interior vertices.")
@click.option("--strict", is_flag=True, help="Exit 4 when a check finds violations.")
@out_option
@click.pass_context
def check(  # noqa: PLR0913
    ctx: click.Context,
    source: str,
    immersed: bool,  # noqa: FBT001
    embedded: bool,  # noqa: FBT001
    convex: bool,  # noqa: FBT001
    closing: bool,  # noqa: FBT001
    strict: bool,  # noqa: FBT001
    out: str,
) -> None:
    """Validity checks of a pattern, plus the Z^gamma checks for a map."""
    chosen = [
        name
        for name, flag in (
            ("immersed", immersed),
            ("embedded", embedded),
            ("convex", convex),
            ("closing", closing),
        )
        if flag
    ] or ["immersed", "embedded", "convex"]
    doc = _read(source)
    obj = documents.decode(doc, "pattern", "map")
    if doc.kind == "map":
        pattern = map_to_pattern(obj)
        extra = zgamma_checks(obj)
        ok = extra.ok
        data = {"zgamma": extra.to_dict()}
    else:
        pattern, ok, data = obj, True, {}
    report = check_pattern(pattern, chosen, threads=_settings(ctx).threads)
    data["pattern"] = report.to_dict()
    _write(ctx, "report", documents.report_payload("check", data), out)
    if strict and not (ok and report.ok):
        ctx.exit(STRICT_EXIT)


@cli.command()
@click.argument(
    "measurement",
    type=click.Choice(["subharmonicity", "ratios", "resistance", "rigidity"]),
)
@click.argument("source", required=False)
@click.option("--reference", help="Pattern document of the comparison radii rho.")
@click.option("--vertex", help="Base white vertex, e.g. 0,0.")
@click.option("--annuli", type=int, default=10, show_default=True, help="Annulus count K.")
@click.option("--width", type=float, default=4.0, show_default=True, help="Annulus width.")
@click.option("--gamma", type=float, default=1.5, show_default=True, help="Exponent.")
@click.option("--psi", type=float, default=math.pi / 2, show_default=True, help="Angle psi.")
@click.option("--size", type=int, default=10, show_default=True, help="Generations.")
@click.option("--perturbation", type=float, default=0.0, show_default=True)
@out_option
@click.pass_context
def analyze(  # noqa: PLR0913
    ctx: click.Context,
    measurement: str,
    source: str | None,
    reference: str | None,
    vertex: str | None,
    annuli: int,
    width: float,
    gamma: float,
    psi: float,
    size: int,
    perturbation: float,
    out: str,
) -> None:
    """Subharmonicity, radius ratios, shortened resistance or the rigidity experiment."""
    settings = _settings(ctx)
    if measurement == "rigidity":
        result = analysis.rigidity_experiment(
            gamma, psi, size, perturbation, tol=min(settings.tol, 1e-12), max_iter=settings.max_iter
        )
        _write(ctx, "report", documents.report_payload(measurement, result.to_dict()), out)
        return
    if source is None:
        msg = f"{measurement} needs an input document"
        raise InputError(msg)
    doc = _read(source)
    base = _coords(vertex)

    if measurement == "resistance":
        embedding = documents.decode(doc, "embedding")
        profile = analysis.shortened_resistance(embedding, base or embedding.seed, annuli, width)
        data = profile.to_dict()
    else:
        pattern = documents.decode(doc, "pattern", "embedding")
        if not hasattr(pattern, "radii"):
            pattern = pattern.isoradial_pattern()
        if measurement == "ratios":
            start = base or min(pattern.graph.white)
            stats = analysis.generation_ratio_stats(pattern, start)
            data = {"vertex": list(start), "ratios": {str(k): v for k, v in stats.items()}}
        else:
            if reference is None:
                rho = dict.fromkeys(pattern.radii, 1.0)
            else:
                rho = documents.decode(_read(reference), "pattern").radii
            result = analysis.subharmonicity_check(
                pattern.radii, rho, pattern.graph, pattern.labelling
            )
            data = result.to_dict()
    _write(ctx, "report", documents.report_payload(measurement, data), out)


@cli.command()
@source_argument
@click.option("--circles/--no-circles", default=None, help="Draw circles.")
@click.option("--kites/--no-kites", default=None, help="Draw kites.")
@click.option("--stroke-width", type=float, help="Stroke width in pattern units.")
@click.option("--scale", type=float, help="Pixels per pattern unit.")
@out_option
@click.pass_context
def svg(  # noqa: PLR0913
    ctx: click.Context,
    source: str,
    circles: bool | None,  # noqa: FBT001
    kites: bool | None,  # noqa: FBT001
    stroke_width: float | None,
    scale: float | None,
    out: str,
) -> None:
    """Render a pattern or embedding document as SVG."""
    defaults = _settings(ctx).svg
    options = SvgOptions(
        show_circles=defaults.show_circles if circles is None else circles,
        show_kites=defaults.show_kites if kites is None else kites,
        stroke_width=defaults.stroke_width if stroke_width is None else stroke_width,
        scale=defaults.scale if scale is None else scale,
    )
    item = documents.decode(_read(source), "pattern", "embedding")
    _emit(export_svg(item, options), out)
