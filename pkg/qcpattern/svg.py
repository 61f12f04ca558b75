"""SVG rendering of circle patterns and rhombic embeddings."""

from __future__ import annotations

import logging
import math
import typing as t

from qcpattern.core import CirclePattern
from qcpattern.exceptions import InputError
from qcpattern.settings import SvgOptions

if t.TYPE_CHECKING:
    from qcpattern.projection import LiftedEmbedding

logger = logging.getLogger(__name__)

PADDING = 0.05


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def export_svg(
    item: CirclePattern | LiftedEmbedding,
    options: SvgOptions | None = None,
) -> bytes:
    """Render kites and circles as an SVG 1.1 document.

    An embedding is drawn as its isoradial pattern. Kites come in face order,
    circles in vertex order; the y axis points up.

    Raises:
        InputError: If there is nothing to draw or a coordinate is not finite.
    """
    opts = options or SvgOptions()
    pattern = item if isinstance(item, CirclePattern) else item.isoradial_pattern()
    kites = sorted(pattern.kites, key=lambda k: k.face) if opts.show_kites else []
    circles = sorted(pattern.radii.items()) if opts.show_circles else []
    if not kites and not circles:
        msg = "Nothing to draw: the pattern is empty or every layer is disabled"
        raise InputError(msg)

    s = opts.scale
    xs: list[float] = []
    ys: list[float] = []
    for kite in kites:
        xs.extend(p.real * s for p in kite.points)
        ys.extend(-p.imag * s for p in kite.points)
    for v, r in circles:
        c = pattern.centers[v]
        xs.extend(((c.real - r) * s, (c.real + r) * s))
        ys.extend(((-c.imag - r) * s, (-c.imag + r) * s))
    if not all(math.isfinite(x) for x in (*xs, *ys)):
        msg = "Pattern has non-finite coordinates"
        raise InputError(msg)

    min_x, max_x, min_y, max_y = min(xs), max(xs), min(ys), max(ys)
    pad_x = PADDING * max(max_x - min_x, s)
    pad_y = PADDING * max(max_y - min_y, s)
    min_x, min_y = min_x - pad_x, min_y - pad_y
    w, h = max_x - min_x + pad_x, max_y - min_y + pad_y
    stroke = _fmt(opts.stroke_width * s)

    svg = []
    svg.append('<?xml version="1.0" encoding="UTF-8"?>')
    svg.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="{_fmt(min_x)} {_fmt(min_y)} {_fmt(w)} {_fmt(h)}" '
        f'width="{_fmt(w)}" height="{_fmt(h)}">'
    )
    svg.append("  <style>")
    svg.append(f"    .kite {{ fill: #dde6f0; stroke: #333333; stroke-width: {stroke}; }}")
    svg.append(f"    .circle {{ fill: none; stroke: #b03030; stroke-width: {stroke}; }}")
    svg.append("  </style>")

    for kite in kites:
        pts = [f"{_fmt(p.real * s)},{_fmt(-p.imag * s)}" for p in kite.points]
        d = f"M {pts[0]} L {pts[1]} L {pts[2]} L {pts[3]} Z"
        svg.append(f'  <path class="kite" id="kite-{kite.face}" d="{d}" />')

    for v, r in circles:
        c = pattern.centers[v]
        vid = "_".join(str(x) for x in v)
        svg.append(
            f'  <circle class="circle" id="circle-{vid}" cx="{_fmt(c.real * s)}" '
            f'cy="{_fmt(-c.imag * s)}" r="{_fmt(r * s)}" />'
        )

    svg.append("</svg>")
    logger.debug(f"Rendered {len(kites)} kites and {len(circles)} circles")
    return ("\n".join(svg) + "\n").encode("utf-8")
