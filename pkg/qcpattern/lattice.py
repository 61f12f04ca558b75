"""Integer lattice helpers shared by the projection, surface and hirota modules."""

from __future__ import annotations

import typing as t

if t.TYPE_CHECKING:
    from collections.abc import Sequence

Coord = tuple[int, ...]


class Facet(t.NamedTuple):
    """Unit 2-facet of Z^d spanned by the axes j < l at a base point."""

    base: Coord
    j: int
    l: int  # noqa: E741

    def corners(self) -> tuple[Coord, Coord, Coord, Coord]:
        """Corners in the cyclic order base, +e_j, +e_j+e_l, +e_l."""
        b = self.base
        return (b, shift(b, self.j), shift(shift(b, self.j), self.l), shift(b, self.l))

    def translate(self, axis: int, step: int = 1) -> Facet:
        """Facet moved by `step` along `axis`."""
        return Facet(shift(self.base, axis, step), self.j, self.l)


def shift(coord: Coord, axis: int, step: int = 1) -> Coord:
    """Return `coord + step * e_axis`."""
    return (*coord[:axis], coord[axis] + step, *coord[axis + 1 :])


def is_white(coord: Coord) -> bool:
    """Even coordinate sum is white."""
    return sum(coord) % 2 == 0


def facet_from_corners(corners: Sequence[Coord]) -> Facet | None:
    """Recognise four lattice points as the corners of a unit facet.

    Returns:
        The facet, or None if the points are not the corners of one.
    """
    if len({*corners}) != 4:  # noqa: PLR2004
        return None
    base = tuple(min(c[k] for c in corners) for k in range(len(corners[0])))
    spread = [k for k in range(len(base)) if max(c[k] for c in corners) != base[k]]
    if len(spread) != 2:  # noqa: PLR2004
        return None
    facet = Facet(base, spread[0], spread[1])
    if set(facet.corners()) != set(corners):
        return None
    return facet


def oriented_corners(facet: Facet, directions: Sequence[complex]) -> tuple[Coord, ...]:
    """Corners of a facet counter-clockwise in the projection, white corner first.

    Args:
        facet: The facet.
        directions: Planar image a_k of every axis.

    Returns:
        The four corners (white, black, white, black).
    """
    c0, c1, c2, c3 = facet.corners()
    a_j, a_l = directions[facet.j], directions[facet.l]
    ccw = (a_j.conjugate() * a_l).imag > 0
    order = (c0, c1, c2, c3) if ccw else (c0, c3, c2, c1)
    if not is_white(order[0]):
        order = (*order[1:], order[0])
    return order


def project(coord: Coord, directions: Sequence[complex]) -> complex:
    """Planar position sum_k n_k a_k."""
    return complex(sum(n * a for n, a in zip(coord, directions, strict=True)))
