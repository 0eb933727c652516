"""Tessellation of the demand matrix into tiles, and server assignment.

A tile is a rectangular block of F that one group of servers will handle on
its own. Four families cover every case: C1 are the full Delta x Gamma blocks
laid out from the top-left corner, C2 is the right-hand strip left over when
Gamma does not divide L, C3 the bottom strip when Delta does not divide K, and
C4 the corner block where both remainders meet. Families whose dimension is
zero are omitted entirely.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .capacity import min_tile_count  # covering bound lives with the other closed forms
from .core import InfeasibleError, ParameterError, SchemeParams, ceil_div, validate

__all__ = [
    "Family",
    "Tile",
    "TilePlan",
    "build_tessellation",
    "allocate_servers",
    "check_coverage",
    "check_disjoint",
    "min_tile_count",
    "render_ascii",
    "render_svg",
]


class Family(str, Enum):
    C1 = "C1"  # full Delta x Gamma interior blocks
    C2 = "C2"  # right strip, Delta x (L mod Gamma)
    C3 = "C3"  # bottom strip, (K mod Delta) x Gamma
    C4 = "C4"  # corner, (K mod Delta) x (L mod Gamma)


@dataclass(frozen=True)
class Tile:
    """One block of the tessellation.

    row_set/col_set are the covered indices (0-based, stored in order). The
    rank ceiling is min(|row_set|, |col_set|); allocated_rank is how much of
    it the scheme actually uses, and server_ids the servers that carry it.
    """

    tile_id: int
    row_set: tuple[int, ...]
    col_set: tuple[int, ...]
    family: Family
    allocated_rank: int = 0
    server_ids: tuple[int, ...] = ()

    @property
    def max_rank(self) -> int:
        return min(len(self.row_set), len(self.col_set))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.row_set), len(self.col_set)


@dataclass(frozen=True)
class TilePlan:
    tiles: tuple[Tile, ...]
    params: SchemeParams

    def __len__(self) -> int:
        return len(self.tiles)


def build_tessellation(params: SchemeParams) -> TilePlan:
    """Lay out the tiles for a validated parameter tuple.

    Enumeration order is fixed for reproducibility: C1 row-major, then the
    right strip top to bottom, the bottom strip left to right, the corner
    last. The result always has exactly ceil(K/Delta)*ceil(L/Gamma) tiles.
    """
    p = validate(params, allow_reduced_budget=True)
    K, L, D, G = p.K, p.L, p.Delta, p.Gamma
    kq, kr = divmod(K, D)
    lq, lr = divmod(L, G)
    tiles: list[Tile] = []

    def add(rows: range, cols: range, fam: Family) -> None:
        tiles.append(Tile(len(tiles), tuple(rows), tuple(cols), fam))

    for bi in range(kq):
        for bj in range(lq):
            add(range(bi * D, (bi + 1) * D), range(bj * G, (bj + 1) * G), Family.C1)
    if lr:
        for bi in range(kq):
            add(range(bi * D, (bi + 1) * D), range(lq * G, L), Family.C2)
    if kr:
        for bj in range(lq):
            add(range(kq * D, K), range(bj * G, (bj + 1) * G), Family.C3)
    if kr and lr:
        add(range(kq * D, K), range(lq * G, L), Family.C4)
    return TilePlan(tuple(tiles), p)


def allocate_servers(
    plan: TilePlan,
    mode: str = "lossless",
    *,
    N: int | None = None,
    ranks: list[int] | None = None,
) -> TilePlan:
    """Assign ranks and server ids to every tile.

    lossless: each tile gets its full rank and ceil(rank/T) servers; fails if
    the plan's N cannot accommodate the total. lossy: caller supplies the
    per-tile ranks (see factorization.rank_budget) and a server budget N;
    tiles with rank 0 consume no servers.

    Servers are handed out contiguously in tile order, so the used servers
    always form a prefix of [0, N).
    """
    p = plan.params
    if mode == "lossless":
        ranks = [t.max_rank for t in plan.tiles]
        budget = p.N
    elif mode == "lossy":
        if ranks is None:
            raise ParameterError("lossy allocation needs explicit per-tile ranks")
        if len(ranks) != len(plan.tiles):
            raise ParameterError("one rank per tile required")
        budget = p.N if N is None else N
    else:
        raise ParameterError(f"unknown allocation mode {mode!r}")

    needed = sum(ceil_div(q, p.T) for q in ranks if q > 0)
    if needed > budget:
        raise InfeasibleError(
            f"{mode} allocation needs {needed} servers but only {budget} are available")

    out: list[Tile] = []
    cursor = 0
    for tile, q in zip(plan.tiles, ranks):
        if q < 0 or q > tile.max_rank:
            raise ParameterError(
                f"tile {tile.tile_id}: rank {q} outside [0, {tile.max_rank}]")
        span = ceil_div(q, p.T) if q > 0 else 0
        out.append(replace(tile, allocated_rank=q,
                           server_ids=tuple(range(cursor, cursor + span))))
        cursor += span
    return TilePlan(tuple(out), p)


def check_coverage(plan: TilePlan) -> tuple[bool, list[tuple[int, int]]]:
    """True when every cell of the K x L grid lies in some tile; otherwise the
    uncovered cells are listed."""
    grid = _cell_counts(plan)
    uncovered = [(int(i), int(j)) for i, j in zip(*np.nonzero(grid == 0))]
    return (not uncovered), uncovered


def check_disjoint(plan: TilePlan) -> tuple[bool, list[tuple[int, int]]]:
    """True when no cell is claimed by two tiles; otherwise the doubly covered
    cells are listed."""
    grid = _cell_counts(plan)
    overlapped = [(int(i), int(j)) for i, j in zip(*np.nonzero(grid > 1))]
    return (not overlapped), overlapped


def _cell_counts(plan: TilePlan) -> np.ndarray:
    grid = np.zeros((plan.params.K, plan.params.L), dtype=np.int32)
    for t in plan.tiles:
        grid[np.ix_(t.row_set, t.col_set)] += 1
    return grid


_GLYPHS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"


def render_ascii(plan: TilePlan) -> str:
    """One character per cell, letters identifying tiles (reused cyclically
    when there are more tiles than glyphs)."""
    K, L = plan.params.K, plan.params.L
    canvas = [["." for _ in range(L)] for _ in range(K)]
    for t in plan.tiles:
        ch = _GLYPHS[t.tile_id % len(_GLYPHS)]
        for i in t.row_set:
            for j in t.col_set:
                canvas[i][j] = ch
    return "\n".join("".join(row) for row in canvas)


def render_svg(plan: TilePlan, *, cell: int = 24) -> str:
    """Tiles as colored rectangles with their ids; plain SVG, no dependencies."""
    K, L = plan.params.K, plan.params.L
    w, h = L * cell, K * cell
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
    ]
    for t in plan.tiles:
        hue = (t.tile_id * 47) % 360
        x, y = min(t.col_set) * cell, min(t.row_set) * cell
        tw, th = len(t.col_set) * cell, len(t.row_set) * cell
        parts.append(
            f'<rect x="{x}" y="{y}" width="{tw}" height="{th}" '
            f'fill="hsl({hue},65%,72%)" stroke="black" stroke-width="1"/>')
        parts.append(
            f'<text x="{x + tw / 2}" y="{y + th / 2}" font-size="{cell // 2}" '
            f'text-anchor="middle" dominant-baseline="middle">{t.tile_id}</text>')
    parts.append("</svg>")
    return "\n".join(parts)
