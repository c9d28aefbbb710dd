"""Adversarial and inhomogeneous layout generators.

Covers the obstructed-wall layout (a node-free strip crossed only through a
central gap), squarelet thinning, detection of empty regions that actually
detour shortest paths (with their perimeter bound), the comb unit-disk graph
whose cover counts grow without bound, and the sparse-radius position
generator.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import ndimage
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import ParameterError, ProtocolInvariantError
from .geometry import (
    MIN_SUBDIVISION,
    DomainSpec,
    OccupancyReport,
    Position,
    SquareletGrid,
    positions_as_array,
    sample_uniform_positions,
)
from .graph import ConnectivityGraph, build_geometric_graph, greedy_cover

__all__ = [
    "WallTopology",
    "Hole",
    "HoleReport",
    "CombTopology",
    "wall_topology",
    "wall_graph",
    "remove_squarelets",
    "hole_report",
    "comb_udg",
    "subcritical_positions",
    "dump_positions_csv",
]


# ---------------------------------------------------------------------------
# Wall layout
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WallTopology:
    """Uniform layout with a node-free horizontal strip; edges may cross the
    strip only through the central gap."""

    positions: list[Position]
    side: float
    r_n: float
    strip_y: tuple[float, float]
    hole_x: tuple[float, float]

    def blocked_mask(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Vectorized crossing test for segments a[i] -> b[i]."""
        a = np.asarray(a, dtype=float).reshape(-1, 2)
        b = np.asarray(b, dtype=float).reshape(-1, 2)
        lo, hi = self.strip_y
        hole_lo, hole_hi = self.hole_x
        ay, by = a[:, 1], b[:, 1]
        dy = by - ay
        horizontal = dy == 0.0
        inside_band = horizontal & (ay >= lo) & (ay <= hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            t0 = (lo - ay) / dy
            t1 = (hi - ay) / dy
        t_lo = np.clip(np.minimum(t0, t1), 0.0, 1.0)
        t_hi = np.clip(np.maximum(t0, t1), 0.0, 1.0)
        t_lo = np.where(inside_band, 0.0, t_lo)
        t_hi = np.where(inside_band, 1.0, t_hi)
        crossing = inside_band | (~horizontal & (t_lo < t_hi))
        dx = b[:, 0] - a[:, 0]
        x_at_lo = a[:, 0] + t_lo * dx
        x_at_hi = a[:, 0] + t_hi * dx
        x_min = np.minimum(x_at_lo, x_at_hi)
        x_max = np.maximum(x_at_lo, x_at_hi)
        through_gap = (x_min >= hole_lo) & (x_max <= hole_hi)
        return crossing & ~through_gap

    def edge_blocked(self, a: Position, b: Position) -> bool:
        return bool(self.blocked_mask(np.array([a]), np.array([b]))[0])


def wall_topology(
    n: int,
    r_n: float,
    seed: int,
    hole_width: float | None = None,
    c: float = MIN_SUBDIVISION,
) -> WallTopology:
    """Sample n uniform positions, empty the wall strip (width r_n/c at
    mid-height), and return the layout with its crossing predicate."""
    if n < 2:
        raise ParameterError(f"wall layout needs at least two nodes, got {n}")
    if r_n <= math.sqrt(math.log(n)):
        raise ParameterError(
            f"radius {r_n} is below the connectivity threshold sqrt(log n)"
        )
    domain = DomainSpec.for_nodes(n)
    side = domain.side
    width = r_n / c
    strip_lo = side / 2.0 - width / 2.0
    strip_hi = strip_lo + width
    gap = 4.0 * r_n if hole_width is None else hole_width
    if not (0 < gap <= side):
        raise ParameterError(f"gap width {gap} must lie in (0, side]")
    hole_lo = side / 2.0 - gap / 2.0
    hole_hi = side / 2.0 + gap / 2.0
    sampled = sample_uniform_positions(n, domain, seed)
    kept = [p for p in sampled if not (strip_lo <= p.y <= strip_hi)]
    return WallTopology(
        positions=kept,
        side=side,
        r_n=r_n,
        strip_y=(strip_lo, strip_hi),
        hole_x=(hole_lo, hole_hi),
    )


def wall_graph(wall: WallTopology) -> ConnectivityGraph:
    """Distance graph on the wall layout minus the blocked crossings."""
    g = build_geometric_graph(wall.positions, wall.r_n)
    coo = g.csr.tocoo()
    upper = coo.row < coo.col
    rows = coo.row[upper]
    cols = coo.col[upper]
    arr = positions_as_array(wall.positions)
    blocked = wall.blocked_mask(arr[rows], arr[cols])
    pairs = np.column_stack([rows[~blocked], cols[~blocked]]).astype(np.int64)
    return ConnectivityGraph._from_pair_array(g.n, pairs)


# ---------------------------------------------------------------------------
# Squarelet thinning
# ---------------------------------------------------------------------------


def remove_squarelets(
    positions: Sequence[Position],
    cells_to_empty: Iterable[tuple[int, int]],
    grid: SquareletGrid,
) -> list[Position]:
    """Drop every node whose cell is listed; leave the rest untouched."""
    doomed = set(cells_to_empty)
    m = grid.cells_per_side
    for i, j in doomed:
        if not (0 <= i < m and 0 <= j < m):
            raise ParameterError(f"cell ({i}, {j}) outside the {m}x{m} grid")
    if not doomed:
        return list(positions)
    kept = []
    for p in positions:
        i = min(math.floor(p.x / grid.cell_side), m - 1)
        j = min(math.floor(p.y / grid.cell_side), m - 1)
        if (i, j) not in doomed:
            kept.append(p)
    return kept


# ---------------------------------------------------------------------------
# Empty-region (hole) analysis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Hole:
    """A maximal empty-cell component whose virtual filling shortens some
    cell-to-cell distance; perimeter is twice the longest way around."""

    cells: frozenset[tuple[int, int]]
    perimeter: float


@dataclass(frozen=True)
class HoleReport:
    holes: list[Hole]
    p_max: float
    doubling_bound: float


_EIGHT = np.ones((3, 3), dtype=int)
_SHIFTS = ((0, 1), (1, 0), (1, 1), (1, -1))


def _cell_distances(mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All-pairs hop distances between True cells under 8-neighborhood moves.

    Returns (dist matrix over compact ids, compact id per cell or -1)."""
    count = int(mask.sum())
    idx = np.full(mask.shape, -1, dtype=np.int64)
    idx[mask] = np.arange(count)
    rows_acc = []
    cols_acc = []
    m = mask.shape[0]
    for di, dj in _SHIFTS:
        i0, i1 = max(0, -di), min(m, m - di)
        j0, j1 = max(0, -dj), min(m, m - dj)
        both = mask[i0:i1, j0:j1] & mask[i0 + di : i1 + di, j0 + dj : j1 + dj]
        ii, jj = np.nonzero(both)
        ii = ii + i0
        jj = jj + j0
        rows_acc.append(idx[ii, jj])
        cols_acc.append(idx[ii + di, jj + dj])
    if rows_acc and sum(len(r) for r in rows_acc):
        r = np.concatenate(rows_acc)
        c = np.concatenate(cols_acc)
        data = np.ones(2 * len(r), dtype=np.int8)
        adj = csr_matrix(
            (data, (np.concatenate([r, c]), np.concatenate([c, r]))),
            shape=(count, count),
        )
    else:
        adj = csr_matrix((count, count), dtype=np.int8)
    return dijkstra(adj, unweighted=True), idx


def hole_report(occupancy: OccupancyReport) -> HoleReport:
    """Find empty-cell components that actually detour shortest cell paths.

    A component qualifies only if virtually filling it shortens the distance
    between some pair of occupied cells by at least two steps; the test is
    run exactly (full before/after BFS), not approximated. One step is the
    8-neighborhood grid's discretization slack: a lone empty cell shaves a
    single step off diagonal chains while axis-aligned crossings detour via
    a corner at equal length, so it obstructs nothing. Qualifying components
    get perimeter p = 2x the maximum pairwise distance among their occupied
    border cells (measured around the component)."""
    occupied = occupancy.counts > 0
    empty = ~occupied
    if not empty.any():
        return HoleReport(holes=[], p_max=1.0, doubling_bound=1.0)
    labels, k = ndimage.label(empty, structure=_EIGHT)
    base_dist, base_idx = _cell_distances(occupied)
    occ_ids = base_idx[occupied]
    holes: list[Hole] = []
    for comp in range(1, k + 1):
        comp_mask = labels == comp
        filled_dist, filled_idx = _cell_distances(occupied | comp_mask)
        occ_ids_filled = filled_idx[occupied]
        before = base_dist[np.ix_(occ_ids, occ_ids)]
        after = filled_dist[np.ix_(occ_ids_filled, occ_ids_filled)]
        if not (after < before - 1.0).any():
            continue
        border = ndimage.binary_dilation(comp_mask, structure=_EIGHT) & occupied
        border_ids = base_idx[border]
        if len(border_ids) >= 2:
            perimeter = 2.0 * float(base_dist[np.ix_(border_ids, border_ids)].max())
        else:
            perimeter = 0.0
        cells = frozenset((int(i), int(j)) for i, j in np.argwhere(comp_mask))
        holes.append(Hole(cells=cells, perimeter=perimeter))
    p_max = max((h.perimeter for h in holes), default=1.0)
    return HoleReport(holes=holes, p_max=p_max, doubling_bound=p_max * p_max)


# ---------------------------------------------------------------------------
# Comb unit-disk graph
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CombTopology:
    graph: ConnectivityGraph
    positions: list[Position]
    center_id: int
    radius: int


def comb_udg(radius: int) -> CombTopology:
    """Finite comb: a spine of 4R+1 unit-spaced nodes with height-2R branches
    on every second column. Unit communication radius (strict rule applied at
    1.2 links exactly the distance-1 pairs of the integer layout).

    The construction exists to defeat bounded cover growth: covering the
    center's 2R-ball at radius R provably needs at least R/4 centers, which is
    re-checked on every call."""
    if radius < 4 or radius % 2 != 0:
        raise ParameterError(f"branch radius must be even and at least 4, got {radius}")
    positions = [Position(float(x), 0.0) for x in range(4 * radius + 1)]
    for x in range(0, 4 * radius + 1, 2):
        positions.extend(Position(float(x), float(h)) for h in range(1, 2 * radius + 1))
    graph = build_geometric_graph(positions, 1.2)
    center_id = 2 * radius
    cover = greedy_cover(graph, center_id, radius)
    if len(cover) < math.ceil(radius / 4):
        raise ProtocolInvariantError(
            f"comb cover count {len(cover)} fell below the {radius}/4 bound"
        )
    return CombTopology(
        graph=graph, positions=positions, center_id=center_id, radius=radius
    )


# ---------------------------------------------------------------------------
# Sparse-radius regime
# ---------------------------------------------------------------------------


def subcritical_positions(
    n: int, theta: float, seed: int, log_base: float = math.e
) -> tuple[list[Position], float]:
    """Uniform positions with radius (log n)^((1-theta)/2): below the
    connectivity threshold for every theta in (0, 1]."""
    if not (0.0 < theta <= 1.0):
        raise ParameterError(f"theta must lie in (0, 1], got {theta}")
    if n < 2:
        raise ParameterError(f"need at least two nodes, got {n}")
    if log_base <= 1.0:
        raise ParameterError(f"log base must exceed 1, got {log_base}")
    r_n = (math.log(n) / math.log(log_base)) ** ((1.0 - theta) / 2.0)
    positions = sample_uniform_positions(n, DomainSpec.for_nodes(n), seed)
    return positions, r_n


# ---------------------------------------------------------------------------
# Position dump
# ---------------------------------------------------------------------------


def dump_positions_csv(positions: Sequence[Position], path) -> None:
    """Write node_id,x,y rows (full float precision)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node_id", "x", "y"])
        for i, p in enumerate(positions):
            writer.writerow([i, p.x, p.y])
