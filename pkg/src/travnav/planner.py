"""8-connected A* over the master costmap.

Step cost is step_length * (1 + lam * c / 253) with c the destination cell
cost. Costs are accumulated exactly as integer (cardinal, diagonal) weight
pairs so total costs compare exactly (a + b*sqrt(2) with integer a, b is
unique), making optimality reproducible bit-for-bit.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .costmap import LETHAL

DEFAULT_LAMBDA = 10

_SQRT2 = math.sqrt(2.0)

# (dx, dy, diagonal)
_NEIGHBORS = [
    (1, 0, False), (-1, 0, False), (0, 1, False), (0, -1, False),
    (1, 1, True), (1, -1, True), (-1, 1, True), (-1, -1, True),
]


@dataclass
class Path:
    waypoints: list  # world (x, y) cell centers
    total_cost: float
    cells: list  # (ix, iy) grid cells


class PlanningError(Exception):
    pass


def _exact_less(a1, b1, a2, b2):
    """a1 + b1*sqrt(2) < a2 + b2*sqrt(2), all integers, exactly."""
    d = a2 - a1
    e = b1 - b2
    # inequality <=> e*sqrt(2) < d
    if e == 0:
        return d > 0
    if e > 0:
        return d > 0 and 2 * e * e < d * d
    # e < 0: lhs negative
    if d >= 0:
        return True
    return 2 * e * e > d * d


def plan(costmap, start, goal, lam: int = DEFAULT_LAMBDA):
    """Plan from world `start` to world `goal` over `costmap.master`.

    Returns a Path or None when the goal is unreachable or lethal.
    Raises PlanningError for out-of-grid coordinates or a lethal start cell.
    """
    spec = costmap.spec
    grid = costmap.master
    sx, sy = spec.world_to_cell(*start)
    gx, gy = spec.world_to_cell(*goal)
    if not spec.contains_cell(sx, sy) or not spec.contains_cell(gx, gy):
        raise PlanningError("start or goal outside grid")
    if grid[sy, sx] >= LETHAL:
        raise PlanningError("start cell is lethal")
    if grid[gy, gx] >= LETHAL:
        return None
    if (sx, sy) == (gx, gy):
        return Path([spec.cell_center(sx, sy)], 0.0, [(sx, sy)])

    res = spec.resolution
    w, h = spec.width, spec.height

    def gfloat(a, b):
        return res * (a + b * _SQRT2) / 253.0

    def heuristic(x, y):
        return math.hypot(x - gx, y - gy) * res

    best = {}  # cell -> (a, b)
    came = {}
    start_cell = (sx, sy)
    best[start_cell] = (0, 0)
    # heap entries: (f, -g_float, row_major, cell, a, b)
    heap = [(heuristic(sx, sy), 0.0, sy * w + sx, start_cell, 0, 0)]

    goal_cell = (gx, gy)
    while heap:
        f, neg_g, _rm, cell, a, b = heapq.heappop(heap)
        if best.get(cell) != (a, b):
            continue  # stale entry
        if cell == goal_cell:
            break
        cx, cy = cell
        for dx, dy, diag in _NEIGHBORS:
            nx, ny = cx + dx, cy + dy
            if not (0 <= nx < w and 0 <= ny < h):
                continue
            c = int(grid[ny, nx])
            if c >= LETHAL:
                continue
            if diag:
                # no corner cutting: both adjacent cardinals must be passable
                if grid[cy, cx + dx] >= LETHAL or grid[cy + dy, cx] >= LETHAL:
                    continue
            weight = 253 + lam * c
            na, nb = (a, b + weight) if diag else (a + weight, b)
            ncell = (nx, ny)
            old = best.get(ncell)
            if old is None or _exact_less(na, nb, old[0], old[1]):
                best[ncell] = (na, nb)
                came[ncell] = cell
                ng = gfloat(na, nb)
                heapq.heappush(
                    heap, (ng + heuristic(nx, ny), -ng, ny * w + nx, ncell, na, nb)
                )

    if goal_cell not in best:
        return None
    cells = [goal_cell]
    while cells[-1] != start_cell:
        cells.append(came[cells[-1]])
    cells.reverse()
    a, b = best[goal_cell]
    return Path([spec.cell_center(ix, iy) for ix, iy in cells], gfloat(a, b), cells)
