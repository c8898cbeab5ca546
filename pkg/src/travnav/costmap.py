"""Layered action-aware costmap.

Layers: static (scenario map), obstacle (untraversable LiDAR hits with beam
clearing), and a traversable-override flag layer that forces master cost to 0.
Master = inflate(max(static, obstacle)) with overridden cells forced to 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

FREESPACE = 0
LETHAL = 254
INSCRIBED = 253

DEFAULT_RESOLUTION = 0.05
DEFAULT_INFLATION_RADIUS = 0.2


@dataclass(frozen=True)
class GridSpec:
    resolution: float
    origin_x: float
    origin_y: float
    width: int  # cells, x direction
    height: int  # cells, y direction

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        if self.width < 1 or self.height < 1:
            raise ValueError("grid must be at least 1x1")

    def world_to_cell(self, x, y):
        return (
            int(math.floor((x - self.origin_x) / self.resolution)),
            int(math.floor((y - self.origin_y) / self.resolution)),
        )

    def cell_center(self, ix, iy):
        return (
            self.origin_x + (ix + 0.5) * self.resolution,
            self.origin_y + (iy + 0.5) * self.resolution,
        )

    def contains_cell(self, ix, iy):
        return 0 <= ix < self.width and 0 <= iy < self.height

    def contains_world(self, x, y):
        return self.contains_cell(*self.world_to_cell(x, y))

    def to_dict(self):
        return {
            "resolution": self.resolution,
            "origin_x": self.origin_x,
            "origin_y": self.origin_y,
            "width": self.width,
            "height": self.height,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["resolution"], d["origin_x"], d["origin_y"], d["width"], d["height"])


class Costmap:
    """Immutable-by-convention cost grid; updates return a new instance.

    Arrays are indexed [iy, ix].
    """

    def __init__(self, spec: GridSpec, static=None, obstacle=None, override=None,
                 inflation_radius=DEFAULT_INFLATION_RADIUS):
        self.spec = spec
        shape = (spec.height, spec.width)
        self.static = np.zeros(shape, np.uint8) if static is None else np.asarray(static, np.uint8)
        self.obstacle = np.zeros(shape, np.uint8) if obstacle is None else np.asarray(obstacle, np.uint8)
        self.override = np.zeros(shape, bool) if override is None else np.asarray(override, bool)
        self.inflation_radius = inflation_radius
        self.master = self._combine()

    def _combine(self):
        combined = np.maximum(self.static, self.obstacle)
        master = inflate(combined, self.inflation_radius, self.spec.resolution)
        master[self.override] = FREESPACE
        return master

    def copy_layers(self):
        return self.static.copy(), self.obstacle.copy(), self.override.copy()

    def cost_at_world(self, x, y):
        ix, iy = self.spec.world_to_cell(x, y)
        if not self.spec.contains_cell(ix, iy):
            raise ValueError(f"world point ({x},{y}) outside grid")
        return int(self.master[iy, ix])


def inflate(layer, radius, resolution):
    """Spread cost around lethal cells: 253 adjacent to a lethal cell,
    linearly decaying to 1 at `radius` (Euclidean cell-center distance).
    Lethal cells stay 254.
    """
    layer = np.asarray(layer, np.uint8)
    out = layer.copy()
    if radius <= 0:
        return out
    lethal = layer >= LETHAL
    if not lethal.any():
        return out
    dist = ndimage.distance_transform_edt(~lethal, sampling=resolution)
    within = (~lethal) & (dist <= radius)
    profile = np.floor(INSCRIBED - (INSCRIBED - 1) * dist / radius + 0.5).astype(np.uint8)
    out[within] = np.maximum(out[within], profile[within])
    out[lethal] = LETHAL
    return out


def traverse_cells(ix0, iy0, ix1, iy1):
    """Cells strictly between (ix0,iy0) and (ix1,iy1) on the sampled grid
    line: n = max(|dx|,|dy|) steps, nearest-cell rounding (floor(x+0.5))."""
    dx, dy = ix1 - ix0, iy1 - iy0
    n = max(abs(dx), abs(dy))
    if n <= 1:
        return []
    out = []
    for i in range(1, n):
        cx = math.floor(ix0 + i * dx / n + 0.5)
        cy = math.floor(iy0 + i * dy / n + 0.5)
        if (cx, cy) != (ix0, iy0) and (cx, cy) != (ix1, iy1):
            out.append((cx, cy))
    return out


def _beam_clear_cells(sensor_cell, end_cells):
    """Vectorized intervening-cell computation for many beams at once."""
    if len(end_cells) == 0:
        return np.empty((0, 2), int)
    ix0, iy0 = sensor_cell
    ends = np.asarray(end_cells, int)
    dx = ends[:, 0] - ix0
    dy = ends[:, 1] - iy0
    n = np.maximum(np.abs(dx), np.abs(dy))
    nmax = int(n.max(initial=0))
    if nmax <= 1:
        return np.empty((0, 2), int)
    i = np.arange(1, nmax)[None, :]  # (1, nmax-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        fx = ix0 + i * dx[:, None] / np.where(n == 0, 1, n)[:, None]
        fy = iy0 + i * dy[:, None] / np.where(n == 0, 1, n)[:, None]
    cx = np.floor(fx + 0.5).astype(int)
    cy = np.floor(fy + 0.5).astype(int)
    valid = i < n[:, None]
    valid &= ~((cx == ix0) & (cy == iy0))
    valid &= ~((cx == ends[:, 0][:, None]) & (cy == ends[:, 1][:, None]))
    return np.stack([cx[valid], cy[valid]], axis=1)


def _transform_points(points, lidar_to_world):
    pts = np.asarray(points, float).reshape(-1, 3)
    T = np.asarray(lidar_to_world, float).reshape(4, 4)
    return pts @ T[:3, :3].T + T[:3, 3]


def update_costmap(prev: Costmap, seg, cloud, robot_pose, lidar_to_world,
                   unclassified=None) -> Costmap:
    """One scan update: mark untraversable hits lethal, ray-trace clearing
    along every beam, then apply traversable overrides. Returns a new map.

    `unclassified` optionally lists point indices with no image evidence
    (outside the camera frustum); those hits are raw obstacles and do not
    revoke a standing traversable override.
    """
    spec = prev.spec
    rx, ry = robot_pose[0], robot_pose[1]
    if not spec.contains_world(rx, ry):
        raise ValueError(f"robot pose ({rx},{ry}) outside grid")

    static, obstacle, override = prev.copy_layers()
    world = _transform_points(cloud.points, lidar_to_world)

    ix = np.floor((world[:, 0] - spec.origin_x) / spec.resolution).astype(int)
    iy = np.floor((world[:, 1] - spec.origin_y) / spec.resolution).astype(int)
    in_grid = (ix >= 0) & (ix < spec.width) & (iy >= 0) & (iy < spec.height)

    T = np.asarray(lidar_to_world, float).reshape(4, 4)
    sensor_cell = spec.world_to_cell(T[0, 3], T[1, 3])

    tra_idx = np.asarray(seg.traversable, int)
    untra_idx = np.asarray(seg.untraversable, int)

    # 1. mark untraversable hits; latest classification wins over overrides
    um = untra_idx[in_grid[untra_idx]]
    obstacle[iy[um], ix[um]] = LETHAL
    override[iy[um], ix[um]] = False
    if unclassified is not None:
        uc = np.asarray(unclassified, int)
        uc = uc[in_grid[uc]]
        obstacle[iy[uc], ix[uc]] = LETHAL

    # 2. beam clearing through intervening cells, every beam
    all_in = np.nonzero(in_grid)[0]
    clear = _beam_clear_cells(sensor_cell, np.stack([ix[all_in], iy[all_in]], axis=1))
    if len(clear):
        obstacle[clear[:, 1], clear[:, 0]] = FREESPACE

    # 3. traversable hits set the override and clear obstacle marking
    tm = tra_idx[in_grid[tra_idx]]
    override[iy[tm], ix[tm]] = True
    obstacle[iy[tm], ix[tm]] = FREESPACE

    return Costmap(spec, static, obstacle, override, prev.inflation_radius)


def update_costmap_fallback(prev: Costmap, cloud, robot_pose, lidar_to_world) -> Costmap:
    """Whole cloud untraversable (no boxes this frame); overrides persist
    except where a hit lands on them."""
    from .segmentation import SegmentedCloud

    n = len(np.asarray(cloud.points).reshape(-1, 3))
    seg = SegmentedCloud(np.empty(0, int), np.arange(n))
    return update_costmap(prev, seg, cloud, robot_pose, lidar_to_world)


def save_pgm(costmap: Costmap, path):
    """P5 raster: cost 254 -> 0 (black), 0 -> 255 (white), plus a JSON
    sidecar `<path>.meta` with the grid geometry."""
    gray = np.floor(255.0 * (1.0 - costmap.master.astype(float) / LETHAL) + 0.5).astype(np.uint8)
    h, w = gray.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode())
        # row 0 of the file is the top of the image = max y
        fh.write(gray[::-1].tobytes())
    with open(str(path) + ".meta", "w") as fh:
        json.dump(costmap.spec.to_dict(), fh, indent=2)


def load_pgm(path):
    """Inverse of save_pgm: returns (cost array, GridSpec)."""
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"P5":
            raise ValueError("not a P5 PGM file")
        line = fh.readline()
        while line.startswith(b"#"):
            line = fh.readline()
        w, h = (int(t) for t in line.split())
        maxval = int(fh.readline())
        if maxval != 255:
            raise ValueError("expected maxval 255")
        gray = np.frombuffer(fh.read(w * h), np.uint8).reshape(h, w)[::-1]
    cost = np.floor(LETHAL * (1.0 - gray.astype(float) / 255.0) + 0.5).astype(np.uint8)
    with open(str(path) + ".meta") as fh:
        spec = GridSpec.from_dict(json.load(fh))
    return cost, spec
