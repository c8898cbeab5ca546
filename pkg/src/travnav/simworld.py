"""2D simulated world: labeled polygonal objects, raycast LiDAR, kinematic
point robot, and camera-view synthesis for the synthetic grounder."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from shapely.geometry import Point, Polygon, box as shapely_box
from shapely.prepared import prep

from .costmap import GridSpec, LETHAL
from .geometry import CameraModel
from .segmentation import PointCloud

# robot frame (x fwd, y left, z up) -> camera frame (x right, y down, z fwd)
CAMERA_AXES = np.array([[0.0, -1.0, 0.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]])

BOUNDARY_SAMPLE_SPACING = 0.02  # m along object boundaries
SILHOUETTE_Z_LEVELS = 21  # dense enough that a near-camera object keeps a
# sample inside the vertical field of view


@dataclass
class SceneObject:
    label: str
    footprint: Polygon
    truly_traversable: bool
    height_band: tuple = (0.0, 2.0)

    def __post_init__(self):
        if not self.footprint.is_valid or len(self.footprint.exterior.coords) < 4:
            raise ValueError(f"object {self.label!r} footprint must be a simple polygon")
        self._samples2d = _sample_boundary(self.footprint, BOUNDARY_SAMPLE_SPACING)
        z = np.linspace(self.height_band[0], self.height_band[1], SILHOUETTE_Z_LEVELS)
        n = len(self._samples2d)
        pts = np.empty((n * len(z), 3))
        for i, zi in enumerate(z):
            pts[i * n : (i + 1) * n, :2] = self._samples2d
            pts[i * n : (i + 1) * n, 2] = zi
        self._samples3d = pts  # world frame


def _sample_boundary(poly: Polygon, spacing):
    ring = poly.exterior
    n = max(int(math.ceil(ring.length / spacing)), 8)
    d = np.linspace(0.0, ring.length, n, endpoint=False)
    return np.array([ring.interpolate(t).coords[0] for t in d])


@dataclass
class RobotState:
    x: float
    y: float
    theta: float
    speed: float = 0.5


@dataclass
class LidarSpec:
    beam_count: int = 360
    max_range: float = 10.0
    height: float = 0.2
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.beam_count < 1 or self.max_range <= 0:
            raise ValueError("invalid lidar spec")


class World:
    """Static polygons (walls), labeled objects, and a rectangular boundary."""

    def __init__(self, bounds, static_polygons, objects, resolution=0.05):
        self.bounds = tuple(bounds)  # (x_min, y_min, x_max, y_max)
        self.static_polygons = static_polygons  # list of (label, Polygon)
        self.objects = objects
        self.resolution = resolution
        self._segments = self._collect_segments()
        self._solid = [
            (lbl, poly, prep(poly)) for lbl, poly in static_polygons
        ] + [
            (o.label, o.footprint, prep(o.footprint))
            for o in objects
            if not o.truly_traversable
        ]
        self._traversable_polys = [
            (o.label, o.footprint) for o in objects if o.truly_traversable
        ]

    def _collect_segments(self):
        segs = []
        x0, y0, x1, y1 = self.bounds
        segs += [((x0, y0), (x1, y0)), ((x1, y0), (x1, y1)),
                 ((x1, y1), (x0, y1)), ((x0, y1), (x0, y0))]
        for _lbl, poly in self.static_polygons:
            segs += _ring_segments(poly)
        for obj in self.objects:
            segs += _ring_segments(obj.footprint)
        a = np.array([s[0] for s in segs])
        b = np.array([s[1] for s in segs])
        return a, b

    def contains(self, x, y):
        x0, y0, x1, y1 = self.bounds
        return x0 <= x <= x1 and y0 <= y <= y1

    def solid_hit(self, x, y):
        """Label of the untraversable polygon containing (x, y), else None."""
        p = Point(x, y)
        for label, _poly, prepared in self._solid:
            if prepared.contains(p):
                return label
        return None


def _ring_segments(poly: Polygon):
    coords = list(poly.exterior.coords)
    return [(coords[i], coords[i + 1]) for i in range(len(coords) - 1)]


def lidar_to_world_matrix(robot: RobotState, spec: LidarSpec):
    c, s = math.cos(robot.theta), math.sin(robot.theta)
    T = np.eye(4)
    T[:3, :3] = [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
    T[:3, 3] = [robot.x, robot.y, spec.height]
    return T


def lidar_scan(world: World, robot: RobotState, spec: LidarSpec, rng=None) -> PointCloud:
    """One revolution of raycast ranges; every object is opaque to the beam
    regardless of its ground-truth traversability. Misses yield no point.
    Points are in the LiDAR frame (z=0 sensor plane).
    """
    if not world.contains(robot.x, robot.y):
        raise ValueError("robot pose outside world bounds")
    angles = robot.theta + 2.0 * math.pi * np.arange(spec.beam_count) / spec.beam_count
    origin = np.array([robot.x, robot.y])
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)

    a, b = world._segments  # (M,2) each
    e = b - a  # segment direction
    # solve origin + t*d = a + s*e for each (beam, segment)
    ao = a[None, :, :] - origin[None, None, :]  # (1,M,2)
    d = dirs[:, None, :]  # (B,1,2)
    denom = d[:, :, 0] * (-e[None, :, 1]) - d[:, :, 1] * (-e[None, :, 0])
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (ao[:, :, 0] * (-e[None, :, 1]) - ao[:, :, 1] * (-e[None, :, 0])) / denom
        s = (d[:, :, 0] * ao[:, :, 1] - d[:, :, 1] * ao[:, :, 0]) / denom
    ok = (np.abs(denom) > 1e-12) & (t > 1e-9) & (s >= 0.0) & (s <= 1.0)
    t = np.where(ok, t, np.inf)
    ranges = t.min(axis=1)

    hit = ranges <= spec.max_range
    r = ranges[hit]
    if rng is not None and spec.noise_sigma > 0:
        r = r + rng.normal(0.0, spec.noise_sigma, size=len(r))
    beam_angles = angles[hit] - robot.theta  # lidar frame rotates with robot
    pts = np.stack(
        [r * np.cos(beam_angles), r * np.sin(beam_angles), np.zeros(len(r))], axis=1
    )
    return PointCloud(pts)


class CollisionFault(Exception):
    """Raised when the robot enters a polygon that is not truly traversable."""

    def __init__(self, label: str):
        super().__init__(label)
        self.label = label


def step_robot(world: World, robot: RobotState, path, dt: float):
    """Advance along the waypoint polyline at robot.speed for dt seconds.

    Returns the new RobotState; raises CollisionFault when the new pose is
    inside an object that is not truly traversable (ground-truth check).
    """
    if path is None or not path.waypoints:
        raise ValueError("path must be non-empty")
    if dt <= 0:
        return RobotState(robot.x, robot.y, robot.theta, robot.speed)
    pts = np.asarray(path.waypoints, float)
    if len(pts) == 1:
        return RobotState(robot.x, robot.y, robot.theta, robot.speed)

    # arc-length position = projection of current pose onto the polyline
    seg = pts[1:] - pts[:-1]
    seg_len = np.hypot(seg[:, 0], seg[:, 1])
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    rel = np.array([robot.x, robot.y]) - pts[:-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        tproj = np.clip((rel * seg).sum(axis=1) / np.maximum(seg_len**2, 1e-12), 0, 1)
    closest = pts[:-1] + tproj[:, None] * seg
    d2 = ((closest - [robot.x, robot.y]) ** 2).sum(axis=1)
    i = int(d2.argmin())
    s = cum[i] + tproj[i] * seg_len[i] + robot.speed * dt
    s = min(s, cum[-1])

    j = int(np.searchsorted(cum, s, side="right") - 1)
    j = min(j, len(seg) - 1)
    frac = (s - cum[j]) / max(seg_len[j], 1e-12)
    new = pts[j] + frac * seg[j]
    heading = math.atan2(seg[j][1], seg[j][0]) if seg_len[j] > 1e-12 else robot.theta

    label = world.solid_hit(new[0], new[1])
    if label is not None:
        raise CollisionFault(label)
    return RobotState(float(new[0]), float(new[1]), heading, robot.speed)


def camera_view(world: World, robot: RobotState, cam: CameraModel, lidar_height: float):
    """Silhouette sample points of every object, expressed in the camera
    frame via the robot pose and the camera's LiDAR->camera extrinsics."""
    c, s = math.cos(robot.theta), math.sin(robot.theta)
    R_wl = np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])  # world->lidar
    t_w = np.array([robot.x, robot.y, lidar_height])
    out = []
    for obj in world.objects:
        p_l = (obj._samples3d - t_w) @ R_wl.T
        p_c = p_l @ cam.rotation.T + cam.translation
        out.append((obj.label, p_c))
    return out


@dataclass
class Scenario:
    name: str
    world: World
    grid: GridSpec
    static_cost: np.ndarray
    robot_start: RobotState
    default_goal: tuple
    lidar: LidarSpec
    camera: CameraModel
    inflation_radius: float
    seed: int

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        bounds = d["bounds"]
        res = d.get("resolution", 0.05)
        statics = [
            (p.get("label", "wall"), Polygon(p["polygon"]))
            for p in d.get("static_polygons", [])
        ]
        objects = [
            SceneObject(
                o["label"],
                Polygon(o["polygon"]),
                bool(o["truly_traversable"]),
                tuple(o.get("height_band", (0.0, 2.0))),
            )
            for o in d.get("objects", [])
        ]
        world = World(bounds, statics, objects, res)
        spec = GridSpec(
            res,
            bounds[0],
            bounds[1],
            int(round((bounds[2] - bounds[0]) / res)),
            int(round((bounds[3] - bounds[1]) / res)),
        )
        static_cost = rasterize_static(world, spec)
        lid = d.get("lidar", {})
        lidar = LidarSpec(
            beam_count=lid.get("beam_count", 360),
            max_range=lid.get("max_range", 10.0),
            height=lid.get("height", 0.2),
            noise_sigma=lid.get("noise_sigma", 0.0),
        )
        camd = d.get("camera", {})
        camera = build_camera(camd, lidar.height)
        start = d["robot_start"]
        return cls(
            name=d.get("name", "scenario"),
            world=world,
            grid=spec,
            static_cost=static_cost,
            robot_start=RobotState(start[0], start[1], start[2], d.get("robot_speed", 0.5)),
            default_goal=tuple(d["default_goal"]),
            lidar=lidar,
            camera=camera,
            inflation_radius=d.get("inflation_radius", 0.2),
            seed=d.get("seed", 1),
        )

    @classmethod
    def load(cls, path) -> "Scenario":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def build_camera(camd: dict, lidar_height: float) -> CameraModel:
    """Forward-looking camera mounted above the LiDAR; extrinsics map the
    LiDAR frame into the camera frame."""
    cam_height = camd.get("height", 0.3)
    t_off = np.array([0.0, 0.0, cam_height - lidar_height])
    return CameraModel(
        f=camd.get("f", 525.0),
        s_x=camd.get("s_x", 1.0),
        s_y=camd.get("s_y", 1.0),
        k=camd.get("k", 0.0),
        u_0=camd.get("u_0", 320.0),
        v_0=camd.get("v_0", 240.0),
        rotation=CAMERA_AXES,
        translation=-CAMERA_AXES @ t_off,
        image_w=camd.get("image_w", 640),
        image_h=camd.get("image_h", 480),
    )


def rasterize_static(world: World, spec: GridSpec) -> np.ndarray:
    """Static cost layer: lethal where a static polygon overlaps a cell, plus
    a one-cell lethal boundary ring."""
    grid = np.zeros((spec.height, spec.width), np.uint8)
    grid[0, :] = grid[-1, :] = LETHAL
    grid[:, 0] = grid[:, -1] = LETHAL
    for _lbl, poly in world.static_polygons:
        x0, y0, x1, y1 = poly.bounds
        ix0 = max(int((x0 - spec.origin_x) / spec.resolution) - 1, 0)
        iy0 = max(int((y0 - spec.origin_y) / spec.resolution) - 1, 0)
        ix1 = min(int((x1 - spec.origin_x) / spec.resolution) + 1, spec.width - 1)
        iy1 = min(int((y1 - spec.origin_y) / spec.resolution) + 1, spec.height - 1)
        prepared = prep(poly)
        for iy in range(iy0, iy1 + 1):
            for ix in range(ix0, ix1 + 1):
                cx = spec.origin_x + ix * spec.resolution
                cy = spec.origin_y + iy * spec.resolution
                cell = shapely_box(cx, cy, cx + spec.resolution, cy + spec.resolution)
                if prepared.intersects(cell):
                    grid[iy, ix] = LETHAL
    return grid
