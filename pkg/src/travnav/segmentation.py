"""Split a LiDAR cloud into traversable / untraversable parts by projecting
points into the image and testing bounding-box membership."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import CameraModel, project_points


@dataclass
class PointCloud:
    points: np.ndarray  # (N,3) LiDAR-frame coordinates
    stamp: float = 0.0

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)

    def __len__(self):
        return len(self.points)


@dataclass
class SegmentedCloud:
    traversable: np.ndarray  # indices into the source cloud
    untraversable: np.ndarray

    def __post_init__(self):
        self.traversable = np.asarray(self.traversable, dtype=int)
        self.untraversable = np.asarray(self.untraversable, dtype=int)


def segment(cloud: PointCloud, boxes, cam: CameraModel) -> SegmentedCloud:
    """A point is traversable iff it projects with positive depth into at
    least one box and every box containing it has attribute 1. Everything
    else (no box, behind camera, or any attribute-0 box) is untraversable.
    """
    n = len(cloud)
    if n == 0:
        return SegmentedCloud(np.empty(0, int), np.empty(0, int))
    if not boxes:
        return SegmentedCloud(np.empty(0, int), np.arange(n))

    uv, _depth, valid = project_points(cloud.points, cam)
    in_good = np.zeros(n, dtype=bool)
    in_bad = np.zeros(n, dtype=bool)
    u, v = uv[:, 0], uv[:, 1]
    for ab in boxes:
        b = ab.box
        inside = valid & (u >= b.u_min) & (u <= b.u_max) & (v >= b.v_min) & (v <= b.v_max)
        if ab.attribute == 1:
            in_good |= inside
        else:
            in_bad |= inside
    tra = in_good & ~in_bad
    return SegmentedCloud(np.nonzero(tra)[0], np.nonzero(~tra)[0])
