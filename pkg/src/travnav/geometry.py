"""Pinhole camera model and LiDAR-to-image projection."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

# Depth below this is treated as behind the camera; the homogeneous divide
# is undefined at w' = 0.
EPS_DEPTH = 1e-6

ROTATION_TOL = 1e-9


class BehindCamera:
    """Sentinel result: the point has non-positive depth and cannot be
    classified by any bounding box this frame."""

    __slots__ = ()

    def __repr__(self):
        return "BehindCamera"


BEHIND_CAMERA = BehindCamera()


@dataclass(frozen=True)
class PixelCoord:
    u: float
    v: float
    depth: float


@dataclass
class CameraModel:
    """Intrinsic + extrinsic camera parameters.

    The intrinsic matrix is
        [[f*s_x, k*s_y, u_0],
         [0,     f*s_y, v_0],
         [0,     0,     1 ]]
    and (rotation, translation) map LiDAR-frame points into the camera frame.
    """

    f: float
    s_x: float
    s_y: float
    k: float
    u_0: float
    v_0: float
    rotation: np.ndarray  # 3x3, LiDAR -> camera
    translation: np.ndarray  # 3-vector, LiDAR -> camera
    image_w: int
    image_h: int

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        self.translation = np.asarray(self.translation, dtype=float).reshape(3)
        if not (self.f * self.s_x > 0 and self.f * self.s_y > 0):
            raise ValueError("focal-plane scales f*s_x and f*s_y must be positive")
        if self.image_w <= 0 or self.image_h <= 0:
            raise ValueError("image size must be positive")
        err = np.abs(self.rotation @ self.rotation.T - np.eye(3)).max()
        if err > 1e-9 or abs(np.linalg.det(self.rotation) - 1.0) > 1e-9:
            raise ValueError("rotation must be orthonormal with determinant +1")

    @property
    def intrinsic(self) -> np.ndarray:
        return np.array(
            [
                [self.f * self.s_x, self.k * self.s_y, self.u_0],
                [0.0, self.f * self.s_y, self.v_0],
                [0.0, 0.0, 1.0],
            ]
        )

    @classmethod
    def default(cls) -> "CameraModel":
        """640x480 camera with identity extrinsics (RealSense-class focal)."""
        return cls(
            f=525.0,
            s_x=1.0,
            s_y=1.0,
            k=0.0,
            u_0=320.0,
            v_0=240.0,
            rotation=np.eye(3),
            translation=np.zeros(3),
            image_w=640,
            image_h=480,
        )

    def to_dict(self) -> dict:
        return {
            "f": self.f,
            "s_x": self.s_x,
            "s_y": self.s_y,
            "k": self.k,
            "u_0": self.u_0,
            "v_0": self.v_0,
            "rotation": self.rotation.reshape(-1).tolist(),
            "translation": self.translation.tolist(),
            "image_w": self.image_w,
            "image_h": self.image_h,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CameraModel":
        return cls(
            f=d["f"],
            s_x=d["s_x"],
            s_y=d["s_y"],
            k=d.get("k", 0.0),
            u_0=d["u_0"],
            v_0=d["v_0"],
            rotation=np.asarray(d["rotation"], dtype=float).reshape(3, 3),
            translation=np.asarray(d["translation"], dtype=float),
            image_w=d["image_w"],
            image_h=d["image_h"],
        )

    @classmethod
    def load(cls, path) -> "CameraModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def project(p, cam: CameraModel):
    """Project one LiDAR-frame point to continuous pixel coordinates.

    Returns a PixelCoord, or BEHIND_CAMERA when the camera-frame depth is
    <= EPS_DEPTH. Coordinates are not clipped to the image rectangle.
    """
    p = np.asarray(p, dtype=float).reshape(3)
    pc = cam.rotation @ p + cam.translation
    uvw = cam.intrinsic @ pc
    w = uvw[2]
    if w <= EPS_DEPTH:
        return BEHIND_CAMERA
    return PixelCoord(uvw[0] / w, uvw[1] / w, w)


def project_points(points, cam: CameraModel):
    """Vectorized projection of an (N,3) LiDAR-frame array.

    Returns (uv, depth, valid): uv is (N,2), depth (N,), valid (N,) bool.
    uv rows with valid=False are undefined (filled with nan).
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    pc = pts @ cam.rotation.T + cam.translation
    uvw = pc @ cam.intrinsic.T
    depth = uvw[:, 2]
    valid = depth > EPS_DEPTH
    uv = np.full((len(pts), 2), np.nan)
    np.divide(uvw[:, :2], depth[:, None], out=uv, where=valid[:, None])
    return uv, depth, valid


def project_camera_points(points_cam, cam: CameraModel):
    """Project points already expressed in the camera frame (intrinsic only)."""
    pts = np.asarray(points_cam, dtype=float).reshape(-1, 3)
    uvw = pts @ cam.intrinsic.T
    depth = uvw[:, 2]
    valid = depth > EPS_DEPTH
    uv = np.full((len(pts), 2), np.nan)
    np.divide(uvw[:, :2], depth[:, None], out=uv, where=valid[:, None])
    return uv, depth, valid


def in_box(s, box) -> bool:
    """Closed-interval membership of a pixel coordinate in a bounding box."""
    return (
        box.c_x - box.w / 2 <= s.u <= box.c_x + box.w / 2
        and box.c_y - box.h / 2 <= s.v <= box.c_y + box.h / 2
    )
