"""Bounding-box grounding: a synthetic grounder over simulated scenes plus a
remote open-vocabulary detector client with the same contract."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .geometry import CameraModel, project_camera_points


@dataclass(frozen=True)
class BoundingBox:
    c_x: float
    c_y: float
    w: float
    h: float

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ValueError("box width and height must be positive")

    @classmethod
    def from_corners(cls, u0, v0, u1, v1):
        return cls((u0 + u1) / 2, (v0 + v1) / 2, u1 - u0, v1 - v0)

    @property
    def u_min(self):
        return self.c_x - self.w / 2

    @property
    def u_max(self):
        return self.c_x + self.w / 2

    @property
    def v_min(self):
        return self.c_y - self.h / 2

    @property
    def v_max(self):
        return self.c_y + self.h / 2


@dataclass(frozen=True)
class AttributedBox:
    box: BoundingBox
    label: str
    attribute: int


@dataclass(frozen=True)
class GrounderNoise:
    split_probability: float = 0.0
    center_jitter_px: float = 0.0
    dropout_probability: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.split_probability <= 1.0):
            raise ValueError("split_probability outside [0,1]")
        if not (0.0 <= self.dropout_probability <= 1.0):
            raise ValueError("dropout_probability outside [0,1]")
        if self.center_jitter_px < 0:
            raise ValueError("center_jitter_px must be >= 0")


def _clip_box(u0, v0, u1, v1, cam: CameraModel):
    u0 = max(u0, 0.0)
    v0 = max(v0, 0.0)
    u1 = min(u1, float(cam.image_w))
    v1 = min(v1, float(cam.image_h))
    if u1 <= u0 or v1 <= v0:
        return None
    return BoundingBox.from_corners(u0, v0, u1, v1)


def ground_synthetic(scene_view, labels, camera: CameraModel, noise: GrounderNoise | None = None):
    """Detect requested labels in a simulated camera view.

    `scene_view` is a list of (label, points) pairs where points is an (N,3)
    array of silhouette samples in the camera frame. Returns (label, BoundingBox)
    pairs: the tight pixel AABB of each visible matching silhouette, clipped to
    the image, with optional seeded noise (split / jitter / dropout) applied.
    """
    if not labels:
        raise ValueError("labels must be non-empty")
    wanted = [l.lower() for l in labels]
    rng = np.random.default_rng(noise.seed) if noise is not None else None

    results = []
    for obj_label, points in scene_view:
        req = _match_label(obj_label, wanted)
        if req is None:
            continue
        uv, depth, valid = project_camera_points(points, camera)
        uv = uv[valid]
        if len(uv) == 0:
            continue
        inside = (
            (uv[:, 0] >= 0)
            & (uv[:, 0] <= camera.image_w)
            & (uv[:, 1] >= 0)
            & (uv[:, 1] <= camera.image_h)
        )
        if not inside.any():
            continue
        u0, v0 = uv.min(axis=0)
        u1, v1 = uv.max(axis=0)
        boxes = [(u0, v0, u1, v1)]

        if rng is not None:
            if rng.random() < noise.split_probability:
                bu0, bv0, bu1, bv1 = boxes[0]
                if (bu1 - bu0) >= (bv1 - bv0):
                    mid = (bu0 + bu1) / 2
                    boxes = [(bu0, bv0, mid, bv1), (mid, bv0, bu1, bv1)]
                else:
                    mid = (bv0 + bv1) / 2
                    boxes = [(bu0, bv0, bu1, mid), (bu0, mid, bu1, bv1)]
            jittered = []
            for bu0, bv0, bu1, bv1 in boxes:
                if noise.center_jitter_px > 0:
                    du, dv = rng.normal(0.0, noise.center_jitter_px, size=2)
                else:
                    du = dv = 0.0
                if rng.random() < noise.dropout_probability:
                    continue
                jittered.append((bu0 + du, bv0 + dv, bu1 + du, bv1 + dv))
            boxes = jittered

        for corners in boxes:
            clipped = _clip_box(*corners, camera)
            if clipped is not None:
                results.append((req, clipped))
    return results


def _match_label(obj_label: str, wanted):
    """A requested label matches an object when equal or a word-suffix of it
    ("wall" matches "orange wooden wall")."""
    obj = obj_label.lower()
    obj_words = obj.split()
    for req in wanted:
        req_words = req.split()
        if obj == req or obj_words[-len(req_words):] == req_words:
            return req
    return None


class UnknownLabelError(Exception):
    pass


def attach_attributes(boxes, directives):
    """Copy each directive's attribute onto its boxes; count preserved."""
    by_label = {d.label: d.attribute for d in directives}
    out = []
    for label, box in boxes:
        if label not in by_label:
            raise UnknownLabelError(f"box label {label!r} has no directive")
        out.append(AttributedBox(box, label, by_label[label]))
    return out


class RemoteDetectionError(Exception):
    def __init__(self, message, raw_payload=None):
        super().__init__(message)
        self.raw_payload = raw_payload


class DetectorClient:
    """Blocking client for a remote open-vocabulary detector."""

    def __init__(self, endpoint=None, api_key=None, transport=None):
        self.endpoint = endpoint or os.environ.get("DETECTOR_ENDPOINT")
        self.api_key = api_key or os.environ.get("DETECTOR_API_KEY")
        self._transport = transport

    def detect(self, image_bytes: bytes, prompt: str):
        if self._transport is not None:
            return self._transport(image_bytes, prompt)
        if not self.endpoint:
            raise RemoteDetectionError("no detector endpoint configured")
        import requests

        try:
            resp = requests.post(
                self.endpoint,
                files={"image": image_bytes},
                data={"prompt": prompt},
                headers={"Authorization": f"Bearer {self.api_key}"} if self.api_key else {},
                timeout=60,
            )
            resp.raise_for_status()
            return resp.json()
        except Exception as exc:  # noqa: BLE001
            raise RemoteDetectionError(f"transport failure: {exc}") from exc


def remote_detect(image_bytes, labels, client: DetectorClient, image_w=None, image_h=None):
    """Query a remote detector; prompt is the comma-joined label list.

    Expected payload: {"detections": [{"label", "c_x", "c_y", "w", "h"},...]},
    optionally with "normalized": true, in which case coordinates are scaled
    by the submitted image size.
    """
    if not labels:
        raise ValueError("labels must be non-empty")
    prompt = ", ".join(labels)
    payload = client.detect(image_bytes, prompt)
    try:
        normalized = bool(payload.get("normalized", False))
        out = []
        for det in payload["detections"]:
            cx, cy, w, h = det["c_x"], det["c_y"], det["w"], det["h"]
            if normalized:
                if image_w is None or image_h is None:
                    raise KeyError("image size required for normalized detections")
                cx, w = cx * image_w, w * image_w
                cy, h = cy * image_h, h * image_h
            out.append((det["label"], BoundingBox(cx, cy, w, h)))
        return out
    except (KeyError, TypeError, ValueError) as exc:
        raise RemoteDetectionError(f"malformed detector payload: {exc}", raw_payload=payload) from exc
