import numpy as np
import pytest

from travnav.geometry import CameraModel
from travnav.grounding import (
    AttributedBox,
    BoundingBox,
    DetectorClient,
    GrounderNoise,
    RemoteDetectionError,
    UnknownLabelError,
    attach_attributes,
    ground_synthetic,
    remote_detect,
)
from travnav.instruction import LandmarkDirective


CAM = CameraModel.default()


def cloud_in_front(rng, n=200):
    """Camera-frame points spread across the frustum, all ahead of the camera."""
    z = rng.uniform(1.0, 6.0, size=n)
    x = rng.uniform(-0.4, 0.4, size=n) * z
    y = rng.uniform(-0.3, 0.3, size=n) * z
    return np.stack([x, y, z], axis=1)


def tight_aabb(points):
    """Brute-force expected box: project each point by hand, take min/max."""
    us, vs = [], []
    for x, y, z in points:
        if z > 1e-6:
            us.append(CAM.f * CAM.s_x * x / z + CAM.u_0)
            vs.append(CAM.f * CAM.s_y * y / z + CAM.v_0)
    u0, u1 = max(min(us), 0.0), min(max(us), float(CAM.image_w))
    v0, v1 = max(min(vs), 0.0), min(max(vs), float(CAM.image_h))
    return BoundingBox.from_corners(u0, v0, u1, v1)


def test_tight_aabb_matches_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(50):
        pts = cloud_in_front(rng)
        out = ground_synthetic([("chair", pts)], ["chair"], CAM)
        assert len(out) == 1
        label, box = out[0]
        assert label == "chair"
        expected = tight_aabb(pts)
        assert box.c_x == pytest.approx(expected.c_x, abs=1e-9)
        assert box.c_y == pytest.approx(expected.c_y, abs=1e-9)
        assert box.w == pytest.approx(expected.w, abs=1e-9)
        assert box.h == pytest.approx(expected.h, abs=1e-9)


def test_object_behind_camera_is_invisible():
    pts = np.array([[0.0, 0.0, -2.0], [0.1, 0.1, -1.0]])
    assert ground_synthetic([("chair", pts)], ["chair"], CAM) == []


def test_object_fully_outside_image_is_invisible():
    # far to the left: u << 0 for every sample
    pts = np.array([[-50.0, 0.0, 1.0], [-60.0, 0.0, 1.0]])
    assert ground_synthetic([("chair", pts)], ["chair"], CAM) == []


def test_box_clipped_to_image():
    # one sample on-screen, one far off to the right
    pts = np.array([[0.0, -0.2, 2.0], [50.0, 0.2, 1.0]])
    out = ground_synthetic([("chair", pts)], ["chair"], CAM)
    assert len(out) == 1
    box = out[0][1]
    assert box.u_max <= CAM.image_w
    assert box.v_max <= CAM.image_h
    assert box.u_min >= 0 and box.v_min >= 0


def test_unmatched_labels_are_skipped():
    pts = cloud_in_front(np.random.default_rng(0))
    assert ground_synthetic([("chair", pts)], ["table"], CAM) == []


def test_word_suffix_label_match():
    pts = cloud_in_front(np.random.default_rng(1))
    out = ground_synthetic([("orange wooden wall", pts)], ["wall"], CAM)
    assert len(out) == 1 and out[0][0] == "wall"
    # "den wall" is not a word suffix, "wooden wall" is
    assert ground_synthetic([("orange wooden wall", pts)], ["den wall"], CAM) == []
    assert len(ground_synthetic([("orange wooden wall", pts)], ["wooden wall"], CAM)) == 1


def test_empty_labels_rejected():
    with pytest.raises(ValueError):
        ground_synthetic([], [], CAM)


def test_split_noise_fragments_but_covers():
    rng = np.random.default_rng(2)
    pts = cloud_in_front(rng)
    clean = ground_synthetic([("chair", pts)], ["chair"], CAM)[0][1]
    noisy = ground_synthetic([("chair", pts)], ["chair"], CAM,
                             GrounderNoise(split_probability=1.0, seed=9))
    assert len(noisy) == 2
    u_cover = (min(b.u_min for _, b in noisy), max(b.u_max for _, b in noisy))
    v_cover = (min(b.v_min for _, b in noisy), max(b.v_max for _, b in noisy))
    assert u_cover == pytest.approx((clean.u_min, clean.u_max), abs=1e-9)
    assert v_cover == pytest.approx((clean.v_min, clean.v_max), abs=1e-9)


def test_dropout_noise_removes_boxes():
    pts = cloud_in_front(np.random.default_rng(3))
    noisy = ground_synthetic([("chair", pts)], ["chair"], CAM,
                             GrounderNoise(dropout_probability=1.0, seed=1))
    assert noisy == []


def test_noise_is_seed_deterministic():
    pts = cloud_in_front(np.random.default_rng(4))
    noise = GrounderNoise(split_probability=0.5, center_jitter_px=3.0,
                          dropout_probability=0.2, seed=123)
    a = ground_synthetic([("chair", pts)], ["chair"], CAM, noise)
    b = ground_synthetic([("chair", pts)], ["chair"], CAM, noise)
    assert a == b


def test_noise_validation():
    with pytest.raises(ValueError):
        GrounderNoise(split_probability=1.5)
    with pytest.raises(ValueError):
        GrounderNoise(center_jitter_px=-1)


def test_attach_attributes():
    box = BoundingBox(10, 10, 4, 4)
    directives = [LandmarkDirective("curtain", 1, "go through"),
                  LandmarkDirective("chair", 0, "avoid")]
    out = attach_attributes([("curtain", box), ("chair", box), ("curtain", box)],
                            directives)
    assert [(b.label, b.attribute) for b in out] == [
        ("curtain", 1), ("chair", 0), ("curtain", 1)]
    assert all(isinstance(b, AttributedBox) for b in out)


def test_attach_attributes_unknown_label():
    with pytest.raises(UnknownLabelError):
        attach_attributes([("door", BoundingBox(1, 1, 1, 1))],
                          [LandmarkDirective("chair", 0, "avoid")])


def test_bounding_box_validation():
    with pytest.raises(ValueError):
        BoundingBox(0, 0, -1, 2)
    b = BoundingBox.from_corners(10, 20, 30, 60)
    assert (b.c_x, b.c_y, b.w, b.h) == (20, 40, 20, 40)
    assert (b.u_min, b.u_max, b.v_min, b.v_max) == (10, 30, 20, 60)


# -- remote detector contract --


def test_remote_detect_pixel_coordinates():
    def transport(image, prompt):
        assert prompt == "curtain, chair"
        return {"detections": [
            {"label": "curtain", "c_x": 100.0, "c_y": 120.0, "w": 40.0, "h": 80.0}]}

    out = remote_detect(b"img", ["curtain", "chair"], DetectorClient(transport=transport))
    assert out == [("curtain", BoundingBox(100.0, 120.0, 40.0, 80.0))]


def test_remote_detect_normalized_coordinates():
    def transport(image, prompt):
        return {"normalized": True, "detections": [
            {"label": "chair", "c_x": 0.5, "c_y": 0.5, "w": 0.25, "h": 0.5}]}

    out = remote_detect(b"img", ["chair"], DetectorClient(transport=transport),
                        image_w=640, image_h=480)
    assert out == [("chair", BoundingBox(320.0, 240.0, 160.0, 240.0))]


def test_remote_detect_normalized_needs_image_size():
    def transport(image, prompt):
        return {"normalized": True, "detections": [
            {"label": "chair", "c_x": 0.5, "c_y": 0.5, "w": 0.25, "h": 0.5}]}

    with pytest.raises(RemoteDetectionError):
        remote_detect(b"img", ["chair"], DetectorClient(transport=transport))


def test_remote_detect_malformed_payload():
    def transport(image, prompt):
        return {"boxes": []}

    with pytest.raises(RemoteDetectionError) as exc:
        remote_detect(b"img", ["chair"], DetectorClient(transport=transport))
    assert exc.value.raw_payload == {"boxes": []}


def test_detector_client_requires_endpoint(monkeypatch):
    monkeypatch.delenv("DETECTOR_ENDPOINT", raising=False)
    with pytest.raises(RemoteDetectionError):
        DetectorClient().detect(b"img", "chair")
