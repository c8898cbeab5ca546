"""Shipped scenario fixtures and parametric variants."""

from __future__ import annotations

import copy
import json
from importlib import resources

from ..simworld import Scenario

_NAMES = ["curtain_room", "hospital_wall", "grass_field", "mrc_ward"]


def list_scenarios():
    return list(_NAMES)


def scenario_dict(name: str) -> dict:
    if name not in _NAMES:
        raise KeyError(f"unknown scenario {name!r}")
    text = resources.files("travnav.scenarios").joinpath(f"{name}.json").read_text()
    return json.loads(text)


def load_scenario(name: str) -> Scenario:
    return Scenario.from_dict(scenario_dict(name))


def curtain_room_variant(doorway_width: float, doorway_center: float) -> dict:
    """curtain_room with the curtain's doorway moved/resized; the curtain
    still spans the full gap between the flanking wall sections."""
    d = copy.deepcopy(scenario_dict("curtain_room"))
    y0 = doorway_center - doorway_width / 2
    y1 = doorway_center + doorway_width / 2
    if not (0.3 < y0 and y1 < 5.7):
        raise ValueError("doorway outside the room")
    x0, x1 = 4.0, 4.05
    d["static_polygons"] = [
        {"label": "wall", "polygon": [[x0, 0.0], [x1, 0.0], [x1, y0], [x0, y0]]},
        {"label": "wall", "polygon": [[x0, y1], [x1, y1], [x1, 6.0], [x0, 6.0]]},
    ]
    for obj in d["objects"]:
        if obj["label"] == "curtain":
            obj["polygon"] = [[x0, y0], [x1, y0], [x1, y1], [x0, y1]]
    d["name"] = f"curtain_room_w{doorway_width}_c{doorway_center}"
    return d
