import json

import pytest
from shapely.geometry import LineString, Polygon

from travnav.grounding import GrounderNoise
from travnav.runtime import (
    FAULTED,
    NO_PATH_STALLED,
    REACHED,
    RUNNING,
    MissionConfig,
    MissionReport,
    MissionRuntime,
    run_mission,
)
from travnav.scenarios import load_scenario

CURTAIN_TEXT = "Go through the curtain, and watch out the chair."


def traj_line(report):
    return LineString([(x, y) for _, x, y, _ in report.trajectory])


def test_goal_at_start_is_reached_without_moving():
    sc = load_scenario("curtain_room")
    rt = MissionRuntime(sc, CURTAIN_TEXT, goal=(sc.robot_start.x, sc.robot_start.y))
    assert rt.tick() == REACHED
    assert rt.tick_count == 0
    assert rt.report().trajectory == []


def test_curtain_mission_reaches_goal():
    report = run_mission(load_scenario("curtain_room"), CURTAIN_TEXT)
    assert report.phase == REACHED
    assert report.fault_label is None
    assert report.directives == [("curtain", 1), ("chair", 0)]
    curtain = Polygon([(4.0, 2.0), (4.05, 2.0), (4.05, 4.0), (4.0, 4.0)])
    assert traj_line(report).intersects(curtain)


def test_mission_without_directives_stalls():
    cfg = MissionConfig(stall_budget=10)
    report = run_mission(load_scenario("curtain_room"), "", config=cfg)
    assert report.phase == NO_PATH_STALLED
    assert report.ticks == 10
    assert not any(report.plan_available)


def test_terminal_phase_is_sticky():
    sc = load_scenario("curtain_room")
    rt = MissionRuntime(sc, "", config=MissionConfig(stall_budget=5))
    while rt.phase == RUNNING:
        rt.tick()
    ticks = rt.tick_count
    assert rt.tick() == NO_PATH_STALLED
    assert rt.tick_count == ticks


def test_instruction_injection_revives_a_stalled_mission():
    sc = load_scenario("curtain_room")
    rt = MissionRuntime(sc, "", config=MissionConfig(stall_budget=5))
    while rt.phase == RUNNING:
        rt.tick()
    assert rt.phase == NO_PATH_STALLED
    rt.inject_instruction(CURTAIN_TEXT)
    assert rt.tick() == RUNNING
    while rt.phase == RUNNING:
        rt.tick()
    assert rt.phase == REACHED


def test_goal_injection_restarts_a_reached_mission():
    sc = load_scenario("curtain_room")
    rt = MissionRuntime(sc, CURTAIN_TEXT, goal=(sc.robot_start.x, sc.robot_start.y))
    rt.tick()
    assert rt.phase == REACHED
    rt.inject_goal(6.5, 3.0)
    while rt.tick() == RUNNING:
        pass
    assert rt.phase == REACHED


def test_goal_injection_validates_bounds():
    rt = MissionRuntime(load_scenario("curtain_room"), CURTAIN_TEXT)
    with pytest.raises(ValueError):
        rt.inject_goal(50.0, 3.0)


def test_goal_outside_world_rejected_at_construction():
    with pytest.raises(ValueError):
        MissionRuntime(load_scenario("curtain_room"), CURTAIN_TEXT, goal=(50.0, 3.0))


def test_reports_are_byte_identical_across_runs():
    a = run_mission(load_scenario("curtain_room"), CURTAIN_TEXT)
    b = run_mission(load_scenario("curtain_room"), CURTAIN_TEXT)
    assert a.to_json() == b.to_json()
    assert a.to_json().encode() == b.to_json().encode()


def test_noisy_grounding_is_seed_deterministic_and_still_reaches():
    cfg = MissionConfig(grounder_noise=GrounderNoise(
        split_probability=0.1, center_jitter_px=1.0, dropout_probability=0.05))
    a = run_mission(load_scenario("curtain_room"), CURTAIN_TEXT, config=cfg)
    b = run_mission(load_scenario("curtain_room"), CURTAIN_TEXT, config=cfg)
    assert a.to_json() == b.to_json()
    assert a.phase == REACHED


def test_max_ticks_exhaustion_stalls():
    cfg = MissionConfig(max_ticks=3)
    report = run_mission(load_scenario("curtain_room"), CURTAIN_TEXT, config=cfg)
    assert report.phase == NO_PATH_STALLED
    assert report.ticks == 3


def test_report_serialization_round_trip(tmp_path):
    report = run_mission(load_scenario("curtain_room"), CURTAIN_TEXT,
                         config=MissionConfig(max_ticks=20))
    report.save(tmp_path)
    with open(tmp_path / "report.json") as fh:
        loaded = json.load(fh)
    assert loaded == report.to_dict()
    lines = (tmp_path / "trajectory.csv").read_text().strip().splitlines()
    assert lines[0] == "tick,x,y,theta"
    assert len(lines) == len(report.trajectory) + 1


def test_snapshots_are_recorded_and_saved(tmp_path):
    sc = load_scenario("curtain_room")
    rt = MissionRuntime(sc, CURTAIN_TEXT, config=MissionConfig(snapshot_every=5,
                                                               max_ticks=11))
    for _ in range(11):
        rt.tick()
    rt.save_snapshots(tmp_path)
    assert sorted(p.name for p in tmp_path.glob("*.pgm")) == [
        "costmap_00000.pgm", "costmap_00005.pgm", "costmap_00010.pgm"]


def test_scenario_path_accepted(tmp_path):
    from travnav.scenarios import scenario_dict

    p = tmp_path / "sc.json"
    p.write_text(json.dumps(scenario_dict("curtain_room")))
    report = run_mission(str(p), CURTAIN_TEXT, config=MissionConfig(max_ticks=5))
    assert report.scenario == "curtain_room"
    assert report.ticks == 5


def test_mission_report_phase_vocabulary():
    assert {RUNNING, REACHED, NO_PATH_STALLED, FAULTED} == {
        "Running", "Reached", "NoPathStalled", "Faulted"}
