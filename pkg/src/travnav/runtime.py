"""Closed mission loop: parse once, then per tick ground -> attribute ->
segment -> update costmap -> (re)plan -> step, until the goal threshold."""

from __future__ import annotations

import csv
import json
import math
import os
import threading
from dataclasses import dataclass, field

import numpy as np

from .costmap import Costmap, LETHAL, save_pgm, update_costmap
from .geometry import project_points
from .grounding import GrounderNoise, attach_attributes, ground_synthetic
from .instruction import Instruction, parse_instruction
from .planner import PlanningError, plan
from .segmentation import SegmentedCloud, segment
from .simworld import (
    CollisionFault,
    RobotState,
    Scenario,
    camera_view,
    lidar_scan,
    lidar_to_world_matrix,
    step_robot,
)

IDLE = "Idle"
RUNNING = "Running"
REACHED = "Reached"
NO_PATH_STALLED = "NoPathStalled"
FAULTED = "Faulted"

TERMINAL_PHASES = {REACHED, NO_PATH_STALLED, FAULTED}


@dataclass
class MissionConfig:
    threshold: float = 0.3  # goal-distance termination (m)
    replan_every: int = 5  # ticks
    stall_budget: int = 40  # consecutive failed plans with no path held
    max_ticks: int = 4000
    dt: float = 0.05
    snapshot_every: int = 0  # 0 = no costmap snapshots
    grounder_noise: GrounderNoise | None = None
    plan_lambda: int = 10
    # a fresh plan replaces a still-unblocked committed path only when it is
    # at least this much cheaper; suppresses flip-flopping between crossings
    replan_adopt_factor: float = 0.5


@dataclass
class MissionReport:
    phase: str
    ticks: int
    trajectory: list  # (tick, x, y, theta)
    plan_available: list  # bool per tick
    fault_label: str | None
    directives: list  # (label, attribute)
    goal: tuple
    seed: int
    scenario: str

    def to_dict(self):
        return {
            "scenario": self.scenario,
            "phase": self.phase,
            "ticks": self.ticks,
            "goal": list(self.goal),
            "seed": self.seed,
            "fault_label": self.fault_label,
            "directives": [list(d) for d in self.directives],
            "plan_available": self.plan_available,
            "trajectory": [[t, x, y, th] for t, x, y, th in self.trajectory],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def save(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "report.json"), "w") as fh:
            fh.write(self.to_json())
        with open(os.path.join(out_dir, "trajectory.csv"), "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["tick", "x", "y", "theta"])
            wr.writerows(self.trajectory)


class MissionRuntime:
    """Owns the world, robot, and costmap; advances one tick at a time.

    Mutations (instruction/goal injection) are queued and applied at tick
    boundaries, so a service thread can drive a live mission safely.
    """

    def __init__(self, scenario: Scenario, instruction_text: str = "",
                 goal=None, config: MissionConfig | None = None):
        self.scenario = scenario
        self.config = config or MissionConfig()
        self.goal = tuple(goal) if goal is not None else tuple(scenario.default_goal)
        if not scenario.world.contains(*self.goal):
            raise ValueError("goal outside world bounds")
        self.robot = RobotState(
            scenario.robot_start.x, scenario.robot_start.y,
            scenario.robot_start.theta, scenario.robot_start.speed,
        )
        self.costmap = Costmap(
            scenario.grid, static=scenario.static_cost,
            inflation_radius=scenario.inflation_radius,
        )
        self.directives = parse_instruction(Instruction(instruction_text))
        self.phase = RUNNING
        self.tick_count = 0
        self.current_path = None
        self.fault_label = None
        self._consecutive_failures = 0
        self.trajectory = []
        self.plan_available = []
        self.latest_boxes = []
        self.latest_points = []  # (x, y, traversable) world-frame summary
        self._snapshots = []  # (tick, Costmap)
        self._queue = []
        self._lock = threading.Lock()

    # -- external mutations (thread-safe, applied at tick boundaries) --

    def inject_instruction(self, text: str):
        with self._lock:
            self._queue.append(("instruction", text))

    def inject_goal(self, x: float, y: float):
        if not self.scenario.world.contains(x, y):
            raise ValueError("goal outside world bounds")
        with self._lock:
            self._queue.append(("goal", (x, y)))

    def _apply_queue(self):
        with self._lock:
            queue, self._queue = self._queue, []
        for kind, payload in queue:
            if kind == "instruction":
                self.directives = parse_instruction(Instruction(payload))
                if self.phase == NO_PATH_STALLED:
                    self.phase = RUNNING
                    self._consecutive_failures = 0
            elif kind == "goal":
                self.goal = tuple(payload)
                self.current_path = None
                if self.phase in (REACHED, NO_PATH_STALLED):
                    self.phase = RUNNING
                    self._consecutive_failures = 0

    # -- tick loop --

    def _goal_reached(self):
        return math.hypot(self.robot.x - self.goal[0], self.robot.y - self.goal[1]) \
            <= self.config.threshold

    def tick(self):
        """One Algorithm-style iteration; returns the phase afterwards."""
        self._apply_queue()
        if self.phase in TERMINAL_PHASES:
            return self.phase
        if self._goal_reached():
            self.phase = REACHED
            return self.phase

        sc, cfg = self.scenario, self.config
        t = self.tick_count
        rng = np.random.default_rng(sc.seed * 1000003 + t)

        cloud = lidar_scan(sc.world, self.robot, sc.lidar, rng=rng)
        T = lidar_to_world_matrix(self.robot, sc.lidar)

        boxes = []
        if self.directives:
            view = camera_view(sc.world, self.robot, sc.camera, sc.lidar.height)
            labels = [d.label for d in self.directives]
            noise = cfg.grounder_noise
            if noise is not None:
                noise = GrounderNoise(
                    noise.split_probability, noise.center_jitter_px,
                    noise.dropout_probability, seed=sc.seed * 1000003 + t,
                )
            raw = ground_synthetic(view, labels, sc.camera, noise)
            boxes = attach_attributes(raw, self.directives)
        self.latest_boxes = boxes

        if boxes:
            seg = segment(cloud, boxes, sc.camera)
        else:
            seg = SegmentedCloud(np.empty(0, int), np.arange(len(cloud)))
        unclassified = None
        if self.directives:
            # only points with image evidence carry a classification; hits
            # outside the camera frustum are raw obstacles and must not
            # revoke a standing traversable override
            uv, _, valid = project_points(cloud.points, sc.camera)
            in_img = valid.copy()
            in_img[valid] = (
                (uv[valid, 0] >= 0.0) & (uv[valid, 0] <= sc.camera.image_w - 1)
                & (uv[valid, 1] >= 0.0) & (uv[valid, 1] <= sc.camera.image_h - 1)
            )
            tra = np.asarray(seg.traversable, int)
            untra = np.asarray(seg.untraversable, int)
            seg = SegmentedCloud(tra[in_img[tra]], untra[in_img[untra]])
            unclassified = np.nonzero(~in_img)[0]
        self.costmap = update_costmap(self.costmap, seg, cloud,
                                      (self.robot.x, self.robot.y), T,
                                      unclassified=unclassified)
        self._record_points(cloud, seg, T)

        if cfg.snapshot_every and t % cfg.snapshot_every == 0:
            self._snapshots.append((t, self.costmap))

        # replan on cadence, when no path is held, or when the held path got blocked
        need = (t % cfg.replan_every == 0) or self.current_path is None \
            or self._path_blocked()
        got_plan = False
        if need:
            try:
                p = plan(self.costmap, (self.robot.x, self.robot.y), self.goal,
                         lam=cfg.plan_lambda)
            except PlanningError:
                p = None
            if p is not None:
                remaining = self._remaining_cost()
                if p.total_cost < cfg.replan_adopt_factor * remaining:
                    self.current_path = p
                got_plan = True
                self._consecutive_failures = 0
            else:
                # keep following the last good path; ground truth in the
                # simulator catches genuinely wrong traversals
                self._consecutive_failures += 1
        else:
            got_plan = self.current_path is not None
        self.plan_available.append(bool(got_plan))

        if self.current_path is not None:
            try:
                self.robot = step_robot(sc.world, self.robot, self.current_path, cfg.dt)
            except CollisionFault as fault:
                self.fault_label = fault.label
                self.phase = FAULTED
        elif self._consecutive_failures >= cfg.stall_budget:
            self.phase = NO_PATH_STALLED

        self.trajectory.append(
            (t, float(self.robot.x), float(self.robot.y), float(self.robot.theta))
        )
        self.tick_count += 1
        if self.phase == RUNNING and self._goal_reached():
            self.phase = REACHED
        if self.phase == RUNNING and self.tick_count >= cfg.max_ticks:
            self.phase = NO_PATH_STALLED  # tick budget exhausted
        return self.phase

    def _remaining_cost(self):
        """Cost of the committed path from the robot's nearest waypoint to its
        end, on the current master grid; inf when no path or a cell is lethal."""
        if self.current_path is None:
            return math.inf
        cells = self.current_path.cells
        wps = self.current_path.waypoints
        grid = self.costmap.master
        res = self.costmap.spec.resolution
        lam = self.config.plan_lambda
        start = min(
            range(len(wps)),
            key=lambda i: (wps[i][0] - self.robot.x) ** 2 + (wps[i][1] - self.robot.y) ** 2,
        )
        total = 0.0
        for i in range(start, len(cells) - 1):
            (x0, y0), (x1, y1) = cells[i], cells[i + 1]
            c = int(grid[y1, x1])
            if c >= LETHAL:
                return math.inf
            step = res * math.sqrt(2.0) if (x0 != x1 and y0 != y1) else res
            total += step * (1.0 + lam * c / 253.0)
        return total

    def _path_blocked(self):
        if self.current_path is None:
            return False
        grid = self.costmap.master
        for ix, iy in self.current_path.cells:
            if grid[iy, ix] >= LETHAL:
                return True
        return False

    def _record_points(self, cloud, seg, T):
        if len(cloud) == 0:
            self.latest_points = []
            return
        world = cloud.points @ T[:3, :3].T + T[:3, 3]
        tra = set(int(i) for i in seg.traversable)
        self.latest_points = [
            (float(world[i, 0]), float(world[i, 1]), i in tra)
            for i in range(len(cloud))
        ]

    def run(self) -> MissionReport:
        while self.phase not in TERMINAL_PHASES:
            self.tick()
        return self.report()

    def report(self) -> MissionReport:
        return MissionReport(
            phase=self.phase,
            ticks=self.tick_count,
            trajectory=self.trajectory,
            plan_available=self.plan_available,
            fault_label=self.fault_label,
            directives=[(d.label, d.attribute) for d in self.directives],
            goal=self.goal,
            seed=self.scenario.seed,
            scenario=self.scenario.name,
        )

    def save_snapshots(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        for t, cm in self._snapshots:
            save_pgm(cm, os.path.join(out_dir, f"costmap_{t:05d}.pgm"))


def run_mission(scenario, instruction_text: str, goal=None,
                config: MissionConfig | None = None) -> MissionReport:
    """Headless end-to-end mission. `scenario` is a Scenario or a file path."""
    if not isinstance(scenario, Scenario):
        scenario = Scenario.load(scenario)
    return MissionRuntime(scenario, instruction_text, goal, config).run()
