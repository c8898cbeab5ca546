"""travnav command line: parse / ground / project / segment / costmap / plan / sim."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np


def _cmd_parse(args):
    from .instruction import Instruction, VerbLexicon, parse_instruction

    lexicon = VerbLexicon.load(args.lexicon) if args.lexicon else VerbLexicon.default()
    for d in parse_instruction(Instruction(args.text), lexicon):
        print(f"{d.label}\t{d.attribute}")


def _cmd_project(args):
    from .geometry import BEHIND_CAMERA, CameraModel, project

    cam = CameraModel.load(args.calib)
    p = [float(t) for t in args.point.split(",")]
    s = project(p, cam)
    if s is BEHIND_CAMERA:
        print("behind-camera")
        sys.exit(2)
    print(f"{s.u} {s.v} {s.depth}")


def _cmd_ground(args):
    from .grounding import GrounderNoise, ground_synthetic
    from .simworld import RobotState, Scenario, camera_view

    sc = Scenario.load(args.scenario)
    x, y, th = (float(t) for t in args.pose.split(","))
    robot = RobotState(x, y, th)
    view = camera_view(sc.world, robot, sc.camera, sc.lidar.height)
    labels = [t.strip() for t in args.labels.split(",") if t.strip()]
    noise = GrounderNoise(seed=args.seed) if args.seed is not None else None
    for label, box in ground_synthetic(view, labels, sc.camera, noise):
        print(f"{label} {box.c_x} {box.c_y} {box.w} {box.h}")


def _cmd_segment(args):
    from .geometry import CameraModel
    from .grounding import AttributedBox, BoundingBox
    from .segmentation import PointCloud, segment

    cam = CameraModel.load(args.calib)
    pts = np.loadtxt(args.cloud, ndmin=2)
    boxes = []
    with open(args.boxes) as fh:
        for line in fh:
            if not line.strip():
                continue
            label, cx, cy, w, h, attr = line.split()
            boxes.append(
                AttributedBox(BoundingBox(float(cx), float(cy), float(w), float(h)),
                              label, int(attr))
            )
    seg = segment(PointCloud(pts), boxes, cam)
    print("traversable:", " ".join(str(i) for i in seg.traversable))
    print("untraversable:", " ".join(str(i) for i in seg.untraversable))


def _cmd_costmap(args):
    from .costmap import save_pgm
    from .runtime import MissionConfig, MissionRuntime
    from .simworld import Scenario

    sc = Scenario.load(args.scenario)
    cfg = MissionConfig(max_ticks=args.steps)
    rt = MissionRuntime(sc, args.instruction, config=cfg)
    for _ in range(args.steps):
        rt.tick()
    save_pgm(rt.costmap, args.out)
    print(f"wrote {args.out} (+ .meta) after {rt.tick_count} steps")


def _cmd_plan(args):
    from .costmap import Costmap, GridSpec, load_pgm
    from .planner import PlanningError, plan

    cost, spec = load_pgm(args.map)
    cm = Costmap(spec, static=cost, inflation_radius=0.0)
    start = tuple(float(t) for t in args.start.split(","))
    goal = tuple(float(t) for t in args.goal.split(","))
    try:
        p = plan(cm, start, goal)
    except PlanningError as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(2)
    if p is None:
        print("no path", file=sys.stderr)
        sys.exit(3)
    for x, y in p.waypoints:
        print(f"{x} {y}")


def _cmd_sim(args):
    from .runtime import MissionConfig, MissionRuntime
    from .simworld import Scenario

    sc = Scenario.load(args.scenario)
    if args.seed is not None:
        sc.seed = args.seed
    goal = tuple(float(t) for t in args.goal.split(",")) if args.goal else None
    cfg = MissionConfig(snapshot_every=50 if args.record else 0)
    rt = MissionRuntime(sc, args.instruction, goal, cfg)

    if args.serve:
        from .service import serve

        serve(rt, args.serve)
        return

    report = rt.run()
    if args.record:
        report.save(args.record)
        rt.save_snapshots(args.record)
    print(json.dumps(report.to_dict()["trajectory"][-1:]) if args.headless else report.to_json())
    print(f"phase={report.phase} ticks={report.ticks}", file=sys.stderr)


def main(argv=None):
    ap = argparse.ArgumentParser(prog="travnav")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="extract (landmark, attribute) directives")
    p.add_argument("text")
    p.add_argument("--lexicon")
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("project", help="project a LiDAR point to pixels")
    p.add_argument("--calib", required=True)
    p.add_argument("--point", required=True, metavar="x,y,z")
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("ground", help="synthetic grounding from a scenario pose")
    p.add_argument("--scenario", required=True)
    p.add_argument("--pose", required=True, metavar="x,y,theta")
    p.add_argument("--labels", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_cmd_ground)

    p = sub.add_parser("segment", help="segment a cloud file with a boxes file")
    p.add_argument("--calib", required=True)
    p.add_argument("--cloud", required=True)
    p.add_argument("--boxes", required=True)
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("costmap", help="run N ticks and export the costmap")
    p.add_argument("--scenario", required=True)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--out", default="map.pgm")
    p.add_argument("--instruction", default="")
    p.set_defaults(func=_cmd_costmap)

    p = sub.add_parser("plan", help="plan on an exported costmap")
    p.add_argument("--map", required=True)
    p.add_argument("--start", required=True, metavar="x,y")
    p.add_argument("--goal", required=True, metavar="x,y")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("sim", help="run a mission (optionally serving a console)")
    p.add_argument("--scenario", required=True)
    p.add_argument("--instruction", default="")
    p.add_argument("--goal", metavar="x,y")
    p.add_argument("--headless", action="store_true")
    p.add_argument("--serve", metavar="ADDR", help="host:port for the live service")
    p.add_argument("--seed", type=int)
    p.add_argument("--record", metavar="DIR")
    p.set_defaults(func=_cmd_sim)

    args = ap.parse_args(argv)
    args.func(args)


if __name__ == "__main__":
    main()
