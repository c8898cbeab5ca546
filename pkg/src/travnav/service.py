"""HTTP/WebSocket boundary for live missions.

Commands are JSON POSTs enqueued to the tick thread; snapshots stream over a
WebSocket with cell-delta encoding (full grid on subscribe).
"""

from __future__ import annotations

import asyncio
import threading
import time

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from .runtime import MissionConfig, MissionRuntime
from .scenarios import list_scenarios, load_scenario

DEFAULT_STREAM_HZ = 10.0


class MissionService:
    """Wraps a MissionRuntime with a pausable tick thread and snapshots."""

    def __init__(self, runtime: MissionRuntime, auto_tick: bool = True,
                 tick_interval: float = 0.01):
        self.lock = threading.Lock()
        self.runtime = runtime
        self.paused = not auto_tick
        self.tick_interval = tick_interval
        self._stop = threading.Event()
        self._thread = None

    def start(self):
        self._thread = threading.Thread(target=self._loop, daemon=True)
        self._thread.start()

    def stop(self):
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2)

    def _loop(self):
        while not self._stop.is_set():
            if not self.paused:
                with self.lock:
                    # a tick in a terminal phase only drains the injection
                    # queue, which is what revives a stalled mission
                    self.runtime.tick()
            time.sleep(self.tick_interval)

    def step(self):
        with self.lock:
            return self.runtime.tick()

    def reset(self, scenario_name: str, seed=None):
        sc = load_scenario(scenario_name)
        if seed is not None:
            sc.seed = seed
        with self.lock:
            cfg = self.runtime.config
            self.runtime = MissionRuntime(sc, "", None, cfg)

    def snapshot(self, with_grid: bool = True) -> dict:
        with self.lock:
            rt = self.runtime
            snap = {
                "tick": rt.tick_count,
                "phase": rt.phase,
                "robot": {"x": rt.robot.x, "y": rt.robot.y, "theta": rt.robot.theta},
                "goal": {"x": rt.goal[0], "y": rt.goal[1]},
                "path": [[x, y] for x, y in rt.current_path.waypoints]
                if rt.current_path is not None else [],
                "boxes": [
                    {"label": b.label, "attribute": b.attribute,
                     "c_x": b.box.c_x, "c_y": b.box.c_y, "w": b.box.w, "h": b.box.h}
                    for b in rt.latest_boxes
                ],
                "points": [
                    {"x": x, "y": y, "traversable": tra}
                    for x, y, tra in rt.latest_points
                ],
                "grid_spec": rt.costmap.spec.to_dict(),
                "directives": [
                    {"label": d.label, "attribute": d.attribute} for d in rt.directives
                ],
                "fault_label": rt.fault_label,
            }
            if with_grid:
                snap["grid"] = rt.costmap.master.reshape(-1).tolist()
            else:
                snap["_master"] = rt.costmap.master.copy()
            return snap


def grid_delta(prev: np.ndarray, cur: np.ndarray):
    """Changed cells as (flat index, cost) pairs."""
    idx = np.nonzero(prev.reshape(-1) != cur.reshape(-1))[0]
    vals = cur.reshape(-1)[idx]
    return [[int(i), int(v)] for i, v in zip(idx, vals)]


def create_app(service: MissionService, stream_hz: float = DEFAULT_STREAM_HZ) -> FastAPI:
    app = FastAPI(title="travnav service")
    app.state.service = service

    @app.get("/scenarios")
    def scenarios():
        return {"scenarios": list_scenarios()}

    @app.post("/reset")
    def reset(body: dict):
        name = body.get("scenario")
        if name not in list_scenarios():
            return JSONResponse({"error": f"unknown scenario {name!r}"}, status_code=400)
        service.reset(name, body.get("seed"))
        return JSONResponse({"ok": True}, status_code=202)

    @app.post("/instruction")
    def instruction(body: dict):
        text = body.get("text")
        if not isinstance(text, str):
            return JSONResponse({"error": "missing text"}, status_code=400)
        service.runtime.inject_instruction(text)
        return JSONResponse({"ok": True}, status_code=202)

    @app.post("/goal")
    def goal(body: dict):
        try:
            x, y = float(body["x"]), float(body["y"])
        except (KeyError, TypeError, ValueError):
            return JSONResponse({"error": "goal needs numeric x and y"}, status_code=400)
        try:
            service.runtime.inject_goal(x, y)
        except ValueError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        return JSONResponse({"ok": True}, status_code=202)

    @app.post("/pause")
    def pause():
        service.paused = True
        return {"ok": True}

    @app.post("/resume")
    def resume():
        service.paused = False
        return {"ok": True}

    @app.post("/step")
    def step():
        phase = service.step()
        return {"ok": True, "phase": phase}

    @app.get("/state")
    def state():
        return service.snapshot(with_grid=True)

    @app.websocket("/stream")
    async def stream(ws: WebSocket):
        await ws.accept()
        last_master = None
        last_tick = -1
        try:
            while True:
                snap = service.snapshot(with_grid=False)
                master = snap.pop("_master")
                if last_master is None:
                    snap["grid"] = master.reshape(-1).tolist()
                    snap["full"] = True
                    await ws.send_json(snap)
                    last_master, last_tick = master, snap["tick"]
                elif snap["tick"] != last_tick:
                    snap["delta"] = grid_delta(last_master, master)
                    snap["full"] = False
                    await ws.send_json(snap)
                    last_master, last_tick = master, snap["tick"]
                await asyncio.sleep(1.0 / stream_hz)
        except WebSocketDisconnect:
            pass

    return app


def serve(runtime: MissionRuntime, addr: str):
    """Blocking: run the service on host:port."""
    import uvicorn

    host, _, port = addr.rpartition(":")
    service = MissionService(runtime, auto_tick=True)
    service.start()
    app = create_app(service)
    try:
        uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    finally:
        service.stop()
