"""Ground-station service: capture -> map -> plan -> register -> mission -> telemetry.

One in-memory session per server. Mutating endpoints serialize through a
session lock; the mission simulator runs as an asyncio task at a fixed tick,
fanning telemetry out to any number of websocket subscribers. Map state can be
exported (GET /map) and re-imported (POST /map/import) across restarts.
"""

from __future__ import annotations

import asyncio
import base64
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .camera import CameraExtrinsics, CameraIntrinsics, Pose
from .detect import (
    DetectionRequest,
    RemoteBackend,
    ReplayBackend,
    SyntheticBackend,
    SyntheticScene,
    detect,
    synthetic_depth,
)
from .errors import AgnavError, SchemaError, UnreachableError
from .fusion import DepthMap, localize_object
from .grid import DEFAULT_CELL_SIZE_M, OccupancyGrid, Workspace, empty_grid, rasterize
from .mapping import DimensionCatalog, SemanticMap
from .mission import (
    EVENT_FAILURE,
    EVENT_MODE_READY,
    EVENT_SEGMENT_DONE,
    EVENT_START,
    PHASE_ABORTED,
    PHASE_COMPLETED,
    PHASE_EXECUTING,
    PHASE_SWITCHING,
    ManagerState,
    Mission,
    RobotSim,
    SegmentTracker,
    compile_mission,
    step_manager,
    tick,
)
from .planner import PlanSession, PlannedPath, PlannerCosts, concat_registered, plan, register_path

DEFAULT_TICK_S = 0.05  # 20 Hz
DEFAULT_MODE_SWITCH_S = 0.5


@dataclass
class ServiceConfig:
    workspace: Workspace = Workspace()
    cell_size: float = DEFAULT_CELL_SIZE_M
    catalog: DimensionCatalog = field(default_factory=DimensionCatalog.default)
    costs: PlannerCosts = PlannerCosts()
    backend_kind: str = "synthetic"  # synthetic | replay | remote
    fixture: Optional[str] = None  # scene file (synthetic) or fixture dir (replay)
    camera: CameraIntrinsics = CameraIntrinsics(500.0, (320.0, 240.0), (640, 480))
    extrinsics: CameraExtrinsics = CameraExtrinsics()
    robot_start: Pose = Pose((0.25, 0.25, 0.0))
    merge_radius: float = 0.5
    tick_s: float = DEFAULT_TICK_S
    time_scale: float = 1.0  # simulated seconds per wall second; 0 = unpaced
    mode_switch_s: float = DEFAULT_MODE_SWITCH_S
    console_dir: Optional[str] = None  # static operator console, served at /ui


class Session:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self.map = SemanticMap()
        self.grid: OccupancyGrid = empty_grid(config.workspace, config.cell_size)
        self.robot_pose = config.robot_start
        self.plan_session: Optional[PlanSession] = None
        self.candidate: Optional[PlannedPath] = None
        self.mission: Optional[Mission] = None
        self.manager = ManagerState()
        self.sim: Optional[RobotSim] = None
        self.mission_task: Optional[asyncio.Task] = None
        self.subscribers: list[asyncio.Queue] = []
        self.telemetry_history: list[dict] = []  # current mission's stream
        self.lock = asyncio.Lock()
        self.scene: Optional[SyntheticScene] = None
        if config.backend_kind == "synthetic":
            if config.fixture:
                self.scene = SyntheticScene.from_file(config.fixture)
                self.robot_pose = self.scene.robot
            else:
                self.scene = SyntheticScene(objects=[], camera=config.camera)
        elif config.backend_kind == "replay":
            self.replay = ReplayBackend(config.fixture or ".")
        elif config.backend_kind == "remote":
            self.remote = RemoteBackend()
        else:
            raise AgnavError(f"unknown backend kind {config.backend_kind!r}")

    @property
    def mission_running(self) -> bool:
        return self.mission_task is not None and not self.mission_task.done()

    def publish(self, record: dict) -> None:
        # called under the session lock; history lets late subscribers replay
        self.telemetry_history.append(record)
        for queue in list(self.subscribers):
            queue.put_nowait(record)

    def rebuild_grid(self) -> None:
        self.grid = rasterize(self.map, self.config.workspace, self.config.cell_size)

    def ensure_plan_session(self) -> PlanSession:
        if self.plan_session is None:
            anchor = self.grid.cell_of(self.robot_pose.position)
            self.plan_session = PlanSession(anchor=anchor, grid=self.grid)
        return self.plan_session


def _pose_from(doc: Optional[dict], default: Pose) -> Pose:
    if not doc:
        return default
    return Pose(
        (float(doc.get("x", 0.0)), float(doc.get("y", 0.0)), float(doc.get("z", 0.0))),
        float(doc.get("yaw", 0.0)),
    )


def _error_response(status: int, message: str, path: Optional[str] = None) -> JSONResponse:
    body: dict = {"error": message}
    if path is not None:
        body["path"] = path
    return JSONResponse(body, status_code=status)


def build_app(config: Optional[ServiceConfig] = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="agnav ground station", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    session = Session(config)
    app.state.session = session

    if config.console_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=config.console_dir, html=True), name="console")

    @app.exception_handler(SchemaError)
    async def schema_error_handler(_, exc: SchemaError):
        return _error_response(422, str(exc), path=exc.path)

    @app.exception_handler(AgnavError)
    async def domain_error_handler(_, exc: AgnavError):
        return _error_response(400, str(exc))

    @app.get("/state")
    async def get_state():
        plan_sess = session.plan_session
        return {
            "phase": session.manager.describe(),
            "active_mode": session.manager.active_mode,
            "mission_running": session.mission_running,
            "anchor": list(plan_sess.anchor) if plan_sess else None,
            "registered_count": len(plan_sess.registered) if plan_sess else 0,
            "robot": _pose_doc(session.sim.pose if session.sim else session.robot_pose),
            "object_count": len(session.map),
            "kernel": _kernel_name(),
        }

    @app.get("/map")
    async def get_map():
        return JSONResponse(session.map.export())

    @app.post("/map/import")
    async def import_map(doc: dict):
        async with session.lock:
            imported = SemanticMap.from_document(doc)
            session.map = imported
            session.rebuild_grid()
            session.plan_session = None
            session.candidate = None
        return JSONResponse(session.map.export())

    @app.get("/grid")
    async def get_grid():
        return session.grid.to_document()

    @app.post("/capture")
    async def capture(body: dict):
        async with session.lock:
            prompts = body.get("prompts")
            if not prompts or not isinstance(prompts, list):
                raise SchemaError("prompts", "must be a non-empty list of labels")
            robot_pose = _pose_from(body.get("robot_pose"), session.robot_pose)
            session.robot_pose = robot_pose

            backend, depth, cam, ext = _capture_sources(session, body, robot_pose)
            req = DetectionRequest(
                prompt_labels=[str(p) for p in prompts],
                image=_decode_image(body.get("image_b64")),
                image_id=body.get("image_id"),
            )
            detections = detect(backend, req)
            for det in detections:
                obj = localize_object(
                    det,
                    depth,
                    cam,
                    session.config.catalog.lookup(det.label),
                    robot_pose,
                    ext,
                )
                session.map.merge_observation(obj, session.config.merge_radius)
            session.rebuild_grid()
            session.plan_session = None  # anchors are grid-relative; re-derive
            session.candidate = None
            return JSONResponse(session.map.export())

    @app.post("/plan")
    async def plan_path(body: dict):
        async with session.lock:
            goal_doc = body.get("goal")
            if not isinstance(goal_doc, list) or len(goal_doc) != 3:
                raise SchemaError("goal", "must be a [x, y, z] cell index triple")
            goal = tuple(int(v) for v in goal_doc)
            plan_sess = session.ensure_plan_session()
            start = tuple(int(v) for v in body["start"]) if "start" in body else plan_sess.anchor
            if session.grid.in_bounds(goal) and session.grid.state(goal) == 2:
                return _error_response(400, "goal not traversable")
            try:
                candidate = plan(session.grid, start, goal, session.config.costs)
            except UnreachableError as exc:
                return JSONResponse(
                    {"status": "unreachable", "start": list(start), "goal": list(goal),
                     "detail": str(exc)}
                )
            session.candidate = candidate
            doc = candidate.to_document()
            doc["status"] = "candidate"
            return doc

    @app.post("/path/register")
    async def register():
        async with session.lock:
            if session.candidate is None:
                return _error_response(400, "no candidate path to register")
            plan_sess = session.ensure_plan_session()
            register_path(plan_sess, session.candidate)
            session.candidate = None
            return {
                "anchor": list(plan_sess.anchor),
                "registered_count": len(plan_sess.registered),
            }

    @app.post("/mission/start")
    async def mission_start():
        async with session.lock:
            if session.mission_running:
                return _error_response(409, "a mission is already running")
            plan_sess = session.plan_session
            if plan_sess is None or not plan_sess.registered:
                return _error_response(400, "no registered paths to fly")
            combined = concat_registered(plan_sess)
            session.mission = compile_mission(combined, session.grid)
            session.manager = ManagerState()
            session.telemetry_history = []
            session.sim = RobotSim(pose=session.robot_pose)
            session.manager, _ = step_manager(session.mission, session.manager, EVENT_START)
            session.mission_task = asyncio.create_task(_run_mission(session))
            return {
                "mission": session.mission.to_document(),
                "phase": session.manager.describe(),
                "cells": len(combined.cells),
                "cost": combined.cost,
            }

    @app.post("/mission/abort")
    async def mission_abort(body: Optional[dict] = None):
        async with session.lock:
            if not session.mission_running:
                return _error_response(400, "no mission running")
            reason = (body or {}).get("reason", "aborted by operator")
            session.manager, _ = step_manager(
                session.mission, session.manager, EVENT_FAILURE, reason=reason
            )
            return {"phase": session.manager.describe()}

    @app.websocket("/telemetry")
    async def telemetry(ws: WebSocket):
        await ws.accept()
        queue: asyncio.Queue = asyncio.Queue()
        async with session.lock:
            # snapshot + subscribe atomically so no record is lost or doubled
            backlog = list(session.telemetry_history)
            session.subscribers.append(queue)
        try:
            ended = False
            for record in backlog:
                await ws.send_json(record)
                if record.get("type") == "end":
                    ended = True
            while not ended:
                record = await queue.get()
                await ws.send_json(record)
                if record.get("type") == "end":
                    break
        except WebSocketDisconnect:
            pass
        finally:
            if queue in session.subscribers:
                session.subscribers.remove(queue)

    return app


def _kernel_name() -> str:
    from . import planner

    return planner.KERNEL_NAME


def _pose_doc(pose: Pose) -> dict:
    return {
        "x": pose.position[0],
        "y": pose.position[1],
        "z": pose.position[2],
        "yaw": pose.yaw,
    }


def _decode_image(image_b64: Optional[str]) -> Optional[np.ndarray]:
    if not image_b64:
        return None
    from PIL import Image

    raw = base64.b64decode(image_b64)
    with Image.open(io.BytesIO(raw)) as img:
        return np.asarray(img.convert("RGB"))


def _capture_sources(session: Session, body: dict, robot_pose: Pose):
    """Resolve (backend, metric depth map, intrinsics, extrinsics) for a capture."""
    config = session.config
    if config.backend_kind == "synthetic":
        scene = session.scene.with_robot(robot_pose)
        session.scene = scene
        return SyntheticBackend(scene), synthetic_depth(scene), scene.camera, scene.extrinsics
    if config.backend_kind == "replay":
        depth_file = body.get("depth_file")
        image_id = body.get("image_id")
        if depth_file is None and image_id is not None:
            implied = Path(config.fixture or ".") / f"{image_id}-depth.npy"
            if implied.exists():
                depth_file = str(implied)
        if depth_file is None:
            raise SchemaError("depth_file", "replay capture needs a depth map file")
        depth = DepthMap(np.load(depth_file))
        return session.replay, depth, config.camera, config.extrinsics
    # remote
    depth_file = body.get("depth_file")
    if depth_file is None:
        raise SchemaError("depth_file", "remote capture needs a depth map file")
    depth = DepthMap(np.load(depth_file))
    return session.remote, depth, config.camera, config.extrinsics


async def _run_mission(session: Session) -> None:
    """Drive the manager + simulator until a terminal phase, emitting telemetry."""
    config = session.config
    dt = config.tick_s
    t = 0.0
    tracker: Optional[SegmentTracker] = None
    switch_elapsed = 0.0
    last_phase = None

    def snapshot(progress: float) -> dict:
        pose = session.sim.pose
        return {
            "type": "tick",
            "t": t,
            "x": pose.position[0],
            "y": pose.position[1],
            "z": pose.position[2],
            "yaw": pose.yaw,
            "phase": session.manager.phase,
            "segment_index": session.manager.segment_index,
            "progress": progress,
        }

    while True:
        async with session.lock:
            state = session.manager
            if state.phase != last_phase:
                session.publish(
                    {
                        "type": "state",
                        "t": t,
                        "phase": state.phase,
                        "segment_index": state.segment_index,
                        "mode": state.active_mode,
                    }
                )
                last_phase = state.phase
            if state.phase in (PHASE_COMPLETED, PHASE_ABORTED):
                session.publish(
                    {"type": "end", "t": t, "phase": state.phase, "reason": state.reason}
                )
                return
            if state.phase == PHASE_SWITCHING:
                switch_elapsed += dt
                if switch_elapsed >= config.mode_switch_s - 1e-12:
                    switch_elapsed = 0.0
                    session.manager, _ = step_manager(
                        session.mission, state, EVENT_MODE_READY
                    )
                    tracker = None
            elif state.phase == PHASE_EXECUTING:
                if tracker is None:
                    segment = session.mission.segments[state.segment_index]
                    tracker = SegmentTracker(segment, session.grid, session.sim.pose.position)
                result = tick(session.sim, tracker, dt)
                session.publish(snapshot(result.progress))
                if result.done:
                    session.manager, _ = step_manager(session.mission, state, EVENT_SEGMENT_DONE)
                    tracker = None
            t += dt
        if config.time_scale > 0:
            await asyncio.sleep(dt / config.time_scale)
        else:
            await asyncio.sleep(0)
