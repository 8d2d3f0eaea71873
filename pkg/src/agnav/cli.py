"""Headless driver for the pipeline: map, plan, mission, eval, serve.

Every document the CLI reads or writes uses the same JSON schemas as the
service endpoints, so outputs can be fed to the service and vice versa.
Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

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
from .errors import AgnavError
from .evaluate import EvalReport, GroundTruthSet, emit_report, match_and_score
from .fusion import DepthMap, localize_object
from .grid import DEFAULT_CELL_SIZE_M, OccupancyGrid, Workspace, rasterize
from .mapping import DimensionCatalog, SemanticMap
from .mission import (
    EVENT_MODE_READY,
    EVENT_SEGMENT_DONE,
    EVENT_START,
    PHASE_EXECUTING,
    PHASE_SWITCHING,
    ManagerState,
    RobotSim,
    SegmentTracker,
    compile_mission,
    step_manager,
    tick,
)
from .planner import PlanSession, PlannedPath, concat_registered, plan, register_path


def _parse_triple(text: str, kind: type = float) -> tuple:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z triple, got {text!r}")
    return tuple(kind(p) for p in parts)


def _parse_cell(text: str) -> tuple[int, int, int]:
    return _parse_triple(text, int)


def _parse_pose(text: str) -> Pose:
    parts = [float(p) for p in text.split(",")]
    if len(parts) not in (3, 4):
        raise argparse.ArgumentTypeError(f"expected x,y,z[,yaw], got {text!r}")
    yaw = parts[3] if len(parts) == 4 else 0.0
    return Pose(tuple(parts[:3]), yaw)


def _parse_workspace(text: str) -> tuple[float, float, float]:
    parts = text.lower().split("x")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected WxDxH (e.g. 5x8x3), got {text!r}")
    return tuple(float(p) for p in parts)


def _emit(doc, out: str | None) -> None:
    text = json.dumps(doc, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _load_camera(path: str | None) -> CameraIntrinsics:
    if path is None:
        return CameraIntrinsics(500.0, (320.0, 240.0), (640, 480))
    doc = json.loads(Path(path).read_text())
    return CameraIntrinsics(
        float(doc["focal_px"]), tuple(doc["principal_point"]), tuple(doc["image_size"])
    )


def _load_catalog(path: str | None) -> DimensionCatalog:
    return DimensionCatalog.from_file(path) if path else DimensionCatalog.default()


def cmd_map(args) -> int:
    catalog = _load_catalog(args.catalog)
    prompts = [p.strip() for p in args.prompts.split(",") if p.strip()]

    if args.backend == "synthetic":
        scene = SyntheticScene.from_file(args.fixture)
        if args.pose is not None:
            scene = scene.with_robot(args.pose)
        backend = SyntheticBackend(scene)
        depth = synthetic_depth(scene)
        cam, ext, robot = scene.camera, scene.extrinsics, scene.robot
        req = DetectionRequest(prompt_labels=prompts)
    else:
        cam = _load_camera(args.camera)
        ext = CameraExtrinsics()
        robot = args.pose or Pose()
        if args.depth is None:
            raise AgnavError(f"--depth is required for the {args.backend} backend")
        depth = DepthMap(np.load(args.depth))
        if args.backend == "replay":
            backend = ReplayBackend(args.fixture)
            req = DetectionRequest(prompt_labels=prompts, image_id=args.image_id)
        else:
            backend = RemoteBackend()
            from PIL import Image

            with Image.open(args.image) as img:
                image = np.asarray(img.convert("RGB"))
            req = DetectionRequest(prompt_labels=prompts, image=image)

    semantic_map = SemanticMap()
    for det in detect(backend, req):
        obj = localize_object(det, depth, cam, catalog.lookup(det.label), robot, ext)
        semantic_map.merge_observation(obj, args.merge_radius)
    _emit(semantic_map.export(), args.out)
    return 0


def _grid_for(args) -> OccupancyGrid:
    if getattr(args, "grid", None):
        return OccupancyGrid.from_file(args.grid)
    if not getattr(args, "map", None):
        raise AgnavError("either --grid or --map is required")
    semantic_map = SemanticMap.from_document(json.loads(Path(args.map).read_text()))
    workspace = Workspace(args.origin, args.workspace)
    return rasterize(semantic_map, workspace, args.cell_size)


def cmd_plan(args) -> int:
    grid = _grid_for(args)
    session = PlanSession(anchor=tuple(args.start), grid=grid)
    candidates = []
    for goal in args.goal:
        candidate = plan(grid, session.anchor, tuple(goal))
        candidates.append(candidate)
        if args.register or len(args.goal) > 1:
            register_path(session, candidate)
    if session.registered:
        combined = concat_registered(session)
        doc = {
            "registered": [p.to_document() for p in session.registered],
            "anchor": list(session.anchor),
            "combined": combined.to_document(),
        }
    else:
        doc = candidates[0].to_document()
    if args.grid_out:
        Path(args.grid_out).write_text(json.dumps(grid.to_document()) + "\n")
    _emit(doc, args.out)
    return 0


def cmd_mission(args) -> int:
    path_doc = json.loads(Path(args.path).read_text())
    if "combined" in path_doc:
        path_doc = path_doc["combined"]
    planned = PlannedPath.from_document(path_doc)
    grid = _grid_for(args)
    mission = compile_mission(planned, grid)

    sim = RobotSim(pose=Pose(grid.cell_center(tuple(planned.cells[0]))))
    state = ManagerState()
    state, _ = step_manager(mission, state, EVENT_START)
    telemetry = []
    t = 0.0
    dt = args.dt
    tracker = None
    switch_elapsed = 0.0
    for _ in range(int(args.max_sim_s / dt)):
        if state.phase == PHASE_SWITCHING:
            switch_elapsed += dt
            if switch_elapsed >= args.mode_switch_s - 1e-12:
                switch_elapsed = 0.0
                state, _ = step_manager(mission, state, EVENT_MODE_READY)
                tracker = None
        elif state.phase == PHASE_EXECUTING:
            if tracker is None:
                segment = mission.segments[state.segment_index]
                tracker = SegmentTracker(segment, grid, sim.pose.position)
            result = tick(sim, tracker, dt)
            telemetry.append(
                {
                    "t": round(t, 9),
                    "x": sim.pose.position[0],
                    "y": sim.pose.position[1],
                    "z": sim.pose.position[2],
                    "yaw": sim.pose.yaw,
                    "phase": state.phase,
                    "segment_index": state.segment_index,
                    "progress": result.progress,
                }
            )
            if result.done:
                state, _ = step_manager(mission, state, EVENT_SEGMENT_DONE)
                tracker = None
        else:
            break
        t += dt
    doc = {
        "mission": mission.to_document(),
        "final_phase": state.describe(),
        "final_pose": {
            "x": sim.pose.position[0],
            "y": sim.pose.position[1],
            "z": sim.pose.position[2],
            "yaw": sim.pose.yaw,
        },
        "telemetry": telemetry,
    }
    _emit(doc, args.out)
    return 0


def cmd_eval(args) -> int:
    reports = []
    if args.table_fixtures:
        rows = json.loads(Path(args.table_fixtures).read_text())
        for row in rows:
            reports.append(
                EvalReport(
                    model_name=row["model"],
                    detection_ratio_pct=float(row["detection_ratio_pct"]),
                    mean_time_s=row.get("mean_time_s"),
                )
            )
    if args.estimates and args.truth:
        estimates = SemanticMap.from_document(json.loads(Path(args.estimates).read_text()))
        truth = GroundTruthSet.from_file(args.truth)
        reports.append(
            match_and_score(estimates, truth, args.max_match, model_name=args.model)
        )
    if not reports:
        raise AgnavError("eval needs --estimates/--truth and/or --table-fixtures")
    text, doc = emit_report(reports)
    print(text)
    if args.json_out:
        Path(args.json_out).write_text(json.dumps(doc, indent=2) + "\n")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, build_app

    config = ServiceConfig(
        workspace=Workspace(args.origin, args.workspace),
        cell_size=args.cell_size,
        catalog=_load_catalog(args.catalog),
        backend_kind=args.backend,
        fixture=args.fixture,
        camera=_load_camera(args.camera),
        time_scale=args.time_scale,
        console_dir=args.console_dir,
    )
    app = build_app(config)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agnav",
        description="Monocular semantic mapping and aerial-ground mission planning.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_map = sub.add_parser("map", help="detect and localize objects from one capture")
    p_map.add_argument("--backend", choices=["synthetic", "replay", "remote"],
                       default="synthetic")
    p_map.add_argument("--fixture", help="scene file (synthetic) or fixture dir (replay)")
    p_map.add_argument("--image-id", help="replay fixture image id")
    p_map.add_argument("--image", help="image file (remote backend)")
    p_map.add_argument("--depth", help="metric depth map .npy (replay/remote)")
    p_map.add_argument("--camera", help="camera intrinsics JSON (replay/remote)")
    p_map.add_argument("--prompts", required=True, help="comma-separated labels")
    p_map.add_argument("--pose", type=_parse_pose, help="robot pose x,y,z[,yaw]")
    p_map.add_argument("--catalog", help="dimension catalog JSON")
    p_map.add_argument("--merge-radius", type=float, default=0.5)
    p_map.add_argument("-o", "--out")
    p_map.set_defaults(fn=cmd_map)

    def add_grid_args(p):
        p.add_argument("--map", help="semantic map JSON to rasterize")
        p.add_argument("--grid", help="pre-rasterized grid dump JSON")
        p.add_argument("--workspace", type=_parse_workspace, default=(5.0, 8.0, 3.0),
                       help="WxDxH meters (default 5x8x3)")
        p.add_argument("--origin", type=_parse_triple, default=(0.0, 0.0, 0.0))
        p.add_argument("--cell-size", type=float, default=DEFAULT_CELL_SIZE_M)

    p_plan = sub.add_parser("plan", help="plan (and optionally register) paths")
    add_grid_args(p_plan)
    p_plan.add_argument("--start", type=_parse_cell, required=True, help="cell i,j,k")
    p_plan.add_argument("--goal", type=_parse_cell, action="append", required=True,
                        help="cell i,j,k (repeat for multi-stop)")
    p_plan.add_argument("--register", action="store_true",
                        help="register each planned path")
    p_plan.add_argument("--grid-out", help="also write the grid dump here")
    p_plan.add_argument("-o", "--out")
    p_plan.set_defaults(fn=cmd_plan)

    p_mission = sub.add_parser("mission", help="compile a path and simulate execution")
    p_mission.add_argument("--path", required=True, help="path document from `plan`")
    add_grid_args(p_mission)
    p_mission.add_argument("--dt", type=float, default=0.05)
    p_mission.add_argument("--mode-switch-s", type=float, default=0.5)
    p_mission.add_argument("--max-sim-s", type=float, default=600.0)
    p_mission.add_argument("-o", "--out")
    p_mission.set_defaults(fn=cmd_mission)

    p_eval = sub.add_parser("eval", help="score estimates against ground truth")
    p_eval.add_argument("--estimates", help="semantic map JSON")
    p_eval.add_argument("--truth", help="ground-truth JSON file")
    p_eval.add_argument("--max-match", type=float, default=1.0)
    p_eval.add_argument("--model", default="agnav")
    p_eval.add_argument("--table-fixtures", help="JSON rows of model/ratio/time")
    p_eval.add_argument("--json-out")
    p_eval.set_defaults(fn=cmd_eval)

    p_serve = sub.add_parser("serve", help="run the ground-station service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--workspace", type=_parse_workspace, default=(5.0, 8.0, 3.0))
    p_serve.add_argument("--origin", type=_parse_triple, default=(0.0, 0.0, 0.0))
    p_serve.add_argument("--cell-size", type=float, default=DEFAULT_CELL_SIZE_M)
    p_serve.add_argument("--catalog")
    p_serve.add_argument("--camera")
    p_serve.add_argument("--backend", choices=["synthetic", "replay", "remote"],
                         default="synthetic")
    p_serve.add_argument("--fixture")
    p_serve.add_argument("--time-scale", type=float, default=1.0,
                         help="simulated seconds per wall second (0 = unpaced)")
    p_serve.add_argument("--console-dir", help="serve the operator console from this dir at /ui")
    p_serve.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except AgnavError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
