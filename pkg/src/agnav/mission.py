"""Mission compilation, the mission-manager state machine, and the robot simulator.

A planned path splits into typed segments: maximal ground runs become
GroundMove, each ground->air crossing becomes a Takeoff carrying exactly the
transition pair of cells, maximal airborne runs become Flight, and each
air->ground crossing becomes a Land. Each segment kind needs its own control
mode, so the manager inserts an explicit SwitchingMode phase (acknowledged by
mode_ready) whenever consecutive segments need different modes.

The simulator executes segments kinematically. Takeoff climbs vertically above
the takeoff spot before translating to the air cell; Land translates above the
landing spot before descending. The vertical transition therefore always
happens at a fixed point even when the grid step was diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .camera import Point3, Pose, wrap_angle
from .errors import InvalidInputError, InvalidPathError, ProtocolError
from .grid import Cell, OccupancyGrid, OCCUPIED
from .planner import PlannedPath

GROUND_MOVE = "GroundMove"
TAKEOFF = "Takeoff"
FLIGHT = "Flight"
LAND = "Land"

MODE_GROUND = "ground"
MODE_AIR = "air"
MODE_NONE = "none"

PHASE_IDLE = "Idle"
PHASE_SWITCHING = "SwitchingMode"
PHASE_EXECUTING = "ExecutingSegment"
PHASE_COMPLETED = "Completed"
PHASE_ABORTED = "Aborted"

EVENT_START = "start"
EVENT_SEGMENT_DONE = "segment_done"
EVENT_MODE_READY = "mode_ready"
EVENT_FAILURE = "failure"


def mode_for(kind: str) -> str:
    return MODE_GROUND if kind == GROUND_MOVE else MODE_AIR


@dataclass
class MissionSegment:
    kind: str
    cells: list[Cell]

    def __post_init__(self):
        if self.kind not in (GROUND_MOVE, TAKEOFF, FLIGHT, LAND):
            raise InvalidInputError(f"unknown segment kind {self.kind!r}")
        zs = [c[2] for c in self.cells]
        if self.kind == GROUND_MOVE and any(z != 0 for z in zs):
            raise InvalidInputError("GroundMove cells must all be at z=0")
        if self.kind == FLIGHT and any(z < 1 for z in zs):
            raise InvalidInputError("Flight cells must all be at z>=1")
        if self.kind == TAKEOFF and not (len(zs) == 2 and zs[0] == 0 and zs[1] >= 1):
            raise InvalidInputError("Takeoff must carry exactly a (z=0, z>=1) pair")
        if self.kind == LAND and not (len(zs) == 2 and zs[0] >= 1 and zs[1] == 0):
            raise InvalidInputError("Land must carry exactly a (z>=1, z=0) pair")

    def to_document(self) -> dict:
        return {"kind": self.kind, "cells": [list(c) for c in self.cells]}


@dataclass
class Mission:
    segments: list[MissionSegment]

    def cells(self) -> list[Cell]:
        """Concatenated segment cells with junction duplicates removed."""
        out: list[Cell] = []
        for seg in self.segments:
            start = 1 if out and seg.cells and tuple(seg.cells[0]) == tuple(out[-1]) else 0
            out.extend(tuple(c) for c in seg.cells[start:])
        return out

    def to_document(self) -> dict:
        return {"segments": [s.to_document() for s in self.segments]}

    @classmethod
    def from_document(cls, doc: dict) -> "Mission":
        return cls(
            [MissionSegment(s["kind"], [tuple(c) for c in s["cells"]]) for s in doc["segments"]]
        )


def compile_mission(
    path: PlannedPath,
    grid: Optional[OccupancyGrid] = None,
    allow_airborne_start: bool = False,
) -> Mission:
    """Split a planned path into typed segments, preserving every cell."""
    cells = [tuple(int(v) for v in c) for c in path.cells]
    if not cells:
        raise InvalidInputError("cannot compile an empty path")
    if grid is not None:
        for cell in cells:
            if not grid.in_bounds(cell):
                raise InvalidPathError(f"path cell {cell} outside grid dims {grid.dims}")
            if grid.state(cell) == OCCUPIED:
                raise InvalidPathError(f"path touches occupied cell {cell}")
    if cells[0][2] != 0 and not allow_airborne_start:
        raise InvalidInputError(
            f"path starts above ground at {cells[0]} with no prior air mode"
        )

    segments: list[MissionSegment] = []
    run: list[Cell] = [cells[0]]
    airborne = cells[0][2] >= 1

    for cell in cells[1:]:
        target_air = cell[2] >= 1
        if target_air == airborne:
            run.append(cell)
            continue
        # single-cell runs still become segments so kinds alternate legally
        segments.append(MissionSegment(FLIGHT if airborne else GROUND_MOVE, list(run)))
        segments.append(MissionSegment(TAKEOFF if target_air else LAND, [run[-1], cell]))
        airborne = target_air
        run = [cell]
    segments.append(MissionSegment(FLIGHT if airborne else GROUND_MOVE, list(run)))
    return Mission(segments)


@dataclass(frozen=True)
class ManagerState:
    phase: str = PHASE_IDLE
    segment_index: Optional[int] = None
    active_mode: str = MODE_NONE
    reason: Optional[str] = None

    def describe(self) -> str:
        if self.phase == PHASE_EXECUTING:
            return f"{self.phase}({self.segment_index})"
        if self.phase == PHASE_ABORTED:
            return f"{self.phase}({self.reason})"
        return self.phase


@dataclass(frozen=True)
class Command:
    """What the robot should do next: arm a mode or execute a segment."""

    kind: str  # "arm" | "execute" | "halt" | "done"
    mode: Optional[str] = None
    segment_index: Optional[int] = None


def step_manager(
    mission: Mission,
    state: ManagerState,
    event: str,
    reason: Optional[str] = None,
) -> tuple[ManagerState, Command]:
    """Advance the state machine by one event. Illegal events raise ProtocolError."""
    if event == EVENT_FAILURE:
        return (
            ManagerState(PHASE_ABORTED, None, state.active_mode, reason or "failure"),
            Command("halt"),
        )

    if state.phase == PHASE_IDLE:
        if event != EVENT_START:
            raise ProtocolError(f"event {event!r} not legal in phase {state.phase}")
        if not mission.segments:
            raise InvalidInputError("cannot start an empty mission")
        mode = mode_for(mission.segments[0].kind)
        return (ManagerState(PHASE_SWITCHING, 0, MODE_NONE), Command("arm", mode=mode))

    if state.phase == PHASE_SWITCHING:
        if event != EVENT_MODE_READY:
            raise ProtocolError(f"event {event!r} not legal in phase {state.phase}")
        idx = state.segment_index
        mode = mode_for(mission.segments[idx].kind)
        return (
            ManagerState(PHASE_EXECUTING, idx, mode),
            Command("execute", mode=mode, segment_index=idx),
        )

    if state.phase == PHASE_EXECUTING:
        if event != EVENT_SEGMENT_DONE:
            raise ProtocolError(f"event {event!r} not legal in phase {state.phase}")
        next_idx = state.segment_index + 1
        if next_idx >= len(mission.segments):
            return (ManagerState(PHASE_COMPLETED, None, state.active_mode), Command("done"))
        next_mode = mode_for(mission.segments[next_idx].kind)
        if next_mode != state.active_mode:
            return (
                ManagerState(PHASE_SWITCHING, next_idx, state.active_mode),
                Command("arm", mode=next_mode),
            )
        return (
            ManagerState(PHASE_EXECUTING, next_idx, next_mode),
            Command("execute", mode=next_mode, segment_index=next_idx),
        )

    raise ProtocolError(f"event {event!r} not legal in terminal phase {state.phase}")


@dataclass
class RobotSim:
    """Kinematic robot: constant speeds per motion type, yaw faces motion."""

    pose: Pose = Pose()
    walk_speed: float = 0.2
    flight_speed: float = 0.5
    vertical_speed: float = 0.3

    def __post_init__(self):
        if min(self.walk_speed, self.flight_speed, self.vertical_speed) <= 0:
            raise InvalidInputError("speeds must be > 0")
        if self.pose.position[2] < 0:
            raise InvalidInputError("pose z must be >= 0")


@dataclass(frozen=True)
class TickResult:
    progress: float  # fraction of the segment distance covered
    done: bool


class SegmentTracker:
    """Waypoint runner for one mission segment on one grid."""

    def __init__(self, segment: MissionSegment, grid: OccupancyGrid, start: Point3):
        self.segment = segment
        centers = [grid.cell_center(c) for c in segment.cells]
        if segment.kind == TAKEOFF:
            g, a = centers
            legs = [((g[0], g[1], a[2]), "vertical_speed"), (a, "flight_speed")]
        elif segment.kind == LAND:
            a, g = centers
            legs = [((g[0], g[1], a[2]), "flight_speed"), (g, "vertical_speed")]
        elif segment.kind == FLIGHT:
            legs = [(c, "flight_speed") for c in centers]
        else:
            legs = [(c, "walk_speed") for c in centers]
        self._legs = legs
        self._leg_index = 0
        self._position = tuple(float(v) for v in start)
        self.total_length = 0.0
        prev = self._position
        for target, _ in legs:
            self.total_length += _dist(prev, target)
            prev = target
        self.traveled = 0.0

    @property
    def progress(self) -> float:
        if self.total_length == 0.0:
            return 1.0
        return min(self.traveled / self.total_length, 1.0)

    @property
    def done(self) -> bool:
        return self._leg_index >= len(self._legs)

    def advance(self, sim: RobotSim, dt: float) -> Point3:
        """Move up to dt seconds along the legs; returns the new position."""
        remaining = dt
        pos = self._position
        yaw = sim.pose.yaw
        while remaining > 1e-12 and self._leg_index < len(self._legs):
            target, speed_attr = self._legs[self._leg_index]
            speed = getattr(sim, speed_attr)
            gap = _dist(pos, target)
            if gap <= speed * remaining + 1e-12:
                if gap > 0:
                    yaw = _heading(pos, target, yaw)
                pos = target
                self.traveled += gap
                remaining -= gap / speed
                self._leg_index += 1
            else:
                step = speed * remaining
                yaw = _heading(pos, target, yaw)
                frac = step / gap
                pos = tuple(p + (t - p) * frac for p, t in zip(pos, target))
                self.traveled += step
                remaining = 0.0
        self._position = pos
        sim.pose = Pose(pos, yaw)
        return pos


def tick(sim: RobotSim, tracker: SegmentTracker, dt: float) -> TickResult:
    """Advance the simulator dt seconds through the tracker's segment."""
    if dt <= 0:
        raise InvalidInputError(f"dt must be > 0, got {dt}")
    tracker.advance(sim, dt)
    return TickResult(tracker.progress, tracker.done)


def _dist(a: Point3, b: Point3) -> float:
    return math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2)


def _heading(frm: Point3, to: Point3, fallback: float) -> float:
    dx, dy = to[0] - frm[0], to[1] - frm[1]
    if abs(dx) < 1e-12 and abs(dy) < 1e-12:
        return fallback  # vertical motion keeps the current heading
    return wrap_angle(math.atan2(dy, dx))
