"""Aerial-Ground A* planning over the layered occupancy grid.

Walking is cheapest (ground multiplier 1.0), cruising flight costs more
(2.0), and the transition layer where takeoff/landing happen costs the most
(4.0); entering a dangerous cell adds a flat penalty of 10 * cell_size.
Multipliers are configurable but must keep ground < cruise < transition.

The search kernel runs compiled (agnav._astar, Cython) when the extension is
available, falling back to the pure-Python twin. Both produce bit-identical
paths; set AGNAV_PURE_PYTHON=1 to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

from .errors import (
    AnchorError,
    EmptySessionError,
    InvalidInputError,
    InvalidPathError,
    UnreachableError,
)
from .grid import OCCUPIED, Cell, OccupancyGrid

if os.environ.get("AGNAV_PURE_PYTHON"):
    from . import _astar_py as _kernel
else:
    try:
        from . import _astar as _kernel  # type: ignore[attr-defined]
    except ImportError:
        from . import _astar_py as _kernel

KERNEL_NAME = _kernel.KERNEL_NAME

STATUS_CANDIDATE = "candidate"
STATUS_REGISTERED = "registered"

DANGER_PENALTY_CELLS = 10.0  # penalty = 10 * cell_size per dangerous cell entered


@dataclass(frozen=True)
class PlannerCosts:
    ground: float = 1.0
    transition: float = 4.0
    cruise: float = 2.0

    def __post_init__(self):
        if not (0 < self.ground < self.cruise < self.transition):
            raise InvalidInputError(
                "layer multipliers must satisfy 0 < ground < cruise < transition, "
                f"got {self.ground}/{self.cruise}/{self.transition}"
            )


DEFAULT_COSTS = PlannerCosts()


@dataclass
class PlannedPath:
    cells: list[Cell]
    cost: float
    status: str = STATUS_CANDIDATE

    def to_document(self) -> dict:
        return {"cells": [list(c) for c in self.cells], "cost": self.cost, "status": self.status}

    @classmethod
    def from_document(cls, doc: dict) -> "PlannedPath":
        return cls(
            [tuple(c) for c in doc["cells"]],
            float(doc["cost"]),
            doc.get("status", STATUS_CANDIDATE),
        )


def plan(
    grid: OccupancyGrid,
    start: Cell,
    goal: Cell,
    costs: PlannerCosts = DEFAULT_COSTS,
) -> PlannedPath:
    """Optimal 26-connected path from start to goal; ties prefer lower altitude."""
    for name, cell in (("start", start), ("goal", goal)):
        if not grid.in_bounds(cell):
            raise InvalidInputError(f"{name} cell {cell} outside grid dims {grid.dims}")
        if grid.state(cell) == OCCUPIED:
            raise InvalidInputError(f"{name} cell {cell} is not traversable")
    start = tuple(int(v) for v in start)
    goal = tuple(int(v) for v in goal)
    if start == goal:
        return PlannedPath([start], 0.0)

    nx, ny, nz = grid.dims
    flat = grid.states.reshape(-1)
    result = _kernel.search(
        flat,
        nx,
        ny,
        nz,
        (start[0] * ny + start[1]) * nz + start[2],
        (goal[0] * ny + goal[1]) * nz + goal[2],
        grid.cell_size,
        costs.ground,
        costs.transition,
        costs.cruise,
        DANGER_PENALTY_CELLS * grid.cell_size,
    )
    if result is None:
        raise UnreachableError(f"no path from {start} to {goal}")
    ids, cost = result
    cells = [((i // nz) // ny, (i // nz) % ny, i % nz) for i in ids]
    return PlannedPath(cells, cost)


@dataclass
class PlanSession:
    """Multi-stop planning state: registered paths chain from a moving anchor."""

    anchor: Cell
    grid: Optional[OccupancyGrid] = None
    registered: list[PlannedPath] = field(default_factory=list)

    def __post_init__(self):
        self.anchor = tuple(int(v) for v in self.anchor)


def register_path(session: PlanSession, candidate: PlannedPath) -> PlanSession:
    """Commit a candidate: it must start at the anchor; its end becomes the anchor."""
    if not candidate.cells:
        raise InvalidPathError("cannot register an empty path")
    if tuple(candidate.cells[0]) != session.anchor:
        raise AnchorError(
            f"candidate starts at {candidate.cells[0]}, session anchor is {session.anchor}"
        )
    if session.grid is not None:
        for cell in candidate.cells:
            if session.grid.state(cell) == OCCUPIED:
                raise InvalidPathError(f"path touches occupied cell {cell}")
    candidate.status = STATUS_REGISTERED
    session.registered.append(candidate)
    session.anchor = tuple(candidate.cells[-1])
    return session


def concat_registered(session: PlanSession) -> PlannedPath:
    """Join registered paths end to end without duplicating junction cells."""
    if not session.registered:
        raise EmptySessionError("no registered paths in session")
    cells: list[Cell] = list(session.registered[0].cells)
    cost = session.registered[0].cost
    for segment in session.registered[1:]:
        cells.extend(segment.cells[1:])
        cost += segment.cost
    return PlannedPath(cells, cost, STATUS_REGISTERED)
