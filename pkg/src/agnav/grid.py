"""Layered 3-D occupancy grid rasterized from the semantic map.

Cell states: Free, Dangerous (free cell 26-adjacent to an occupied one,
traversable at increased cost), Occupied. Altitude layers: ground (z index 0),
transition (z index 1, the takeoff/landing band), cruise (z index >= 2).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .camera import Point3
from .errors import InvalidInputError, SchemaError
from .mapping import FRAME_WORLD, SemanticMap

FREE, DANGEROUS, OCCUPIED = 0, 1, 2
STATE_NAMES = {FREE: "free", DANGEROUS: "dangerous", OCCUPIED: "occupied"}

LAYER_GROUND = "ground"
LAYER_TRANSITION = "transition"
LAYER_CRUISE = "cruise"

DEFAULT_CELL_SIZE_M = 0.5
DEFAULT_WORKSPACE_SIZE_M = (5.0, 8.0, 3.0)

Cell = tuple[int, int, int]


def layer_of(iz: int) -> str:
    if iz == 0:
        return LAYER_GROUND
    if iz == 1:
        return LAYER_TRANSITION
    return LAYER_CRUISE


@dataclass(frozen=True)
class Workspace:
    """Axis-aligned planning bounds: origin corner plus extents in meters."""

    origin: Point3 = (0.0, 0.0, 0.0)
    size: tuple[float, float, float] = DEFAULT_WORKSPACE_SIZE_M

    def __post_init__(self):
        if any(s <= 0 for s in self.size):
            raise InvalidInputError(f"workspace size must be positive, got {self.size}")


class OccupancyGrid:
    """Immutable-after-construction grid of cell states."""

    def __init__(self, origin: Point3, cell_size: float, states: np.ndarray):
        if cell_size <= 0:
            raise InvalidInputError(f"cell_size must be > 0, got {cell_size}")
        states = np.asarray(states, dtype=np.uint8)
        if states.ndim != 3:
            raise InvalidInputError(f"states must be 3-D, got shape {states.shape}")
        nx, ny, nz = states.shape
        if nx < 1 or ny < 1 or nz < 2:
            raise InvalidInputError(f"grid dims must be >= (1, 1, 2), got {states.shape}")
        self.origin = tuple(float(v) for v in origin)
        self.cell_size = float(cell_size)
        self.states = states
        self.states.setflags(write=False)

    @property
    def dims(self) -> Cell:
        return self.states.shape

    def in_bounds(self, cell: Cell) -> bool:
        return all(0 <= c < n for c, n in zip(cell, self.dims))

    def state(self, cell: Cell) -> int:
        if not self.in_bounds(cell):
            raise InvalidInputError(f"cell {cell} outside grid dims {self.dims}")
        return int(self.states[cell])

    def cell_center(self, cell: Cell) -> Point3:
        return tuple(
            self.origin[i] + (cell[i] + 0.5) * self.cell_size for i in range(3)
        )

    def cell_of(self, point: Point3) -> Cell:
        """World point -> containing cell, clamped to the grid bounds."""
        cell = []
        for i in range(3):
            idx = int(math.floor((point[i] - self.origin[i]) / self.cell_size))
            cell.append(min(max(idx, 0), self.dims[i] - 1))
        return tuple(cell)

    def to_document(self) -> dict:
        """Run-length-encoded dump for the console (C-order, z fastest)."""
        flat = self.states.reshape(-1)
        runs = []
        if flat.size:
            current = int(flat[0])
            count = 0
            for v in flat:
                v = int(v)
                if v == current:
                    count += 1
                else:
                    runs.append([count, current])
                    current, count = v, 1
            runs.append([count, current])
        return {
            "origin": list(self.origin),
            "cell_size": self.cell_size,
            "dims": list(self.dims),
            "layers": [layer_of(iz) for iz in range(self.dims[2])],
            "states": {str(FREE): "free", str(DANGEROUS): "dangerous", str(OCCUPIED): "occupied"},
            "cells_rle": runs,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "OccupancyGrid":
        try:
            dims = tuple(int(v) for v in doc["dims"])
            flat = np.empty(dims[0] * dims[1] * dims[2], dtype=np.uint8)
            pos = 0
            for count, value in doc["cells_rle"]:
                flat[pos : pos + count] = value
                pos += count
            if pos != flat.size:
                raise ValueError(f"RLE covers {pos} cells, expected {flat.size}")
            return cls(tuple(doc["origin"]), float(doc["cell_size"]), flat.reshape(dims))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError("grid", str(exc)) from exc

    @classmethod
    def from_file(cls, path: str | Path) -> "OccupancyGrid":
        return cls.from_document(json.loads(Path(path).read_text()))


def empty_grid(workspace: Workspace, cell_size: float = DEFAULT_CELL_SIZE_M) -> OccupancyGrid:
    dims = _grid_dims(workspace, cell_size)
    return OccupancyGrid(workspace.origin, cell_size, np.zeros(dims, dtype=np.uint8))


def _grid_dims(workspace: Workspace, cell_size: float) -> Cell:
    if cell_size <= 0:
        raise InvalidInputError(f"cell_size must be > 0, got {cell_size}")
    dims = tuple(max(1, math.ceil(s / cell_size - 1e-9)) for s in workspace.size)
    if dims[2] < 2:
        raise InvalidInputError(
            f"workspace height {workspace.size[2]} m yields {dims[2]} layer(s); "
            "at least a ground and a transition layer are required"
        )
    return dims


def rasterize(
    semantic_map: SemanticMap,
    workspace: Workspace = Workspace(),
    cell_size: float = DEFAULT_CELL_SIZE_M,
) -> OccupancyGrid:
    """Mark cells overlapped by any object's box Occupied, their 26-neighbors Dangerous.

    An object's box is centered at its position in x/y with extents w x d x h,
    grounded at z = position.z - h/2 clamped to >= 0. Overlap is strict
    (positive measure), so boxes that exactly touch a cell face do not claim it.
    """
    if semantic_map.frame != FRAME_WORLD:
        raise InvalidInputError("rasterize expects a world-frame map")
    dims = _grid_dims(workspace, cell_size)
    states = np.zeros(dims, dtype=np.uint8)
    ox, oy, oz = workspace.origin

    for obj in semantic_map.objects:
        h, w, d = obj.dimensions
        px, py, pz = obj.position
        z0 = max(0.0, pz - h / 2.0)
        lo = ((px - w / 2.0) - ox, (py - d / 2.0) - oy, z0 - oz)
        hi = ((px + w / 2.0) - ox, (py + d / 2.0) - oy, (z0 + h) - oz)
        idx = []
        for axis in range(3):
            # strict overlap: floor/ceil exclude cells the box only touches
            first = max(int(math.floor(lo[axis] / cell_size)), 0)
            last = min(int(math.ceil(hi[axis] / cell_size)) - 1, dims[axis] - 1)
            if first > last:
                break
            idx.append((first, last))
        if len(idx) < 3:
            continue
        (x0, x1), (y0, y1), (zl0, zl1) = idx
        states[x0 : x1 + 1, y0 : y1 + 1, zl0 : zl1 + 1] = OCCUPIED

    _mark_dangerous(states)
    return OccupancyGrid(workspace.origin, cell_size, states)


def _mark_dangerous(states: np.ndarray) -> None:
    """Set every Free 26-neighbor of an Occupied cell to Dangerous, in place."""
    occ = states == OCCUPIED
    near = np.zeros_like(occ)
    nx, ny, nz = states.shape
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dz in (-1, 0, 1):
                if dx == 0 and dy == 0 and dz == 0:
                    continue
                src = occ[
                    max(0, -dx) : nx - max(0, dx),
                    max(0, -dy) : ny - max(0, dy),
                    max(0, -dz) : nz - max(0, dz),
                ]
                near[
                    max(0, dx) : nx - max(0, -dx),
                    max(0, dy) : ny - max(0, -dy),
                    max(0, dz) : nz - max(0, -dz),
                ] |= src
    states[near & (states == FREE)] = DANGEROUS


def neighbors26(cell: Cell, dims: Cell) -> Iterable[Cell]:
    x, y, z = cell
    nx, ny, nz = dims
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dz in (-1, 0, 1):
                if dx == 0 and dy == 0 and dz == 0:
                    continue
                tx, ty, tz = x + dx, y + dy, z + dz
                if 0 <= tx < nx and 0 <= ty < ny and 0 <= tz < nz:
                    yield (tx, ty, tz)
