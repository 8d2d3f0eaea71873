"""Object-level semantic map: dimension catalog, observation merging, JSON exchange.

The JSON schema is the exchange format between the pipeline, the CLI, and the
operator console:

    {"frame": "robot_local"|"world",
     "robot_pose": {"x", "y", "z", "yaw"},
     "objects": [{"id", "label", "x", "y", "z", "h", "w", "d",
                  "confidence", "method"}]}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .camera import Point3, Pose, robot_to_world
from .errors import FrameMismatchError, InvalidInputError, SchemaError

FRAME_ROBOT_LOCAL = "robot_local"
FRAME_WORLD = "world"

METHOD_FUSED = "fused"
METHOD_DEPTH_ONLY = "depth_only"

DEFAULT_DIMENSIONS = (0.5, 0.5, 0.5)
DEFAULT_MERGE_RADIUS_M = 0.5

# Editable defaults for common indoor classes; treated as user config, not truth.
DEFAULT_CATALOG_ENTRIES = {
    "desk": (0.75, 1.4, 0.7),
    "office chair": (0.95, 0.6, 0.6),
    "suitcase": (0.65, 0.45, 0.28),
    "compressor": (0.6, 0.5, 0.5),
    "cabinet": (1.8, 0.9, 0.45),
    "box": (0.4, 0.4, 0.4),
    "robotic dog": (0.4, 0.3, 0.65),
}
DEFAULT_CATALOG_ALIASES = {
    "chair": "office chair",
    "table": "desk",
    "carton": "box",
    "quadruped robot": "robotic dog",
}


@dataclass(frozen=True)
class DimensionCatalog:
    """label -> (height, width, depth) in meters, with label synonyms."""

    entries: dict[str, tuple[float, float, float]]
    aliases: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        norm_entries = {}
        for label, dims in self.entries.items():
            h, w, d = dims
            if h <= 0 or w <= 0 or d <= 0:
                raise InvalidInputError(f"catalog dimensions for {label!r} must be > 0")
            norm_entries[label.lower()] = (float(h), float(w), float(d))
        norm_aliases = {}
        for alias, target in self.aliases.items():
            if target.lower() not in norm_entries:
                raise InvalidInputError(f"alias {alias!r} points at unknown label {target!r}")
            norm_aliases[alias.lower()] = target.lower()
        object.__setattr__(self, "entries", norm_entries)
        object.__setattr__(self, "aliases", norm_aliases)

    def lookup(self, label: str) -> Optional[tuple[float, float, float]]:
        """Exact match first, then alias; case-insensitive. None if unknown."""
        key = label.lower()
        if key in self.entries:
            return self.entries[key]
        if key in self.aliases:
            return self.entries[self.aliases[key]]
        return None

    @classmethod
    def default(cls) -> "DimensionCatalog":
        return cls(dict(DEFAULT_CATALOG_ENTRIES), dict(DEFAULT_CATALOG_ALIASES))

    @classmethod
    def from_file(cls, path: str | Path) -> "DimensionCatalog":
        doc = json.loads(Path(path).read_text())
        entries = {k: tuple(v) for k, v in doc.get("entries", {}).items()}
        return cls(entries, dict(doc.get("aliases", {})))


def lookup_dimensions(catalog: DimensionCatalog, label: str):
    return catalog.lookup(label)


@dataclass
class SemanticObject:
    """A labeled object with a fused world position and catalog dimensions."""

    label: str
    position: Point3
    dimensions: tuple[float, float, float] = DEFAULT_DIMENSIONS  # (h, w, d)
    confidence: float = 1.0
    method: str = METHOD_FUSED
    id: Optional[str] = None
    observed_at: Optional[float] = None  # session metadata; not serialized
    frame: Optional[str] = None  # None = caller asserts it matches the map

    def __post_init__(self):
        h, w, d = self.dimensions
        if h <= 0 or w <= 0 or d <= 0:
            raise InvalidInputError(f"object dimensions must be > 0, got {self.dimensions}")
        if not all(math.isfinite(v) for v in self.position):
            raise InvalidInputError(f"object position must be finite, got {self.position}")
        if not (0.0 <= self.confidence <= 1.0):
            raise InvalidInputError(f"confidence must be in [0, 1], got {self.confidence}")
        self.position = tuple(float(v) for v in self.position)
        self.dimensions = tuple(float(v) for v in self.dimensions)


class SemanticMap:
    """Registry of localized objects. Mutations go through merge_observation."""

    def __init__(self, frame: str = FRAME_WORLD, robot_pose: Pose = Pose()):
        if frame not in (FRAME_ROBOT_LOCAL, FRAME_WORLD):
            raise InvalidInputError(f"unknown frame {frame!r}")
        self.frame = frame
        self.robot_pose_at_capture = robot_pose
        self._objects: dict[str, SemanticObject] = {}
        self._next_id = 1

    def __len__(self) -> int:
        return len(self._objects)

    @property
    def objects(self) -> list[SemanticObject]:
        return [self._objects[k] for k in sorted(self._objects, key=_id_sort_key)]

    def get(self, obj_id: str) -> Optional[SemanticObject]:
        return self._objects.get(obj_id)

    def _fresh_id(self) -> str:
        obj_id = f"obj-{self._next_id}"
        self._next_id += 1
        return obj_id

    def merge_observation(
        self, obj: SemanticObject, merge_radius: float = DEFAULT_MERGE_RADIUS_M
    ) -> SemanticObject:
        """Insert an observation, averaging into an existing nearby same-label object.

        Within merge_radius the positions are confidence-weighted averaged and
        the confidence becomes the max; otherwise the object gets a fresh id.
        Returns the stored object.
        """
        if obj.frame is not None and obj.frame != self.frame:
            raise FrameMismatchError(
                f"observation frame {obj.frame!r} != map frame {self.frame!r}"
            )
        for existing in self.objects:
            if existing.label.lower() != obj.label.lower():
                continue
            if _dist(existing.position, obj.position) <= merge_radius:
                w1, w2 = existing.confidence, obj.confidence
                total = w1 + w2
                if total == 0.0:
                    weights = (0.5, 0.5)
                else:
                    weights = (w1 / total, w2 / total)
                merged_pos = tuple(
                    weights[0] * a + weights[1] * b
                    for a, b in zip(existing.position, obj.position)
                )
                existing.position = merged_pos
                existing.confidence = max(w1, w2)
                if obj.observed_at is not None:
                    existing.observed_at = obj.observed_at
                return existing
        stored = replace(obj, id=self._fresh_id())
        self._objects[stored.id] = stored
        return stored

    def insert(self, obj: SemanticObject) -> SemanticObject:
        """Insert preserving the object's id (used by import)."""
        if obj.id is None:
            obj = replace(obj, id=self._fresh_id())
        if obj.id in self._objects:
            raise InvalidInputError(f"duplicate object id {obj.id!r}")
        self._objects[obj.id] = obj
        m = _id_number(obj.id)
        if m is not None and m >= self._next_id:
            self._next_id = m + 1
        return obj

    def to_world_frame(self, robot: Pose) -> "SemanticMap":
        """Transform all positions by the robot pose; no-op if already world."""
        if self.frame == FRAME_WORLD:
            return self
        out = SemanticMap(FRAME_WORLD, robot)
        out._next_id = self._next_id
        for obj in self.objects:
            out._objects[obj.id] = replace(
                obj, position=robot_to_world(obj.position, robot), frame=FRAME_WORLD
            )
        return out

    def export(self) -> dict:
        pose = self.robot_pose_at_capture
        return {
            "frame": self.frame,
            "robot_pose": {
                "x": pose.position[0],
                "y": pose.position[1],
                "z": pose.position[2],
                "yaw": pose.yaw,
            },
            "objects": [
                {
                    "id": o.id,
                    "label": o.label,
                    "x": o.position[0],
                    "y": o.position[1],
                    "z": o.position[2],
                    "h": o.dimensions[0],
                    "w": o.dimensions[1],
                    "d": o.dimensions[2],
                    "confidence": o.confidence,
                    "method": o.method,
                }
                for o in self.objects
            ],
        }

    @classmethod
    def from_document(cls, doc: dict) -> "SemanticMap":
        if not isinstance(doc, dict):
            raise SchemaError("$", f"expected object, got {type(doc).__name__}")
        frame = _field(doc, "$", "frame", str)
        if frame not in (FRAME_ROBOT_LOCAL, FRAME_WORLD):
            raise SchemaError("frame", f"unknown frame tag {frame!r}")
        pose_doc = _field(doc, "$", "robot_pose", dict)
        pose = Pose(
            (
                _field(pose_doc, "robot_pose", "x", (int, float)),
                _field(pose_doc, "robot_pose", "y", (int, float)),
                _field(pose_doc, "robot_pose", "z", (int, float)),
            ),
            _field(pose_doc, "robot_pose", "yaw", (int, float)),
        )
        objects = _field(doc, "$", "objects", list)
        out = cls(frame, pose)
        for i, obj_doc in enumerate(objects):
            path = f"objects[{i}]"
            if not isinstance(obj_doc, dict):
                raise SchemaError(path, f"expected object, got {type(obj_doc).__name__}")
            obj = SemanticObject(
                id=_field(obj_doc, path, "id", str),
                label=_field(obj_doc, path, "label", str),
                position=(
                    _field(obj_doc, path, "x", (int, float)),
                    _field(obj_doc, path, "y", (int, float)),
                    _field(obj_doc, path, "z", (int, float)),
                ),
                dimensions=(
                    _field(obj_doc, path, "h", (int, float)),
                    _field(obj_doc, path, "w", (int, float)),
                    _field(obj_doc, path, "d", (int, float)),
                ),
                confidence=_field(obj_doc, path, "confidence", (int, float)),
                method=_field(obj_doc, path, "method", str),
            )
            if obj.method not in (METHOD_FUSED, METHOD_DEPTH_ONLY):
                raise SchemaError(f"{path}.method", f"unknown method {obj.method!r}")
            out.insert(obj)
        return out

    def export_text(self) -> str:
        return json.dumps(self.export())


def export_json(semantic_map: SemanticMap) -> dict:
    return semantic_map.export()


def import_json(doc: dict) -> SemanticMap:
    return SemanticMap.from_document(doc)


def _field(doc: dict, parent: str, key: str, types) -> object:
    path = key if parent == "$" else f"{parent}.{key}"
    if key not in doc:
        raise SchemaError(path, "missing required field")
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, types):
        expected = types.__name__ if isinstance(types, type) else "number"
        raise SchemaError(path, f"expected {expected}, got {type(value).__name__}")
    return value


def _dist(a: Point3, b: Point3) -> float:
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def _id_number(obj_id: str) -> Optional[int]:
    if obj_id.startswith("obj-") and obj_id[4:].isdigit():
        return int(obj_id[4:])
    return None


def _id_sort_key(obj_id: str):
    n = _id_number(obj_id)
    return (0, n, obj_id) if n is not None else (1, 0, obj_id)
