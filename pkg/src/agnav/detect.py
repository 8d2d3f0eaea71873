"""Detection backends behind one interface: remote API, file replay, synthetic.

All backends answer a DetectionRequest with a confidence-sorted Detection list
whose labels come from the request's prompt list. The synthetic backend doubles
as the ground-truth oracle for tests: it renders exact bounding boxes and depth
maps from a scene description by projecting axis-aligned boxes through the
pinhole model.
"""

from __future__ import annotations

import base64
import io
import json
import os
import threading
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .camera import (
    BoundingBox,
    CameraExtrinsics,
    CameraIntrinsics,
    Point3,
    Pose,
    world_to_camera,
)
from .errors import BackendError, FixtureNotFoundError, InvalidInputError
from .fusion import DepthMap, Mask, SCALE_METRIC

DEFAULT_BACKGROUND_DEPTH_M = 50.0


@dataclass(frozen=True)
class Detection:
    label: str
    bbox: BoundingBox
    confidence: float
    mask: Optional[Mask] = None

    def __post_init__(self):
        if not (0.0 <= self.confidence <= 1.0):
            raise InvalidInputError(f"confidence must be in [0, 1], got {self.confidence}")


@dataclass
class DetectionRequest:
    prompt_labels: list[str]
    image: Optional[np.ndarray] = None  # (H, W, 3) uint8
    image_id: Optional[str] = None  # replay fixture reference

    def __post_init__(self):
        if not self.prompt_labels:
            raise InvalidInputError("prompt_labels must be non-empty")
        if self.image is not None:
            self.image = np.asarray(self.image, dtype=np.uint8)
            if self.image.ndim != 3 or self.image.shape[2] != 3 or self.image.size == 0:
                raise InvalidInputError(f"image must be (H, W, 3) uint8, got {self.image.shape}")


@dataclass(frozen=True)
class SceneObject:
    label: str
    position: Point3  # world frame, object center
    dimensions: tuple[float, float, float]  # (h, w, d) meters

    def __post_init__(self):
        if any(v < 0 for v in self.dimensions) or self.dimensions[0] <= 0:
            raise InvalidInputError(f"dimensions must be positive, got {self.dimensions}")


@dataclass(frozen=True)
class SyntheticScene:
    """Ground-truth scene: boxes in the world plus the capturing camera."""

    objects: list[SceneObject]
    camera: CameraIntrinsics
    robot: Pose = Pose()
    extrinsics: CameraExtrinsics = CameraExtrinsics()
    background_depth_m: float = DEFAULT_BACKGROUND_DEPTH_M

    def with_robot(self, robot: Pose) -> "SyntheticScene":
        return replace(self, robot=robot)

    @classmethod
    def from_document(cls, doc: dict) -> "SyntheticScene":
        cam = doc["camera"]
        intrinsics = CameraIntrinsics(
            focal_px=float(cam["focal_px"]),
            principal_point=tuple(cam["principal_point"]),
            image_size=tuple(cam["image_size"]),
        )
        ext_doc = doc.get("extrinsics", {})
        extrinsics = CameraExtrinsics(
            translation=tuple(ext_doc.get("translation", (0.0, 0.0, 0.0))),
            yaw_offset=float(ext_doc.get("yaw_offset", 0.0)),
        )
        pose_doc = doc.get("robot_pose", {})
        robot = Pose(
            tuple(pose_doc.get("position", (0.0, 0.0, 0.0))),
            float(pose_doc.get("yaw", 0.0)),
        )
        objects = [
            SceneObject(o["label"], tuple(o["position"]), tuple(o["dimensions"]))
            for o in doc.get("objects", [])
        ]
        return cls(
            objects=objects,
            camera=intrinsics,
            robot=robot,
            extrinsics=extrinsics,
            background_depth_m=float(doc.get("background_depth_m", DEFAULT_BACKGROUND_DEPTH_M)),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "SyntheticScene":
        return cls.from_document(json.loads(Path(path).read_text()))


def _object_camera_geometry(scene: SyntheticScene, obj: SceneObject):
    """Project one object: (clipped bbox, center depth) or None if not visible."""
    h, w, d = obj.dimensions
    cx, cy, cz = obj.position
    corners = [
        (cx + sx * w / 2.0, cy + sy * d / 2.0, cz + sz * h / 2.0)
        for sx in (-1.0, 1.0)
        for sy in (-1.0, 1.0)
        for sz in (-1.0, 1.0)
    ]
    cam_pts = [world_to_camera(p, scene.robot, scene.extrinsics) for p in corners]
    if any(p[2] <= 0 for p in cam_pts):
        return None  # behind (or straddling) the image plane: skip
    cam = scene.camera
    us = [cam.cx + cam.focal_px * p[0] / p[2] for p in cam_pts]
    vs = [cam.cy + cam.focal_px * p[1] / p[2] for p in cam_pts]
    box = BoundingBox(min(us), min(vs), max(us), max(vs))
    if not box.intersects_image(cam.width, cam.height):
        return None
    center_depth = world_to_camera(obj.position, scene.robot, scene.extrinsics)[2]
    return box.clipped(cam.width, cam.height), center_depth


def synthetic_render(scene: SyntheticScene) -> list[Detection]:
    """Exact detections for every visible object; confidence 1.0, rect masks."""
    cam = scene.camera
    detections = []
    for obj in scene.objects:
        geom = _object_camera_geometry(scene, obj)
        if geom is None:
            continue
        box, _ = geom
        mask = _rect_mask(box, cam.width, cam.height)
        detections.append(Detection(obj.label, box, 1.0, mask))
    return detections


def synthetic_depth(scene: SyntheticScene) -> DepthMap:
    """Exact metric depth: each object's pixels read its center's camera depth.

    Nearer objects win where projections overlap; everything else reads the
    background depth.
    """
    cam = scene.camera
    values = np.full((cam.height, cam.width), scene.background_depth_m, dtype=np.float64)
    rendered = []
    for obj in scene.objects:
        geom = _object_camera_geometry(scene, obj)
        if geom is not None:
            rendered.append(geom)
    # paint far to near so nearer surfaces overwrite
    rendered.sort(key=lambda bd: -bd[1])
    for box, depth_m in rendered:
        bitmap = _rect_mask(box, cam.width, cam.height).bitmap
        values[bitmap] = min(depth_m, scene.background_depth_m)
    return DepthMap(values, SCALE_METRIC)


def _rect_mask(box: BoundingBox, width: int, height: int) -> Mask:
    ys, xs = np.mgrid[0:height, 0:width]
    bitmap = (
        (xs + 0.5 >= box.x_min)
        & (xs + 0.5 <= box.x_max)
        & (ys + 0.5 >= box.y_min)
        & (ys + 0.5 <= box.y_max)
    )
    return Mask(bitmap)


class SyntheticBackend:
    """Detector oracle over a SyntheticScene."""

    name = "synthetic"

    def __init__(self, scene: SyntheticScene):
        self.scene = scene

    def detect(self, req: DetectionRequest) -> list[Detection]:
        prompts = {p.lower() for p in req.prompt_labels}
        return [d for d in synthetic_render(self.scene) if d.label.lower() in prompts]

    def image_size(self, req: DetectionRequest) -> tuple[int, int]:
        return self.scene.camera.image_size


class ReplayBackend:
    """Replays detections recorded in fixture files.

    A fixture is <root>/<image_id>.json:
        {"image_id": ..., "detections": [{"label", "bbox": [x0, y0, x1, y1],
                                          "confidence", "mask_file"?}]}
    mask_file paths are resolved relative to the fixture and may be .npy or
    image files (nonzero pixels are set).
    """

    name = "replay"

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def detect(self, req: DetectionRequest) -> list[Detection]:
        if req.image_id is None:
            raise InvalidInputError("replay backend needs an image_id")
        path = self.root / f"{req.image_id}.json"
        if not path.exists():
            raise FixtureNotFoundError(f"no fixture for image_id {req.image_id!r} at {path}")
        doc = json.loads(path.read_text())
        detections = []
        for entry in doc.get("detections", []):
            bbox = BoundingBox(*entry["bbox"])
            mask = None
            if entry.get("mask_file"):
                mask = _load_mask(self.root / entry["mask_file"])
            detections.append(Detection(entry["label"], bbox, float(entry["confidence"]), mask))
        return detections

    def image_size(self, req: DetectionRequest) -> Optional[tuple[int, int]]:
        if req.image is not None:
            return (req.image.shape[1], req.image.shape[0])
        return None


def _load_mask(path: Path) -> Mask:
    if path.suffix == ".npy":
        return Mask(np.load(path))
    from PIL import Image

    with Image.open(path) as img:
        return Mask(np.asarray(img.convert("L")) > 0)


class RemoteBackend:
    """Client for an open-vocabulary detector HTTP API.

    Request: POST {"image": base64 PNG, "labels": [...]}
    Response: {"detections": [{"label", "box": [normalized x0, y0, x1, y1],
                               "score"}]}
    Retries twice with 0.5 s / 1 s backoff; at most `max_inflight` concurrent
    requests are issued to respect vendor rate limits.
    """

    name = "remote"

    RETRY_BACKOFF_S = (0.5, 1.0)

    def __init__(
        self,
        endpoint: Optional[str] = None,
        api_key: Optional[str] = None,
        timeout_s: Optional[float] = None,
        max_inflight: int = 2,
        retries: int = 2,
    ):
        self.endpoint = endpoint or os.environ.get("DETECTOR_ENDPOINT")
        if not self.endpoint:
            raise InvalidInputError("remote backend needs an endpoint (DETECTOR_ENDPOINT)")
        self.api_key = api_key if api_key is not None else os.environ.get("DETECTOR_API_KEY")
        if timeout_s is None:
            timeout_s = float(os.environ.get("DETECTOR_TIMEOUT_S", "30"))
        self.timeout_s = timeout_s
        self.retries = retries
        self._inflight = threading.Semaphore(max_inflight)

    def detect(self, req: DetectionRequest) -> list[Detection]:
        if req.image is None:
            raise InvalidInputError("remote backend needs an image")
        import requests

        payload = {
            "image": _encode_png_b64(req.image),
            "labels": list(req.prompt_labels),
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            if attempt > 0:
                time.sleep(self.RETRY_BACKOFF_S[min(attempt - 1, len(self.RETRY_BACKOFF_S) - 1)])
            with self._inflight:
                try:
                    resp = requests.post(
                        self.endpoint, json=payload, headers=headers, timeout=self.timeout_s
                    )
                except requests.RequestException as exc:
                    last_error = exc
                    continue
            if resp.status_code != 200:
                last_error = BackendError(f"detector returned status {resp.status_code}")
                continue
            try:
                return self._parse(resp.json(), req)
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                raise BackendError(f"malformed detector response: {exc}") from exc
        raise BackendError(f"detector request failed after {self.retries + 1} attempts") from last_error

    def _parse(self, doc: dict, req: DetectionRequest) -> list[Detection]:
        height, width = req.image.shape[:2]
        detections = []
        for entry in doc["detections"]:
            x0, y0, x1, y1 = entry["box"]
            bbox = BoundingBox(x0 * width, y0 * height, x1 * width, y1 * height)
            detections.append(Detection(str(entry["label"]), bbox, float(entry["score"])))
        return detections

    def image_size(self, req: DetectionRequest) -> Optional[tuple[int, int]]:
        if req.image is not None:
            return (req.image.shape[1], req.image.shape[0])
        return None


def _encode_png_b64(image: np.ndarray) -> str:
    from PIL import Image

    buf = io.BytesIO()
    Image.fromarray(image, mode="RGB").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def detect(backend, req: DetectionRequest) -> list[Detection]:
    """Run a backend and normalize its output.

    Detections are filtered to the prompted labels, clipped to the image
    rectangle when the size is known, and sorted by descending confidence
    (stable, so equal-confidence order is the backend's).
    """
    raw = backend.detect(req)
    prompts = {p.lower() for p in req.prompt_labels}
    size = backend.image_size(req) if hasattr(backend, "image_size") else None
    out = []
    for det in raw:
        if det.label.lower() not in prompts:
            continue
        if size is not None:
            if not det.bbox.intersects_image(size[0], size[1]):
                continue
            clipped = det.bbox.clipped(size[0], size[1])
            if clipped != det.bbox:
                det = Detection(det.label, clipped, det.confidence, det.mask)
        out.append(det)
    out.sort(key=lambda d: -d.confidence)
    return out
