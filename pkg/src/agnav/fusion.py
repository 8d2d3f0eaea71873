"""Distance estimation and fusion for single-image object localization.

Two independent distance estimates are combined per object:

* geometric: focal_px * known_height / bbox_height (needs catalog dimensions)
* learned depth: the median depth-map value under the object's mask

When both are available the fused distance is 0.8 * geometric + 0.2 * depth;
objects with unknown dimensions fall back to the depth estimate alone.
Relative depth maps can be rescaled to meters from reference objects of known
distance before extraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np

from .camera import (
    BoundingBox,
    CameraExtrinsics,
    CameraIntrinsics,
    Pose,
    backproject,
    camera_to_world,
    distance_from_bbox,
)
from .errors import (
    DegenerateReferenceError,
    EmptyMaskError,
    InvalidInputError,
    MissingReferenceError,
)
from .mapping import (
    DEFAULT_DIMENSIONS,
    METHOD_DEPTH_ONLY,
    METHOD_FUSED,
    SemanticObject,
)

if TYPE_CHECKING:
    from .detect import Detection

SCALE_RELATIVE = "relative"
SCALE_METRIC = "metric"

GEOMETRIC_WEIGHT = 0.8
DEPTH_WEIGHT = 0.2

METHOD_GEOMETRIC_ONLY = "geometric_only"


@dataclass
class DepthMap:
    """Per-pixel depth raster; values are meters once scale_state == metric."""

    values: np.ndarray  # (height, width) float64
    scale_state: str = SCALE_METRIC

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise InvalidInputError(f"depth map must be 2-D, got shape {self.values.shape}")
        if self.scale_state not in (SCALE_RELATIVE, SCALE_METRIC):
            raise InvalidInputError(f"unknown scale_state {self.scale_state!r}")
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise InvalidInputError("depth values must be finite and >= 0")

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, DepthMap):
            return NotImplemented
        return self.scale_state == other.scale_state and np.array_equal(
            self.values, other.values
        )


@dataclass
class Mask:
    """Boolean pixel bitmap aligned with a depth map / image."""

    bitmap: np.ndarray  # (height, width) bool

    def __post_init__(self):
        self.bitmap = np.asarray(self.bitmap, dtype=bool)
        if self.bitmap.ndim != 2:
            raise InvalidInputError(f"mask must be 2-D, got shape {self.bitmap.shape}")

    @property
    def width(self) -> int:
        return self.bitmap.shape[1]

    @property
    def height(self) -> int:
        return self.bitmap.shape[0]

    @property
    def popcount(self) -> int:
        return int(self.bitmap.sum())

    def __eq__(self, other):
        if not isinstance(other, Mask):
            return NotImplemented
        return np.array_equal(self.bitmap, other.bitmap)


@dataclass(frozen=True)
class DistanceEstimate:
    geometric_m: Optional[float]
    depth_m: Optional[float]
    fused_m: float
    method: str

    def __post_init__(self):
        if self.fused_m <= 0:
            raise InvalidInputError(f"fused distance must be > 0, got {self.fused_m}")
        if self.method == METHOD_FUSED and (self.geometric_m is None or self.depth_m is None):
            raise InvalidInputError("method=fused requires both component estimates")


def bbox_mask(box: BoundingBox, width: int, height: int) -> Mask:
    """Rectangular mask over pixels whose centers fall inside the box."""
    clipped = box.clipped(width, height)
    ys, xs = np.mgrid[0:height, 0:width]
    bitmap = (
        (xs + 0.5 >= clipped.x_min)
        & (xs + 0.5 <= clipped.x_max)
        & (ys + 0.5 >= clipped.y_min)
        & (ys + 0.5 <= clipped.y_max)
    )
    return Mask(bitmap)


def median_masked_depth(depth: DepthMap, mask: Mask) -> float:
    """Median of depth values at set pixels (even count: mean of the middle two)."""
    if (mask.height, mask.width) != (depth.height, depth.width):
        raise InvalidInputError(
            f"mask {mask.bitmap.shape} does not match depth map {depth.values.shape}"
        )
    if mask.popcount == 0:
        raise EmptyMaskError("mask has no set pixels")
    return float(np.median(depth.values[mask.bitmap]))


def scale_depth_map(depth: DepthMap, refs: list[tuple[Mask, float]]) -> DepthMap:
    """Rescale a relative depth map to meters via reference objects.

    Each reference contributes scale = known_distance / masked_median; the map
    is multiplied by the median of those scales.
    """
    if depth.scale_state != SCALE_RELATIVE:
        raise InvalidInputError("scale_depth_map expects a relative depth map")
    if not refs:
        raise MissingReferenceError("at least one reference object is required")
    scales = []
    for mask, known_m in refs:
        if known_m <= 0:
            raise InvalidInputError(f"reference distance must be > 0, got {known_m}")
        med = median_masked_depth(depth, mask)
        if med <= 0:
            raise DegenerateReferenceError("reference masked median is zero")
        scales.append(known_m / med)
    global_scale = float(np.median(np.array(scales)))
    return DepthMap(depth.values * global_scale, SCALE_METRIC)


def fuse_distance(geometric_m: Optional[float], depth_m: float) -> DistanceEstimate:
    """Weighted 80/20 combination; depth-only when no geometric estimate exists."""
    if depth_m is None or depth_m <= 0 or not math.isfinite(depth_m):
        raise InvalidInputError(f"depth_m must be > 0, got {depth_m}")
    if geometric_m is None:
        return DistanceEstimate(None, depth_m, float(depth_m), METHOD_DEPTH_ONLY)
    if geometric_m <= 0 or not math.isfinite(geometric_m):
        raise InvalidInputError(f"geometric_m must be > 0, got {geometric_m}")
    fused = GEOMETRIC_WEIGHT * geometric_m + DEPTH_WEIGHT * depth_m
    return DistanceEstimate(float(geometric_m), float(depth_m), fused, METHOD_FUSED)


def localize_object(
    det: "Detection",
    depth: DepthMap,
    cam: CameraIntrinsics,
    catalog_entry: Optional[tuple[float, float, float]],
    robot: Pose = Pose(),
    ext: CameraExtrinsics = CameraExtrinsics(),
    observed_at: Optional[float] = None,
) -> SemanticObject:
    """Full single-object localization: fuse distances, back-project, transform.

    The bounding-box center is the anchor pixel; the fused distance is depth
    along the optical axis. Detections without a mask use the bbox interior.
    """
    if depth.scale_state != SCALE_METRIC:
        raise InvalidInputError("localization requires a metric depth map")
    box = det.bbox
    if not box.intersects_image(cam.width, cam.height):
        raise InvalidInputError(f"detection {det.label!r} lies fully outside the image")

    geometric = None
    if catalog_entry is not None:
        geometric = distance_from_bbox(box, cam, catalog_entry[0])

    mask = det.mask if det.mask is not None else bbox_mask(box, depth.width, depth.height)
    depth_est = median_masked_depth(depth, mask)

    estimate = fuse_distance(geometric, depth_est)
    cam_point = backproject(box.center, estimate.fused_m, cam)
    world_point = camera_to_world(cam_point, robot, ext)

    return SemanticObject(
        label=det.label,
        position=world_point,
        dimensions=catalog_entry if catalog_entry is not None else DEFAULT_DIMENSIONS,
        confidence=det.confidence,
        method=estimate.method,
        observed_at=observed_at,
    )
