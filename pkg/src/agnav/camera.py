"""Pinhole camera math and frame transforms.

Conventions used throughout the toolkit:

* camera frame: X right, Y down, Z forward along the optical axis
* robot frame:  x forward, y left, z up; yaw about z
* world frame:  z up; robot poses are (position, yaw), roll/pitch fixed at 0

A single focal length is used (square pixels). Distances recovered from
bounding-box heights are interpreted as depth along the optical axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidInputError

Point3 = tuple[float, float, float]

_TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    r = math.fmod(a + math.pi, _TWO_PI)
    if r <= 0.0:
        r += _TWO_PI
    return r - math.pi


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise InvalidInputError(f"{name} must be finite, got {v}")


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole parameters: one focal length in pixels plus principal point."""

    focal_px: float
    principal_point: tuple[float, float]
    image_size: tuple[int, int]  # (width, height)

    def __post_init__(self):
        w, h = self.image_size
        cx, cy = self.principal_point
        if self.focal_px <= 0 or not math.isfinite(self.focal_px):
            raise InvalidInputError(f"focal_px must be > 0, got {self.focal_px}")
        if w <= 0 or h <= 0:
            raise InvalidInputError(f"image_size must be positive, got {self.image_size}")
        if not (0 <= cx < w and 0 <= cy < h):
            raise InvalidInputError(
                f"principal point {self.principal_point} outside image {self.image_size}"
            )

    @property
    def cx(self) -> float:
        return self.principal_point[0]

    @property
    def cy(self) -> float:
        return self.principal_point[1]

    @property
    def width(self) -> int:
        return self.image_size[0]

    @property
    def height(self) -> int:
        return self.image_size[1]


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in image coordinates (pixels, y down)."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        _require_finite("bbox", self.x_min, self.y_min, self.x_max, self.y_max)
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise InvalidInputError(
                f"degenerate bbox ({self.x_min}, {self.y_min}, {self.x_max}, {self.y_max})"
            )

    @property
    def height_px(self) -> float:
        return self.y_max - self.y_min

    @property
    def width_px(self) -> float:
        return self.x_max - self.x_min

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)

    def intersects_image(self, width: float, height: float) -> bool:
        return self.x_min < width and self.x_max > 0 and self.y_min < height and self.y_max > 0

    def clipped(self, width: float, height: float) -> "BoundingBox":
        """Clip to the image rectangle; raises if the box lies fully outside."""
        if not self.intersects_image(width, height):
            raise InvalidInputError("bbox lies fully outside the image")
        return BoundingBox(
            max(self.x_min, 0.0),
            max(self.y_min, 0.0),
            min(self.x_max, float(width)),
            min(self.y_max, float(height)),
        )

    def as_list(self) -> list[float]:
        return [self.x_min, self.y_min, self.x_max, self.y_max]


@dataclass(frozen=True)
class Pose:
    """World-frame robot pose: position plus yaw (roll/pitch fixed at 0)."""

    position: Point3 = (0.0, 0.0, 0.0)
    yaw: float = 0.0

    def __post_init__(self):
        _require_finite("pose", *self.position, self.yaw)
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))
        object.__setattr__(self, "yaw", wrap_angle(float(self.yaw)))


@dataclass(frozen=True)
class CameraExtrinsics:
    """Camera origin in the robot frame plus a yaw offset."""

    translation: Point3 = (0.0, 0.0, 0.0)
    yaw_offset: float = 0.0

    def __post_init__(self):
        _require_finite("extrinsics", *self.translation, self.yaw_offset)
        object.__setattr__(self, "translation", tuple(float(v) for v in self.translation))

    @classmethod
    def identity(cls) -> "CameraExtrinsics":
        return cls()


def distance_from_bbox(box: BoundingBox, cam: CameraIntrinsics, real_height_m: float) -> float:
    """Metric distance from a bounding box: focal_px * real_height / pixel_height."""
    if real_height_m <= 0 or not math.isfinite(real_height_m):
        raise InvalidInputError(f"real_height_m must be > 0, got {real_height_m}")
    return cam.focal_px * real_height_m / box.height_px


def backproject(pixel: tuple[float, float], depth_m: float, cam: CameraIntrinsics) -> Point3:
    """Pixel plus optical-axis depth -> camera-frame point (X right, Y down, Z forward)."""
    if depth_m <= 0 or not math.isfinite(depth_m):
        raise InvalidInputError(f"depth_m must be > 0, got {depth_m}")
    u, v = pixel
    z = float(depth_m)
    return ((u - cam.cx) * z / cam.focal_px, (v - cam.cy) * z / cam.focal_px, z)


def project(point: Point3, cam: CameraIntrinsics) -> tuple[float, float]:
    """Camera-frame point -> pixel. Requires Z > 0."""
    x, y, z = point
    if z <= 0:
        raise InvalidInputError(f"cannot project point behind the camera (Z={z})")
    return (cam.cx + cam.focal_px * x / z, cam.cy + cam.focal_px * y / z)


def _rot_z(yaw: float, p: Point3) -> Point3:
    c, s = math.cos(yaw), math.sin(yaw)
    return (c * p[0] - s * p[1], s * p[0] + c * p[1], p[2])


def camera_to_robot(p: Point3, ext: CameraExtrinsics) -> Point3:
    # camera (X right, Y down, Z forward) -> robot axes (x forward, y left, z up)
    axes = (p[2], -p[0], -p[1])
    r = _rot_z(ext.yaw_offset, axes)
    t = ext.translation
    return (r[0] + t[0], r[1] + t[1], r[2] + t[2])


def robot_to_camera(p: Point3, ext: CameraExtrinsics) -> Point3:
    t = ext.translation
    r = _rot_z(-ext.yaw_offset, (p[0] - t[0], p[1] - t[1], p[2] - t[2]))
    return (-r[1], -r[2], r[0])


def camera_to_world(p: Point3, robot: Pose, ext: CameraExtrinsics) -> Point3:
    """Camera-frame point -> world frame via the robot pose."""
    q = camera_to_robot(p, ext)
    r = _rot_z(robot.yaw, q)
    t = robot.position
    return (r[0] + t[0], r[1] + t[1], r[2] + t[2])


def world_to_camera(p: Point3, robot: Pose, ext: CameraExtrinsics) -> Point3:
    """Analytic inverse of camera_to_world."""
    t = robot.position
    q = _rot_z(-robot.yaw, (p[0] - t[0], p[1] - t[1], p[2] - t[2]))
    return robot_to_camera(q, ext)


def robot_to_world(p: Point3, robot: Pose) -> Point3:
    r = _rot_z(robot.yaw, p)
    t = robot.position
    return (r[0] + t[0], r[1] + t[1], r[2] + t[2])
