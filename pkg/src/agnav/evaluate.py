"""Evaluation harness: detection ratio, position-error statistics, timing, reports.

Estimates are matched to ground truth greedily (globally nearest same-label
pair first) within a gate distance; unmatched truths count as missed and are
excluded from the error statistics. Reports render as an aligned text table
with the columns Model / Detection Ratio (%) / Calculation Time (sec), plus a
machine-readable document that round-trips.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .camera import Point3
from .errors import FrameMismatchError, InvalidInputError
from .mapping import FRAME_WORLD, SemanticMap

DEFAULT_MATCH_GATE_M = 1.0


@dataclass
class GroundTruthSet:
    """Labeled world-frame reference positions (ingested from files)."""

    entries: list[tuple[str, Point3]]
    source: str = ""
    frame: str = FRAME_WORLD

    @classmethod
    def from_file(cls, path: str | Path) -> "GroundTruthSet":
        doc = json.loads(Path(path).read_text())
        records = doc["objects"] if isinstance(doc, dict) else doc
        entries = [(r["label"], (float(r["x"]), float(r["y"]), float(r["z"]))) for r in records]
        return cls(entries, source=str(path))


@dataclass
class EvalReport:
    model_name: str
    detection_ratio_pct: float
    mean_time_s: Optional[float] = None
    mean_error_m: Optional[float] = None
    median_error_m: Optional[float] = None
    p90_error_m: Optional[float] = None
    per_object: list[tuple[str, Optional[float]]] = field(default_factory=list)

    def __post_init__(self):
        if not (0.0 <= self.detection_ratio_pct <= 100.0):
            raise InvalidInputError(
                f"detection ratio must be in [0, 100], got {self.detection_ratio_pct}"
            )
        for name in ("mean_error_m", "median_error_m", "p90_error_m"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise InvalidInputError(f"{name} must be >= 0, got {v}")

    def to_document(self) -> dict:
        return {
            "model": self.model_name,
            "detection_ratio_pct": self.detection_ratio_pct,
            "mean_time_s": self.mean_time_s,
            "mean_error_m": self.mean_error_m,
            "median_error_m": self.median_error_m,
            "p90_error_m": self.p90_error_m,
            "per_object": [
                {"label": label, "error_m": err, "missed": err is None}
                for label, err in self.per_object
            ],
        }

    @classmethod
    def from_document(cls, doc: dict) -> "EvalReport":
        return cls(
            model_name=doc["model"],
            detection_ratio_pct=doc["detection_ratio_pct"],
            mean_time_s=doc.get("mean_time_s"),
            mean_error_m=doc.get("mean_error_m"),
            median_error_m=doc.get("median_error_m"),
            p90_error_m=doc.get("p90_error_m"),
            per_object=[
                (entry["label"], entry.get("error_m")) for entry in doc.get("per_object", [])
            ],
        )


def detection_ratio(matched: int, total: int) -> float:
    """Detected / total as a percentage, reported to one decimal."""
    if total < 1:
        raise InvalidInputError(f"total must be >= 1, got {total}")
    if not (0 <= matched <= total):
        raise InvalidInputError(f"matched must be in [0, {total}], got {matched}")
    return round(100.0 * matched / total, 1)


def match_and_score(
    estimates: SemanticMap,
    truth: GroundTruthSet,
    max_match_m: float = DEFAULT_MATCH_GATE_M,
    model_name: str = "",
) -> EvalReport:
    """Greedy nearest-neighbor matching per label; statistics over matched pairs."""
    if estimates.frame != truth.frame:
        raise FrameMismatchError(
            f"estimates frame {estimates.frame!r} != truth frame {truth.frame!r}"
        )
    if not truth.entries:
        raise InvalidInputError("ground truth is empty")

    objects = estimates.objects
    pairs = []
    for ti, (label, tpos) in enumerate(truth.entries):
        for oi, obj in enumerate(objects):
            if obj.label.lower() != label.lower():
                continue
            d = math.dist(obj.position, tpos)
            if d <= max_match_m:
                pairs.append((d, ti, oi))
    pairs.sort(key=lambda p: (p[0], p[1], p[2]))

    matched_truth: dict[int, float] = {}
    used_estimates: set[int] = set()
    for d, ti, oi in pairs:
        if ti in matched_truth or oi in used_estimates:
            continue
        matched_truth[ti] = d
        used_estimates.add(oi)

    per_object = [
        (label, matched_truth.get(ti)) for ti, (label, _) in enumerate(truth.entries)
    ]
    errors = [d for d in matched_truth.values()]
    report = EvalReport(
        model_name=model_name,
        detection_ratio_pct=detection_ratio(len(errors), len(truth.entries)),
        per_object=per_object,
    )
    if errors:
        arr = np.array(errors, dtype=np.float64)
        report.mean_error_m = float(arr.mean())
        report.median_error_m = float(np.median(arr))
        report.p90_error_m = float(np.percentile(arr, 90))
    return report


@dataclass
class PipelineTiming:
    per_stage: dict[str, float]
    total_s: float


def time_pipeline(stages: list[tuple[str, Callable[[], object]]]) -> PipelineTiming:
    """Run stages in order, wall-clock each with a monotonic timer."""
    per_stage: dict[str, float] = {}
    t0 = time.perf_counter()
    for name, fn in stages:
        s0 = time.perf_counter()
        fn()
        per_stage[name] = time.perf_counter() - s0
    return PipelineTiming(per_stage, time.perf_counter() - t0)


_COLUMNS = ("Model", "Detection Ratio (%)", "Calculation Time (sec)")


def emit_report(reports: list[EvalReport]) -> tuple[str, dict]:
    """Render reports as an aligned text table plus a machine-readable document."""
    if not reports:
        raise InvalidInputError("emit_report needs at least one report")
    name_width = max(len(_COLUMNS[0]), *(len(r.model_name) for r in reports))
    header = (
        f"{_COLUMNS[0]:<{name_width}}  {_COLUMNS[1]:>{len(_COLUMNS[1])}}"
        f"  {_COLUMNS[2]:>{len(_COLUMNS[2])}}"
    )
    lines = [header, "-" * len(header)]
    for r in reports:
        ratio = f"{r.detection_ratio_pct:.1f}"
        time_s = "-" if r.mean_time_s is None else f"{r.mean_time_s:.2f}"
        lines.append(
            f"{r.model_name:<{name_width}}  {ratio:>{len(_COLUMNS[1])}}"
            f"  {time_s:>{len(_COLUMNS[2])}}"
        )
    doc = {"reports": [r.to_document() for r in reports]}
    return "\n".join(lines), doc


def parse_report(doc: dict) -> list[EvalReport]:
    return [EvalReport.from_document(entry) for entry in doc["reports"]]
