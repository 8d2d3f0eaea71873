"""agnav: monocular semantic mapping and aerial-ground mission planning.

Pipeline: object detections in a single RGB image -> metric world-frame object
poses -> layered 3-D occupancy grid -> Aerial-Ground A* paths -> executable
missions -> simulated execution, exposed through a service API and a CLI.
"""

from .camera import (
    BoundingBox,
    CameraExtrinsics,
    CameraIntrinsics,
    Pose,
    backproject,
    camera_to_world,
    distance_from_bbox,
    project,
    world_to_camera,
)
from .detect import (
    Detection,
    DetectionRequest,
    RemoteBackend,
    ReplayBackend,
    SceneObject,
    SyntheticBackend,
    SyntheticScene,
    detect,
    synthetic_depth,
    synthetic_render,
)
from .evaluate import (
    EvalReport,
    GroundTruthSet,
    detection_ratio,
    emit_report,
    match_and_score,
    parse_report,
    time_pipeline,
)
from .fusion import (
    DepthMap,
    DistanceEstimate,
    Mask,
    fuse_distance,
    localize_object,
    median_masked_depth,
    scale_depth_map,
)
from .grid import OccupancyGrid, Workspace, empty_grid, rasterize
from .mapping import DimensionCatalog, SemanticMap, SemanticObject
from .mission import (
    Mission,
    MissionSegment,
    RobotSim,
    SegmentTracker,
    compile_mission,
    step_manager,
    tick,
)
from .planner import (
    KERNEL_NAME,
    PlanSession,
    PlannedPath,
    PlannerCosts,
    concat_registered,
    plan,
    register_path,
)

__version__ = "0.1.0"
