import numpy as np
import pytest

from agnav.camera import Pose
from agnav.errors import InvalidInputError, InvalidPathError, ProtocolError
from agnav.grid import OCCUPIED, OccupancyGrid
from agnav.mission import (
    EVENT_FAILURE,
    EVENT_MODE_READY,
    EVENT_SEGMENT_DONE,
    EVENT_START,
    FLIGHT,
    GROUND_MOVE,
    LAND,
    MODE_AIR,
    MODE_GROUND,
    PHASE_ABORTED,
    PHASE_COMPLETED,
    PHASE_EXECUTING,
    PHASE_SWITCHING,
    TAKEOFF,
    ManagerState,
    Mission,
    MissionSegment,
    RobotSim,
    SegmentTracker,
    compile_mission,
    mode_for,
    step_manager,
    tick,
)
from agnav.planner import PlannedPath


def path_of(cells):
    return PlannedPath([tuple(c) for c in cells], 0.0)


CANONICAL = path_of(
    [(0, 0, 0), (1, 0, 0), (2, 0, 0), (2, 0, 1), (3, 0, 1), (4, 0, 1), (4, 0, 0), (5, 0, 0)]
)


def empty_grid_66(nz=3):
    return OccupancyGrid((0.0, 0.0, 0.0), 0.5, np.zeros((6, 6, nz), dtype=np.uint8))


def random_valid_path(rng, max_len=12):
    """Random 26-connected cell walk starting on the ground."""
    nx, ny, nz = 6, 6, 3
    cell = (int(rng.integers(0, nx)), int(rng.integers(0, ny)), 0)
    cells = [cell]
    for _ in range(int(rng.integers(1, max_len))):
        while True:
            step = tuple(int(v) for v in rng.integers(-1, 2, size=3))
            if step == (0, 0, 0):
                continue
            nxt = tuple(c + s for c, s in zip(cells[-1], step))
            if 0 <= nxt[0] < nx and 0 <= nxt[1] < ny and 0 <= nxt[2] < nz:
                cells.append(nxt)
                break
    return path_of(cells)


class TestCompile:
    def test_all_ground(self):
        mission = compile_mission(path_of([(0, 0, 0), (1, 0, 0), (2, 0, 0)]))
        assert [s.kind for s in mission.segments] == [GROUND_MOVE]
        assert mission.segments[0].cells == [(0, 0, 0), (1, 0, 0), (2, 0, 0)]

    def test_canonical_sequence(self):
        mission = compile_mission(CANONICAL)
        assert [s.kind for s in mission.segments] == [
            GROUND_MOVE, TAKEOFF, FLIGHT, LAND, GROUND_MOVE,
        ]
        takeoff = mission.segments[1]
        assert takeoff.cells == [(2, 0, 0), (2, 0, 1)]
        land = mission.segments[3]
        assert land.cells == [(4, 0, 1), (4, 0, 0)]

    def test_two_aerial_hops(self):
        cells = [
            (0, 0, 0), (0, 0, 1), (1, 0, 1), (1, 0, 0), (2, 0, 0),
            (2, 0, 1), (3, 0, 1), (3, 0, 0),
        ]
        mission = compile_mission(path_of(cells))
        kinds = [s.kind for s in mission.segments]
        assert kinds.count(TAKEOFF) == 2
        assert kinds.count(LAND) == 2

    def test_lossless_on_random_paths(self):
        rng = np.random.default_rng(6)
        for _ in range(500):
            path = random_valid_path(rng)
            mission = compile_mission(path)
            assert mission.cells() == path.cells
            crossings_up = sum(
                1 for a, b in zip(path.cells, path.cells[1:]) if a[2] == 0 and b[2] >= 1
            )
            crossings_down = sum(
                1 for a, b in zip(path.cells, path.cells[1:]) if a[2] >= 1 and b[2] == 0
            )
            kinds = [s.kind for s in mission.segments]
            assert kinds.count(TAKEOFF) == crossings_up
            assert kinds.count(LAND) == crossings_down
            if path.cells[-1][2] == 0:
                assert kinds.count(TAKEOFF) == kinds.count(LAND)

    def test_segment_kinds_alternate_legally(self):
        rng = np.random.default_rng(61)
        for _ in range(200):
            mission = compile_mission(random_valid_path(rng))
            kinds = [s.kind for s in mission.segments]
            for prev, cur in zip(kinds, kinds[1:]):
                if cur == TAKEOFF:
                    assert prev == GROUND_MOVE
                if cur == LAND:
                    assert prev == FLIGHT
                if cur == FLIGHT:
                    assert prev == TAKEOFF
                if cur == GROUND_MOVE:
                    assert prev == LAND

    def test_airborne_start_rejected(self):
        with pytest.raises(InvalidInputError):
            compile_mission(path_of([(0, 0, 1), (1, 0, 1)]))
        mission = compile_mission(path_of([(0, 0, 1), (1, 0, 1)]), allow_airborne_start=True)
        assert [s.kind for s in mission.segments] == [FLIGHT]

    def test_grid_validation(self):
        grid_states = np.zeros((6, 6, 3), dtype=np.uint8)
        grid_states[1, 0, 0] = OCCUPIED
        grid = OccupancyGrid((0.0, 0.0, 0.0), 0.5, grid_states)
        with pytest.raises(InvalidPathError):
            compile_mission(path_of([(0, 0, 0), (1, 0, 0)]), grid)

    def test_diagonal_crossing_kept_in_pair(self):
        mission = compile_mission(path_of([(0, 0, 0), (1, 1, 1), (2, 1, 1)]))
        takeoff = mission.segments[1]
        assert takeoff.kind == TAKEOFF
        assert takeoff.cells == [(0, 0, 0), (1, 1, 1)]
        assert mission.cells() == [(0, 0, 0), (1, 1, 1), (2, 1, 1)]


class TestSegmentInvariants:
    def test_ground_move_rejects_air_cells(self):
        with pytest.raises(InvalidInputError):
            MissionSegment(GROUND_MOVE, [(0, 0, 0), (0, 0, 1)])

    def test_takeoff_needs_pair(self):
        with pytest.raises(InvalidInputError):
            MissionSegment(TAKEOFF, [(0, 0, 0), (1, 0, 1), (2, 0, 1)])
        with pytest.raises(InvalidInputError):
            MissionSegment(TAKEOFF, [(0, 0, 1), (0, 0, 0)])

    def test_mode_mapping(self):
        assert mode_for(GROUND_MOVE) == MODE_GROUND
        for kind in (TAKEOFF, FLIGHT, LAND):
            assert mode_for(kind) == MODE_AIR


class TestManager:
    def test_start_arms_first_mode(self):
        mission = compile_mission(path_of([(0, 0, 0), (1, 0, 0)]))
        state, command = step_manager(mission, ManagerState(), EVENT_START)
        assert state.phase == PHASE_SWITCHING
        assert command.kind == "arm"
        assert command.mode == MODE_GROUND

    def test_mode_switch_before_takeoff(self):
        mission = compile_mission(CANONICAL)
        state, _ = step_manager(mission, ManagerState(), EVENT_START)
        state, command = step_manager(mission, state, EVENT_MODE_READY)
        assert state.phase == PHASE_EXECUTING and state.segment_index == 0
        assert state.active_mode == MODE_GROUND
        state, command = step_manager(mission, state, EVENT_SEGMENT_DONE)
        assert state.phase == PHASE_SWITCHING
        assert command.kind == "arm" and command.mode == MODE_AIR

    def test_full_trace_five_segments_two_switches(self):
        mission = compile_mission(CANONICAL)
        assert len(mission.segments) == 5
        state = ManagerState()
        state, command = step_manager(mission, state, EVENT_START)
        switches = 0  # mode changes after the initial arming
        done_events = 0
        for _ in range(50):
            if state.phase == PHASE_SWITCHING:
                state, command = step_manager(mission, state, EVENT_MODE_READY)
            elif state.phase == PHASE_EXECUTING:
                previous_mode = state.active_mode
                state, command = step_manager(mission, state, EVENT_SEGMENT_DONE)
                done_events += 1
                if state.phase == PHASE_SWITCHING and previous_mode != "none":
                    switches += 1
            elif state.phase == PHASE_COMPLETED:
                break
        assert state.phase == PHASE_COMPLETED
        assert done_events == 5
        assert switches == 2

    def test_failure_aborts_from_any_phase(self):
        mission = compile_mission(CANONICAL)
        state, _ = step_manager(mission, ManagerState(), EVENT_START)
        state, command = step_manager(mission, state, EVENT_FAILURE, reason="battery")
        assert state.phase == PHASE_ABORTED
        assert state.reason == "battery"
        assert command.kind == "halt"

    def test_illegal_event_raises_and_preserves_state(self):
        mission = compile_mission(CANONICAL)
        state = ManagerState()
        with pytest.raises(ProtocolError):
            step_manager(mission, state, EVENT_SEGMENT_DONE)
        assert state.phase == "Idle"  # frozen dataclass, unchanged

    def test_terminal_phase_rejects_events(self):
        mission = compile_mission(path_of([(0, 0, 0), (1, 0, 0)]))
        state = ManagerState()
        state, _ = step_manager(mission, state, EVENT_START)
        state, _ = step_manager(mission, state, EVENT_MODE_READY)
        state, _ = step_manager(mission, state, EVENT_SEGMENT_DONE)
        assert state.phase == PHASE_COMPLETED
        with pytest.raises(ProtocolError):
            step_manager(mission, state, EVENT_SEGMENT_DONE)

    def test_never_executes_air_segment_in_ground_mode(self):
        rng = np.random.default_rng(19)
        for _ in range(100):
            path = random_valid_path(rng)
            mission = compile_mission(path)
            state = ManagerState()
            state, command = step_manager(mission, state, EVENT_START)
            for _ in range(200):
                if state.phase == PHASE_SWITCHING:
                    state, command = step_manager(mission, state, EVENT_MODE_READY)
                elif state.phase == PHASE_EXECUTING:
                    segment = mission.segments[state.segment_index]
                    assert state.active_mode == mode_for(segment.kind)
                    state, command = step_manager(mission, state, EVENT_SEGMENT_DONE)
                else:
                    break
            assert state.phase == PHASE_COMPLETED


class TestSimulator:
    def test_ground_move_duration(self):
        grid = empty_grid_66()
        segment = MissionSegment(
            GROUND_MOVE, [(0, 0, 0), (1, 0, 0), (2, 0, 0), (3, 0, 0), (4, 0, 0)]
        )
        sim = RobotSim(pose=Pose(grid.cell_center((0, 0, 0))))
        tracker = SegmentTracker(segment, grid, sim.pose.position)
        dt = 0.05
        elapsed = 0.0
        while not tick(sim, tracker, dt).done:
            elapsed += dt
            assert elapsed < 20.0
        elapsed += dt
        # 4 steps x 0.5 m at 0.2 m/s = 10 s
        assert elapsed == pytest.approx(10.0, abs=2 * dt)
        assert sim.pose.position == pytest.approx(grid.cell_center((4, 0, 0)))

    def test_takeoff_duration_vertical(self):
        grid = empty_grid_66()
        segment = MissionSegment(TAKEOFF, [(1, 1, 0), (1, 1, 1)])
        sim = RobotSim(pose=Pose(grid.cell_center((1, 1, 0))))
        tracker = SegmentTracker(segment, grid, sim.pose.position)
        dt = 0.01
        elapsed = 0.0
        while not tick(sim, tracker, dt).done:
            elapsed += dt
        elapsed += dt
        # one 0.5 m layer at 0.3 m/s vertical
        assert elapsed == pytest.approx(0.5 / 0.3, abs=2 * dt)
        assert sim.pose.position[2] == pytest.approx(grid.cell_center((1, 1, 1))[2])

    def test_zero_length_segment_immediately_done(self):
        grid = empty_grid_66()
        segment = MissionSegment(GROUND_MOVE, [(0, 0, 0)])
        sim = RobotSim(pose=Pose(grid.cell_center((0, 0, 0))))
        tracker = SegmentTracker(segment, grid, sim.pose.position)
        result = tick(sim, tracker, 0.05)
        assert result.done
        assert result.progress == 1.0

    def test_diagonal_takeoff_climbs_then_translates(self):
        grid = empty_grid_66()
        segment = MissionSegment(TAKEOFF, [(0, 0, 0), (1, 1, 1)])
        sim = RobotSim(pose=Pose(grid.cell_center((0, 0, 0))))
        tracker = SegmentTracker(segment, grid, sim.pose.position)
        start_xy = sim.pose.position[:2]
        # during the climb, x/y stay put
        tick(sim, tracker, 0.5)
        assert sim.pose.position[:2] == pytest.approx(start_xy)
        assert sim.pose.position[2] > 0
        while not tick(sim, tracker, 0.05).done:
            pass
        assert sim.pose.position == pytest.approx(grid.cell_center((1, 1, 1)))

    def test_displacement_bounded_by_speed(self):
        rng = np.random.default_rng(13)
        grid = empty_grid_66()
        for _ in range(30):
            path = random_valid_path(rng)
            mission = compile_mission(path)
            sim = RobotSim(pose=Pose(grid.cell_center(tuple(path.cells[0]))))
            max_speed = max(sim.walk_speed, sim.flight_speed, sim.vertical_speed)
            for segment in mission.segments:
                tracker = SegmentTracker(segment, grid, sim.pose.position)
                for _ in range(10000):
                    before = np.array(sim.pose.position)
                    dt = float(rng.uniform(0.01, 0.3))
                    result = tick(sim, tracker, dt)
                    moved = float(np.linalg.norm(np.array(sim.pose.position) - before))
                    assert moved <= max_speed * dt + 1e-9
                    if result.done:
                        break
                assert tracker.done

    def test_yaw_faces_motion(self):
        grid = empty_grid_66()
        segment = MissionSegment(GROUND_MOVE, [(0, 0, 0), (0, 1, 0)])
        sim = RobotSim(pose=Pose(grid.cell_center((0, 0, 0)), yaw=0.0))
        tracker = SegmentTracker(segment, grid, sim.pose.position)
        tick(sim, tracker, 0.1)
        assert sim.pose.yaw == pytest.approx(np.pi / 2)

    def test_progress_monotone(self):
        grid = empty_grid_66()
        segment = MissionSegment(GROUND_MOVE, [(0, 0, 0), (1, 0, 0), (2, 0, 0)])
        sim = RobotSim(pose=Pose(grid.cell_center((0, 0, 0))))
        tracker = SegmentTracker(segment, grid, sim.pose.position)
        last = 0.0
        for _ in range(400):
            result = tick(sim, tracker, 0.05)
            assert result.progress >= last
            last = result.progress
            if result.done:
                break
        assert last == pytest.approx(1.0)
