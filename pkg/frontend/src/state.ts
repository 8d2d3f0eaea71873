// Console view state and its reducer. Pure and synchronous so the
// register-then-plan workflow and telemetry phase tracking are unit-testable;
// main.ts feeds it service responses and re-renders on every change.

import { GridModel } from "./grid.js";
import type {
  Cell,
  MapDocument,
  PathDocument,
  PlanResponse,
  RegisterResponse,
  TelemetryRecord,
} from "./types.js";

export interface RobotMarker {
  x: number;
  y: number;
  z: number;
  yaw: number;
}

export interface ConsoleState {
  grid: GridModel | null;
  map: MapDocument | null;
  candidate: PathDocument | null;
  registered: PathDocument[];
  anchor: Cell | null;
  selectedGoal: Cell | null;
  phase: string;
  phaseLog: string[];
  robot: RobotMarker | null;
  missionDone: boolean;
  toasts: string[];
}

export function initialState(): ConsoleState {
  return {
    grid: null,
    map: null,
    candidate: null,
    registered: [],
    anchor: null,
    selectedGoal: null,
    phase: "Idle",
    phaseLog: [],
    robot: null,
    missionDone: false,
    toasts: [],
  };
}

export type Action =
  | { kind: "map_loaded"; map: MapDocument }
  | { kind: "grid_loaded"; grid: GridModel }
  | { kind: "goal_selected"; cell: Cell }
  | { kind: "planned"; response: PlanResponse }
  | { kind: "registered"; response: RegisterResponse }
  | { kind: "mission_started" }
  | { kind: "telemetry"; record: TelemetryRecord }
  | { kind: "error"; message: string }
  | { kind: "toast_dismissed" };

export function reduce(state: ConsoleState, action: Action): ConsoleState {
  switch (action.kind) {
    case "map_loaded":
      return { ...state, map: action.map };
    case "grid_loaded":
      return { ...state, grid: action.grid };
    case "goal_selected":
      return { ...state, selectedGoal: action.cell };
    case "planned": {
      if (action.response.status === "unreachable") {
        return {
          ...state,
          candidate: null,
          toasts: [...state.toasts, `unreachable: ${action.response.detail ?? "no path"}`],
        };
      }
      const candidate: PathDocument = {
        cells: action.response.cells ?? [],
        cost: action.response.cost ?? 0,
        status: "candidate",
      };
      return { ...state, candidate };
    }
    case "registered": {
      if (state.candidate === null) {
        return { ...state, toasts: [...state.toasts, "nothing to register"] };
      }
      const registered: PathDocument = { ...state.candidate, status: "registered" };
      return {
        ...state,
        candidate: null,
        registered: [...state.registered, registered],
        anchor: action.response.anchor,
      };
    }
    case "mission_started":
      return { ...state, missionDone: false, phaseLog: [] };
    case "telemetry":
      return applyTelemetry(state, action.record);
    case "error":
      return { ...state, toasts: [...state.toasts, action.message] };
    case "toast_dismissed":
      return { ...state, toasts: state.toasts.slice(1) };
  }
}

function applyTelemetry(state: ConsoleState, record: TelemetryRecord): ConsoleState {
  if (record.type === "tick") {
    const robot = { x: record.x, y: record.y, z: record.z, yaw: record.yaw };
    return { ...state, robot, phase: describePhase(record.phase, record.segment_index) };
  }
  if (record.type === "state") {
    const phase = describePhase(record.phase, record.segment_index);
    return { ...state, phase, phaseLog: [...state.phaseLog, phase] };
  }
  return {
    ...state,
    phase: record.reason ? `${record.phase} (${record.reason})` : record.phase,
    phaseLog: [...state.phaseLog, record.phase],
    missionDone: true,
  };
}

function describePhase(phase: string, segmentIndex: number | null): string {
  return segmentIndex === null ? phase : `${phase} #${segmentIndex}`;
}

/** Segment kinds the phase banner walked through, from a telemetry stream
 *  paired with the mission document's segment list. */
export function executedSegmentKinds(
  records: TelemetryRecord[],
  segmentKinds: string[],
): string[] {
  const seen: string[] = [];
  for (const record of records) {
    if (record.type !== "tick" || record.segment_index === null) continue;
    const kind = segmentKinds[record.segment_index];
    if (kind !== undefined && seen[seen.length - 1] !== kind) {
      seen.push(kind);
    }
  }
  return seen;
}
