// Wire types for the agnav service protocol.

export type Cell = [number, number, number];

export interface MapObject {
  id: string;
  label: string;
  x: number;
  y: number;
  z: number;
  h: number;
  w: number;
  d: number;
  confidence: number;
  method: "fused" | "depth_only";
}

export interface MapDocument {
  frame: "robot_local" | "world";
  robot_pose: { x: number; y: number; z: number; yaw: number };
  objects: MapObject[];
}

export interface GridDocument {
  origin: [number, number, number];
  cell_size: number;
  dims: [number, number, number];
  layers: string[];
  states: Record<string, string>;
  cells_rle: [number, number][];
}

export interface PathDocument {
  cells: Cell[];
  cost: number;
  status: "candidate" | "registered";
}

export interface PlanResponse {
  status: "candidate" | "unreachable";
  cells?: Cell[];
  cost?: number;
  start?: Cell;
  goal?: Cell;
  detail?: string;
}

export interface RegisterResponse {
  anchor: Cell;
  registered_count: number;
}

export interface MissionStartResponse {
  mission: { segments: { kind: string; cells: Cell[] }[] };
  phase: string;
  cells: number;
  cost: number;
}

export interface StateResponse {
  phase: string;
  active_mode: string;
  mission_running: boolean;
  anchor: Cell | null;
  registered_count: number;
  robot: { x: number; y: number; z: number; yaw: number };
  object_count: number;
  kernel: string;
}

export interface TickRecord {
  type: "tick";
  t: number;
  x: number;
  y: number;
  z: number;
  yaw: number;
  phase: string;
  segment_index: number | null;
  progress: number;
}

export interface StateRecord {
  type: "state";
  t: number;
  phase: string;
  segment_index: number | null;
  mode: string;
}

export interface EndRecord {
  type: "end";
  t: number;
  phase: string;
  reason: string | null;
}

export type TelemetryRecord = TickRecord | StateRecord | EndRecord;

export interface ErrorPayload {
  error: string;
  path?: string;
}
