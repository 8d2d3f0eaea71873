// Console wiring: DOM events -> service calls -> state reducer -> re-render.

import { ServiceClient, ServiceError } from "./api.js";
import { GridModel } from "./grid.js";
import { SceneRenderer } from "./scene.js";
import { Action, ConsoleState, executedSegmentKinds, initialState, reduce } from "./state.js";
import type { TelemetryRecord } from "./types.js";

const params = new URLSearchParams(window.location.search);
const serviceUrl = params.get("service") ?? window.location.origin;

const client = new ServiceClient(serviceUrl);
const canvas = document.getElementById("scene") as HTMLCanvasElement;
const renderer = new SceneRenderer(canvas);

let state: ConsoleState = initialState();
let segmentKinds: string[] = [];
let telemetryLog: TelemetryRecord[] = [];

function dispatch(action: Action): void {
  state = reduce(state, action);
  renderer.render(state);
  renderHud();
}

function toast(message: string): void {
  dispatch({ kind: "error", message });
  setTimeout(() => dispatch({ kind: "toast_dismissed" }), 6000);
}

async function call<T>(op: () => Promise<T>): Promise<T | null> {
  try {
    return await op();
  } catch (err) {
    // surface service error payloads verbatim, never drop them
    if (err instanceof ServiceError) {
      toast(err.path ? `${err.message} (${err.path})` : err.message);
    } else {
      toast(String(err));
    }
    return null;
  }
}

function renderHud(): void {
  byId("phase-banner").textContent = state.phase;
  byId("anchor").textContent = state.anchor ? `anchor ${state.anchor.join(",")}` : "anchor: robot";
  byId("registered-count").textContent = `${state.registered.length} registered`;
  byId("candidate-cost").textContent = state.candidate
    ? `candidate cost ${state.candidate.cost.toFixed(2)}`
    : "";
  byId("segment-log").textContent = executedSegmentKinds(telemetryLog, segmentKinds).join(" → ");
  const toastBox = byId("toasts");
  toastBox.innerHTML = "";
  for (const message of state.toasts) {
    const div = document.createElement("div");
    div.className = "toast";
    div.textContent = message;
    toastBox.appendChild(div);
  }
}

function byId(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

async function loadSession(): Promise<void> {
  const map = await call(() => client.getMap());
  if (map) dispatch({ kind: "map_loaded", map });
  const grid = await call(() => client.getGrid());
  if (grid) dispatch({ kind: "grid_loaded", grid: new GridModel(grid) });
  const st = await call(() => client.getState());
  if (st) {
    dispatch({
      kind: "telemetry",
      record: {
        type: "tick",
        t: 0,
        x: st.robot.x,
        y: st.robot.y,
        z: st.robot.z,
        yaw: st.robot.yaw,
        phase: st.phase,
        segment_index: null,
        progress: 0,
      },
    });
  }
}

canvas.addEventListener("click", async (ev) => {
  const rect = canvas.getBoundingClientRect();
  const cell = renderer.pickCell(state, ev.clientX - rect.left, ev.clientY - rect.top);
  if (!cell) return;
  dispatch({ kind: "goal_selected", cell });
  const response = await call(() => client.plan(cell));
  if (response) dispatch({ kind: "planned", response });
});

let dragging = false;
let lastX = 0;
let lastY = 0;
canvas.addEventListener("mousedown", (ev) => {
  dragging = true;
  lastX = ev.clientX;
  lastY = ev.clientY;
});
window.addEventListener("mouseup", () => (dragging = false));
window.addEventListener("mousemove", (ev) => {
  if (!dragging) return;
  renderer.camera.azimuth += (ev.clientX - lastX) * 0.008;
  renderer.camera.elevation = Math.min(
    Math.PI / 2,
    Math.max(0.08, renderer.camera.elevation + (ev.clientY - lastY) * 0.008),
  );
  lastX = ev.clientX;
  lastY = ev.clientY;
  renderer.render(state);
});
canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  renderer.camera.scale = Math.min(300, Math.max(15, renderer.camera.scale * (ev.deltaY < 0 ? 1.1 : 0.9)));
  renderer.render(state);
});

byId("btn-capture").addEventListener("click", async () => {
  const prompts = (byId("prompts") as HTMLInputElement).value
    .split(",")
    .map((p) => p.trim())
    .filter((p) => p.length > 0);
  const map = await call(() => client.capture(prompts));
  if (!map) return;
  dispatch({ kind: "map_loaded", map });
  const grid = await call(() => client.getGrid());
  if (grid) dispatch({ kind: "grid_loaded", grid: new GridModel(grid) });
});

byId("btn-register").addEventListener("click", async () => {
  const response = await call(() => client.registerPath());
  if (response) dispatch({ kind: "registered", response });
});

byId("btn-start").addEventListener("click", async () => {
  const started = await call(() => client.startMission());
  if (!started) return;
  segmentKinds = started.mission.segments.map((s) => s.kind);
  telemetryLog = [];
  dispatch({ kind: "mission_started" });
  client.telemetry((record) => {
    telemetryLog.push(record);
    dispatch({ kind: "telemetry", record });
  });
});

byId("btn-abort").addEventListener("click", async () => {
  await call(() => client.abortMission("operator abort"));
});

const layerSelect = byId("layer") as HTMLSelectElement;
layerSelect.addEventListener("change", () => {
  renderer.options.activeLayer = layerSelect.value === "all" ? null : Number(layerSelect.value);
  renderer.render(state);
});

byId("btn-reload").addEventListener("click", () => void loadSession());

void loadSession();
