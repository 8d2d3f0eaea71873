// Canvas renderer: orthographic orbit view of the layered grid, object boxes,
// paths, and the robot marker, with a z-layer slicing toggle. No local state
// beyond the camera; everything drawn comes from ConsoleState.

import { DANGEROUS, FREE, GridModel, OCCUPIED } from "./grid.js";
import { cellColor, pathColor } from "./legend.js";
import type { ConsoleState } from "./state.js";
import type { Cell } from "./types.js";

export interface OrbitCamera {
  azimuth: number; // radians about world z
  elevation: number; // radians above the ground plane
  scale: number; // pixels per meter
  centerX: number; // world-space look-at point
  centerY: number;
}

export function defaultCamera(): OrbitCamera {
  return { azimuth: -Math.PI / 5, elevation: Math.PI / 5, scale: 70, centerX: 2.5, centerY: 4.0 };
}

/** World point -> screen, orthographic: rotate about z, tilt, drop depth. */
export function project(
  cam: OrbitCamera,
  canvasW: number,
  canvasH: number,
  p: [number, number, number],
): [number, number] {
  const x = p[0] - cam.centerX;
  const y = p[1] - cam.centerY;
  const z = p[2];
  const ca = Math.cos(cam.azimuth);
  const sa = Math.sin(cam.azimuth);
  const rx = ca * x - sa * y;
  const ry = sa * x + ca * y;
  const ce = Math.cos(cam.elevation);
  const se = Math.sin(cam.elevation);
  const sy = ry * se + z * ce; // screen-up component
  return [canvasW / 2 + rx * cam.scale, canvasH / 2 - sy * cam.scale];
}

/** Invert `project` onto the horizontal plane z = planeZ (used for picking). */
export function unprojectToPlane(
  cam: OrbitCamera,
  canvasW: number,
  canvasH: number,
  screen: [number, number],
  planeZ: number,
): [number, number, number] | null {
  const se = Math.sin(cam.elevation);
  if (Math.abs(se) < 1e-6) return null; // grazing view: the plane degenerates
  const rx = (screen[0] - canvasW / 2) / cam.scale;
  const sy = (canvasH / 2 - screen[1]) / cam.scale;
  const ry = (sy - planeZ * Math.cos(cam.elevation)) / se;
  const ca = Math.cos(cam.azimuth);
  const sa = Math.sin(cam.azimuth);
  const x = ca * rx + sa * ry;
  const y = -sa * rx + ca * ry;
  return [x + cam.centerX, y + cam.centerY, planeZ];
}

export interface ViewOptions {
  activeLayer: number | null; // null = all layers
  showFree: boolean;
}

export class SceneRenderer {
  readonly canvas: HTMLCanvasElement;
  readonly camera: OrbitCamera = defaultCamera();
  options: ViewOptions = { activeLayer: 0, showFree: true };

  constructor(canvas: HTMLCanvasElement) {
    this.canvas = canvas;
  }

  pickCell(state: ConsoleState, screenX: number, screenY: number): Cell | null {
    const grid = state.grid;
    if (!grid) return null;
    const layer = this.options.activeLayer ?? 0;
    const planeZ = grid.origin[2] + (layer + 0.5) * grid.cellSize;
    const point = unprojectToPlane(
      this.camera,
      this.canvas.width,
      this.canvas.height,
      [screenX, screenY],
      planeZ,
    );
    if (!point) return null;
    const [nx, ny] = [grid.dims[0], grid.dims[1]];
    const ix = Math.floor((point[0] - grid.origin[0]) / grid.cellSize);
    const iy = Math.floor((point[1] - grid.origin[1]) / grid.cellSize);
    if (ix < 0 || iy < 0 || ix >= nx || iy >= ny) return null;
    return [ix, iy, layer];
  }

  render(state: ConsoleState): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.fillStyle = "#10151d";
    ctx.fillRect(0, 0, width, height);
    if (state.grid) {
      this.drawGrid(ctx, state.grid);
    }
    if (state.map) {
      for (const obj of state.map.objects) {
        this.drawObject(ctx, obj.x, obj.y, obj.z, obj.h, obj.w, obj.d, obj.label);
      }
    }
    for (const path of state.registered) {
      this.drawPath(ctx, state.grid, path.cells, pathColor("registered"));
    }
    if (state.candidate) {
      this.drawPath(ctx, state.grid, state.candidate.cells, pathColor("candidate"));
    }
    if (state.anchor && state.grid) {
      this.drawMarker(ctx, state.grid.cellCenter(state.anchor), "#2e9e4f");
    }
    if (state.selectedGoal && state.grid) {
      this.drawMarker(ctx, state.grid.cellCenter(state.selectedGoal), "#ffffff");
    }
    if (state.robot) {
      this.drawRobot(ctx, state.robot.x, state.robot.y, state.robot.z, state.robot.yaw);
    }
  }

  private p(point: [number, number, number]): [number, number] {
    return project(this.camera, this.canvas.width, this.canvas.height, point);
  }

  private drawGrid(ctx: CanvasRenderingContext2D, grid: GridModel): void {
    const [nx, ny, nz] = grid.dims;
    const layer = this.options.activeLayer;
    // draw back-to-front so nearer cells overlay farther ones
    for (let iz = 0; iz < nz; iz++) {
      if (layer !== null && iz !== layer) continue;
      for (let iy = ny - 1; iy >= 0; iy--) {
        for (let ix = 0; ix < nx; ix++) {
          const s = grid.state([ix, iy, iz]);
          if (s === FREE && (!this.options.showFree || (layer === null && iz > 0))) {
            continue;
          }
          this.drawCell(ctx, grid, [ix, iy, iz], s);
        }
      }
    }
  }

  private drawCell(ctx: CanvasRenderingContext2D, grid: GridModel, cell: Cell, s: number): void {
    const [cx, cy, cz] = grid.cellCenter(cell);
    const h = grid.cellSize / 2;
    const top: [number, number][] = [
      this.p([cx - h, cy - h, cz + h]),
      this.p([cx + h, cy - h, cz + h]),
      this.p([cx + h, cy + h, cz + h]),
      this.p([cx - h, cy + h, cz + h]),
    ];
    const solid = s === OCCUPIED || s === DANGEROUS;
    ctx.globalAlpha = solid ? 0.85 : 0.18;
    ctx.fillStyle = cellColor(s);
    polygon(ctx, top, true);
    if (solid) {
      // front face hints at the cube
      const front: [number, number][] = [
        this.p([cx - h, cy - h, cz - h]),
        this.p([cx + h, cy - h, cz - h]),
        this.p([cx + h, cy - h, cz + h]),
        this.p([cx - h, cy - h, cz + h]),
      ];
      ctx.globalAlpha = 0.55;
      polygon(ctx, front, true);
    }
    ctx.globalAlpha = 0.35;
    ctx.strokeStyle = "#0c0f14";
    polygon(ctx, top, false);
    ctx.globalAlpha = 1.0;
  }

  private drawObject(
    ctx: CanvasRenderingContext2D,
    x: number,
    y: number,
    z: number,
    h: number,
    w: number,
    d: number,
    label: string,
  ): void {
    const z0 = Math.max(0, z - h / 2);
    const corners: [number, number][] = [
      this.p([x - w / 2, y - d / 2, z0]),
      this.p([x + w / 2, y - d / 2, z0]),
      this.p([x + w / 2, y + d / 2, z0]),
      this.p([x - w / 2, y + d / 2, z0]),
    ];
    ctx.globalAlpha = 0.9;
    ctx.strokeStyle = "#e8e0c8";
    polygon(ctx, corners, false);
    const [lx, ly] = this.p([x, y, z0 + h]);
    ctx.fillStyle = "#e8e0c8";
    ctx.font = "11px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(label, lx, ly - 4);
    ctx.globalAlpha = 1.0;
  }

  private drawPath(
    ctx: CanvasRenderingContext2D,
    grid: GridModel | null,
    cells: Cell[],
    color: string,
  ): void {
    if (!grid || cells.length === 0) return;
    ctx.strokeStyle = color;
    ctx.lineWidth = 2.5;
    ctx.beginPath();
    cells.forEach((cell, i) => {
      const [sx, sy] = this.p(grid.cellCenter(cell));
      if (i === 0) ctx.moveTo(sx, sy);
      else ctx.lineTo(sx, sy);
    });
    ctx.stroke();
    ctx.lineWidth = 1;
  }

  private drawMarker(ctx: CanvasRenderingContext2D, at: [number, number, number], color: string) {
    const [sx, sy] = this.p(at);
    ctx.fillStyle = color;
    ctx.beginPath();
    ctx.arc(sx, sy, 4, 0, 2 * Math.PI);
    ctx.fill();
  }

  private drawRobot(
    ctx: CanvasRenderingContext2D,
    x: number,
    y: number,
    z: number,
    yaw: number,
  ): void {
    const [sx, sy] = this.p([x, y, z]);
    ctx.fillStyle = "#58d3f7";
    ctx.beginPath();
    ctx.arc(sx, sy, 6, 0, 2 * Math.PI);
    ctx.fill();
    const [hx, hy] = this.p([x + 0.4 * Math.cos(yaw), y + 0.4 * Math.sin(yaw), z]);
    ctx.strokeStyle = "#58d3f7";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(sx, sy);
    ctx.lineTo(hx, hy);
    ctx.stroke();
    ctx.lineWidth = 1;
    // ground shadow anchors the altitude visually
    const [gx, gy] = this.p([x, y, 0]);
    ctx.globalAlpha = 0.4;
    ctx.fillStyle = "#58d3f7";
    ctx.beginPath();
    ctx.ellipse(gx, gy, 5, 2.5, 0, 0, 2 * Math.PI);
    ctx.fill();
    ctx.globalAlpha = 1.0;
  }
}

function polygon(ctx: CanvasRenderingContext2D, pts: [number, number][], fill: boolean): void {
  ctx.beginPath();
  pts.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
  ctx.closePath();
  if (fill) ctx.fill();
  else ctx.stroke();
}
