// Color legend: occupied cells red, dangerous yellow, free blue;
// candidate paths draw red, registered paths green.

import { DANGEROUS, FREE, OCCUPIED } from "./grid.js";

export const CELL_COLORS: Record<number, string> = {
  [OCCUPIED]: "#d64541", // red
  [DANGEROUS]: "#f4c20d", // yellow
  [FREE]: "#3b7dd8", // blue
};

export const PATH_COLORS: Record<string, string> = {
  candidate: "#d64541", // red line: calculated, not yet registered
  registered: "#2e9e4f", // green line
};

export function cellColor(state: number): string {
  const color = CELL_COLORS[state];
  if (color === undefined) {
    throw new RangeError(`no color for cell state ${state}`);
  }
  return color;
}

export function pathColor(status: string): string {
  const color = PATH_COLORS[status];
  if (color === undefined) {
    throw new RangeError(`no color for path status ${status}`);
  }
  return color;
}
