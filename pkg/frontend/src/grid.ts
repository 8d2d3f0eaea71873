// Grid dump decoding and cell math. The service flattens cells in C order
// with z fastest: flatIndex = (ix * ny + iy) * nz + iz.

import type { Cell, GridDocument } from "./types.js";

export const FREE = 0;
export const DANGEROUS = 1;
export const OCCUPIED = 2;

export class GridModel {
  readonly origin: [number, number, number];
  readonly cellSize: number;
  readonly dims: [number, number, number];
  readonly layers: string[];
  private readonly states: Uint8Array;

  constructor(doc: GridDocument) {
    this.origin = doc.origin;
    this.cellSize = doc.cell_size;
    this.dims = doc.dims;
    this.layers = doc.layers;
    this.states = decodeRle(doc.cells_rle, doc.dims);
  }

  state(cell: Cell): number {
    const [nx, ny, nz] = this.dims;
    const [ix, iy, iz] = cell;
    if (ix < 0 || iy < 0 || iz < 0 || ix >= nx || iy >= ny || iz >= nz) {
      throw new RangeError(`cell ${cell} outside grid ${this.dims}`);
    }
    return this.states[(ix * ny + iy) * nz + iz];
  }

  cellCenter(cell: Cell): [number, number, number] {
    return [
      this.origin[0] + (cell[0] + 0.5) * this.cellSize,
      this.origin[1] + (cell[1] + 0.5) * this.cellSize,
      this.origin[2] + (cell[2] + 0.5) * this.cellSize,
    ];
  }

  cellOf(point: [number, number, number]): Cell {
    const cell = point.map((v, i) => {
      const idx = Math.floor((v - this.origin[i]) / this.cellSize);
      return Math.min(Math.max(idx, 0), this.dims[i] - 1);
    });
    return cell as Cell;
  }

  countState(state: number): number {
    let n = 0;
    for (const s of this.states) if (s === state) n += 1;
    return n;
  }
}

export function decodeRle(runs: [number, number][], dims: [number, number, number]): Uint8Array {
  const total = dims[0] * dims[1] * dims[2];
  const out = new Uint8Array(total);
  let pos = 0;
  for (const [count, value] of runs) {
    if (count < 0 || pos + count > total) {
      throw new RangeError(`RLE overruns grid: ${pos + count} > ${total}`);
    }
    out.fill(value, pos, pos + count);
    pos += count;
  }
  if (pos !== total) {
    throw new RangeError(`RLE covers ${pos} cells, expected ${total}`);
  }
  return out;
}
