import { GridSpec, LayerName, Snapshot, StreamMessage } from "./types";

export type ConnectionState = "disconnected" | "connecting" | "connected";

export interface HistoryEntry {
  text: string;
  status: "pending" | "accepted" | "rejected";
  reason?: string;
}

/**
 * Client-side mission state: the latest snapshot plus the master grid
 * maintained from the stream's full-grid-then-deltas encoding. All numbers
 * come from the server; nothing is recomputed locally.
 */
export class ViewModel {
  connection: ConnectionState = "disconnected";
  snapshot: Snapshot | null = null;
  grid: number[] | null = null;
  history: HistoryEntry[] = [];
  goalCandidate: { x: number; y: number } | null = null;
  layers: Record<LayerName, boolean> = {
    master: true,
    path: true,
    points: true,
    boxes: false,
    frustum: true,
  };

  applyMessage(msg: StreamMessage): void {
    if (msg.full) {
      if (!msg.grid) {
        throw new Error("full frame without grid payload");
      }
      this.grid = msg.grid.slice();
    } else {
      if (!this.grid) {
        throw new Error("delta frame before any full frame");
      }
      for (const [index, cost] of msg.delta ?? []) {
        this.grid[index] = cost;
      }
    }
    if (this.snapshot && msg.tick < this.snapshot.tick) {
      throw new Error(
        `tick went backwards: ${this.snapshot.tick} -> ${msg.tick}`,
      );
    }
    this.snapshot = msg;
  }

  /** Replace everything from a GET /state response (grid included). */
  applyState(state: Snapshot): void {
    if (!state.grid) {
      throw new Error("state response without grid");
    }
    this.grid = state.grid.slice();
    this.snapshot = state;
  }

  toggleLayer(name: LayerName): void {
    this.layers[name] = !this.layers[name];
  }

  recordSubmission(text: string): HistoryEntry {
    const entry: HistoryEntry = { text, status: "pending" };
    this.history.push(entry);
    return entry;
  }

  costAt(ix: number, iy: number): number {
    if (!this.grid || !this.snapshot) {
      throw new Error("no grid yet");
    }
    const spec = this.snapshot.grid_spec;
    if (ix < 0 || ix >= spec.width || iy < 0 || iy >= spec.height) {
      throw new Error(`cell (${ix}, ${iy}) outside grid`);
    }
    return this.grid[iy * spec.width + ix];
  }
}

/** Canvas pixel -> world meters, using only the snapshot's grid geometry.
 * The canvas draws row 0 of the grid at the bottom, so the vertical axis
 * flips. */
export function pixelToWorld(
  px: number,
  py: number,
  spec: GridSpec,
  canvasW: number,
  canvasH: number,
): { x: number; y: number } {
  const worldW = spec.width * spec.resolution;
  const worldH = spec.height * spec.resolution;
  return {
    x: spec.origin_x + (px / canvasW) * worldW,
    y: spec.origin_y + ((canvasH - py) / canvasH) * worldH,
  };
}

export function worldToPixel(
  x: number,
  y: number,
  spec: GridSpec,
  canvasW: number,
  canvasH: number,
): { px: number; py: number } {
  const worldW = spec.width * spec.resolution;
  const worldH = spec.height * spec.resolution;
  return {
    px: ((x - spec.origin_x) / worldW) * canvasW,
    py: canvasH - ((y - spec.origin_y) / worldH) * canvasH,
  };
}

export function inWorldBounds(x: number, y: number, spec: GridSpec): boolean {
  return (
    x >= spec.origin_x &&
    x <= spec.origin_x + spec.width * spec.resolution &&
    y >= spec.origin_y &&
    y <= spec.origin_y + spec.height * spec.resolution
  );
}
