import { describe, expect, it } from "vitest";

import { GridSpec, StreamMessage } from "../src/types";
import {
  inWorldBounds,
  pixelToWorld,
  ViewModel,
  worldToPixel,
} from "../src/viewmodel";

const SPEC: GridSpec = {
  resolution: 0.05,
  origin_x: 0,
  origin_y: 0,
  width: 160,
  height: 120,
};

function frame(partial: Partial<StreamMessage>): StreamMessage {
  return {
    tick: 0,
    phase: "Running",
    robot: { x: 1, y: 1, theta: 0 },
    goal: { x: 5, y: 3 },
    path: [],
    boxes: [],
    points: [],
    grid_spec: SPEC,
    directives: [],
    fault_label: null,
    full: false,
    ...partial,
  };
}

describe("ViewModel grid maintenance", () => {
  it("applies a full frame then cell deltas", () => {
    const vm = new ViewModel();
    const grid = new Array(SPEC.width * SPEC.height).fill(0);
    grid[42] = 254;
    vm.applyMessage(frame({ full: true, grid, tick: 1 }));
    vm.applyMessage(frame({ delta: [[42, 0], [100, 253]], tick: 2 }));
    expect(vm.grid![42]).toBe(0);
    expect(vm.grid![100]).toBe(253);
    expect(vm.snapshot!.tick).toBe(2);
  });

  it("deltas reproduce an independently refetched grid", () => {
    const vm = new ViewModel();
    const base = Array.from({ length: SPEC.width * SPEC.height }, (_, i) => i % 255);
    vm.applyMessage(frame({ full: true, grid: base, tick: 1 }));
    const target = base.slice();
    const delta: Array<[number, number]> = [];
    for (let i = 0; i < target.length; i += 37) {
      target[i] = (target[i] + 11) % 255;
      delta.push([i, target[i]]);
    }
    vm.applyMessage(frame({ delta, tick: 2 }));
    expect(vm.grid).toEqual(target);

    const refetched = new ViewModel();
    refetched.applyState(frame({ grid: target, tick: 2 }));
    expect(vm.grid).toEqual(refetched.grid);
  });

  it("rejects a delta before any full frame", () => {
    const vm = new ViewModel();
    expect(() => vm.applyMessage(frame({ delta: [[0, 1]], tick: 1 }))).toThrow();
  });

  it("rejects ticks going backwards", () => {
    const vm = new ViewModel();
    const grid = new Array(SPEC.width * SPEC.height).fill(0);
    vm.applyMessage(frame({ full: true, grid, tick: 5 }));
    expect(() => vm.applyMessage(frame({ delta: [], tick: 3 }))).toThrow();
  });

  it("indexes costs row-major", () => {
    const vm = new ViewModel();
    const grid = new Array(SPEC.width * SPEC.height).fill(0);
    grid[7 * SPEC.width + 3] = 99;
    vm.applyMessage(frame({ full: true, grid, tick: 1 }));
    expect(vm.costAt(3, 7)).toBe(99);
    expect(() => vm.costAt(-1, 0)).toThrow();
    expect(() => vm.costAt(0, SPEC.height)).toThrow();
  });

  it("toggles layers", () => {
    const vm = new ViewModel();
    expect(vm.layers.master).toBe(true);
    vm.toggleLayer("master");
    expect(vm.layers.master).toBe(false);
  });
});

describe("pixel/world mapping from the snapshot GridSpec", () => {
  it("round-trips and flips the vertical axis", () => {
    const { px, py } = worldToPixel(2.0, 3.0, SPEC, 800, 600);
    const back = pixelToWorld(px, py, SPEC, 800, 600);
    expect(back.x).toBeCloseTo(2.0, 9);
    expect(back.y).toBeCloseTo(3.0, 9);
    // larger world y is nearer the top of the canvas
    const low = worldToPixel(2.0, 0.5, SPEC, 800, 600);
    const high = worldToPixel(2.0, 5.5, SPEC, 800, 600);
    expect(high.py).toBeLessThan(low.py);
  });

  it("maps canvas corners to world corners", () => {
    expect(pixelToWorld(0, 600, SPEC, 800, 600)).toEqual({ x: 0, y: 0 });
    const far = pixelToWorld(800, 0, SPEC, 800, 600);
    expect(far.x).toBeCloseTo(8.0, 9);
    expect(far.y).toBeCloseTo(6.0, 9);
  });

  it("checks world bounds", () => {
    expect(inWorldBounds(4, 3, SPEC)).toBe(true);
    expect(inWorldBounds(-0.1, 3, SPEC)).toBe(false);
    expect(inWorldBounds(4, 6.1, SPEC)).toBe(false);
  });
});
