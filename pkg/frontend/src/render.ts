import { LETHAL, Snapshot } from "./types";
import { ViewModel, worldToPixel } from "./viewmodel";

/** The subset of CanvasRenderingContext2D the renderer needs; tests supply a
 * recording fake. */
export interface Context2D {
  fillStyle: string;
  strokeStyle: string;
  lineWidth: number;
  globalAlpha: number;
  font: string;
  fillRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  closePath(): void;
  stroke(): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
}

export const COLORS = {
  free: "#ffffff",
  lethal: "#1a1a2e",
  override: "#7ef29d",
  robot: "#d62828",
  path: "#0077ff",
  goal: "#f4a316",
  traversablePoint: "#e63946",
  untraversablePoint: "#3a6ea5",
  frustum: "rgba(244, 200, 66, 0.25)",
  badge: "#b00020",
};

/** Per-cell fill color: override-free cells get a distinct tint, otherwise a
 * gray ramp from free (white) to lethal (near black). */
export function cellColor(cost: number): string {
  if (cost >= LETHAL) {
    return COLORS.lethal;
  }
  if (cost === 0) {
    return COLORS.free;
  }
  const shade = Math.round(255 - (cost / LETHAL) * 200);
  const hex = shade.toString(16).padStart(2, "0");
  return `#${hex}${hex}${hex}`;
}

const CAMERA_HALF_FOV = Math.atan2(320, 525); // matches the service cameras
const FRUSTUM_RANGE_M = 3.0;

export function renderMap(
  ctx: Context2D,
  vm: ViewModel,
  canvasW: number,
  canvasH: number,
): void {
  ctx.fillStyle = "#dddddd";
  ctx.fillRect(0, 0, canvasW, canvasH);
  const snap = vm.snapshot;
  const grid = vm.grid;
  if (!snap || !grid) {
    return;
  }
  const spec = snap.grid_spec;
  const cw = canvasW / spec.width;
  const ch = canvasH / spec.height;

  if (vm.layers.master) {
    for (let iy = 0; iy < spec.height; iy++) {
      for (let ix = 0; ix < spec.width; ix++) {
        ctx.fillStyle = cellColor(grid[iy * spec.width + ix]);
        // grid row 0 is the bottom of the world, canvas row 0 the top
        ctx.fillRect(ix * cw, canvasH - (iy + 1) * ch, cw, ch);
      }
    }
  }

  const toPx = (x: number, y: number) => worldToPixel(x, y, spec, canvasW, canvasH);

  if (vm.layers.frustum) {
    const { px, py } = toPx(snap.robot.x, snap.robot.y);
    const reach = (FRUSTUM_RANGE_M / spec.resolution) * cw;
    ctx.fillStyle = COLORS.frustum;
    ctx.beginPath();
    ctx.moveTo(px, py);
    for (const side of [-1, 1]) {
      const a = snap.robot.theta + side * CAMERA_HALF_FOV;
      ctx.lineTo(px + reach * Math.cos(a), py - reach * Math.sin(a));
    }
    ctx.closePath();
    ctx.fill();
  }

  if (vm.layers.points) {
    for (const p of snap.points) {
      const { px, py } = toPx(p.x, p.y);
      ctx.fillStyle = p.traversable
        ? COLORS.traversablePoint
        : COLORS.untraversablePoint;
      ctx.fillRect(px - 1, py - 1, 2, 2);
    }
  }

  if (vm.layers.path && snap.path.length > 1) {
    ctx.strokeStyle = COLORS.path;
    ctx.lineWidth = 2;
    ctx.beginPath();
    snap.path.forEach(([x, y], i) => {
      const { px, py } = toPx(x, y);
      if (i === 0) {
        ctx.moveTo(px, py);
      } else {
        ctx.lineTo(px, py);
      }
    });
    ctx.stroke();
  }

  const goal = toPx(snap.goal.x, snap.goal.y);
  ctx.strokeStyle = COLORS.goal;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.arc(goal.px, goal.py, 6, 0, 2 * Math.PI);
  ctx.stroke();

  const robot = toPx(snap.robot.x, snap.robot.y);
  ctx.fillStyle = COLORS.robot;
  ctx.beginPath();
  ctx.arc(robot.px, robot.py, 5, 0, 2 * Math.PI);
  ctx.fill();
  ctx.strokeStyle = COLORS.robot;
  ctx.beginPath();
  ctx.moveTo(robot.px, robot.py);
  ctx.lineTo(
    robot.px + 12 * Math.cos(snap.robot.theta),
    robot.py - 12 * Math.sin(snap.robot.theta),
  );
  ctx.stroke();

  renderBadge(ctx, snap);
}

function renderBadge(ctx: Context2D, snap: Snapshot): void {
  let text: string | null = null;
  if (snap.phase === "NoPathStalled") {
    text = "STALLED: no path";
  } else if (snap.phase === "Faulted") {
    text = `FAULT: ${snap.fault_label ?? "collision"}`;
  } else if (snap.phase === "Reached") {
    text = "GOAL REACHED";
  }
  if (text) {
    ctx.fillStyle = COLORS.badge;
    ctx.font = "bold 14px sans-serif";
    ctx.fillText(text, 8, 18);
  }
}
