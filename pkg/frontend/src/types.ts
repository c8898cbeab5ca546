export interface GridSpec {
  resolution: number;
  origin_x: number;
  origin_y: number;
  width: number;
  height: number;
}

export interface RobotPose {
  x: number;
  y: number;
  theta: number;
}

export interface Box {
  label: string;
  attribute: number;
  c_x: number;
  c_y: number;
  w: number;
  h: number;
}

export interface CloudPoint {
  x: number;
  y: number;
  traversable: boolean;
}

export interface Directive {
  label: string;
  attribute: number;
}

export interface Snapshot {
  tick: number;
  phase: string;
  robot: RobotPose;
  goal: { x: number; y: number };
  path: Array<[number, number]>;
  boxes: Box[];
  points: CloudPoint[];
  grid_spec: GridSpec;
  directives: Directive[];
  fault_label: string | null;
  grid?: number[];
}

export interface StreamMessage extends Snapshot {
  full: boolean;
  delta?: Array<[number, number]>;
}

export const LETHAL = 254;

export type LayerName = "master" | "path" | "points" | "boxes" | "frustum";
