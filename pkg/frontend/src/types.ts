// JSON shapes exchanged with the shelfplan service.

export interface BoxDoc {
  id: string;
  dims: [number, number, number];
  center: [number, number, number];
  mass: number;
}

export interface SceneDoc {
  shelf: { width_x: number; depth_y: number; height_z: number };
  config: Record<string, number>;
  boxes: BoxDoc[];
}

export interface BrgDoc {
  nodes: string[];
  edges: [string, string][];
}

export interface PlanDoc {
  target: string;
  sequence: string[];
}

export interface SplitDoc {
  robot_tasks: string[];
  human_tasks: string[];
}

export interface EventDoc {
  seq: number;
  ts: string;
  kind: string;
  payload: Record<string, unknown>;
}

export interface SessionState {
  session_id: string;
  scene: SceneDoc;
  brg: BrgDoc;
  plan: PlanDoc | null;
  cursor: number;
  plan_valid: boolean;
  split: SplitDoc | null;
  events: EventDoc[];
}

export interface SessionSummary {
  session_id: string;
  boxes: number;
  nodes: number;
  edges: number;
}

export interface StepOutcomeDoc {
  removed_box: string;
  actor: "robot" | "human";
  collapsed: string[];
  plan_valid: boolean;
}

export interface SupportDoc {
  ranked: [string, number][];
}

export type Policy = "literal" | "independence";
export type Ranking = "literal" | "at_risk";
