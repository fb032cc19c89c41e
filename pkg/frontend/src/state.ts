// View-model derivation. Everything is computed from the last get_state
// snapshot (the event log inside it includes the initial scene), so a
// page reload reproduces the identical view from the session id alone.

import type { BoxDoc, EventDoc, SceneDoc, SessionState } from "./types.js";

export type BoxStatus = "present" | "removed" | "collapsed";

export interface BoxView {
  box: BoxDoc;
  status: BoxStatus;
  target: boolean;
  supportCandidate: boolean;
  flash: boolean;
}

export interface ViewModel {
  shelf: SceneDoc["shelf"];
  boxes: BoxView[];
  edges: [string, string][];
  plan: { box: string; actor: "robot" | "human"; done: boolean; next: boolean }[];
  planTarget: string | null;
  planValid: boolean;
  planExhausted: boolean;
  events: EventDoc[];
}

function initialBoxes(state: SessionState): BoxDoc[] {
  const created = state.events.find((e) => e.kind === "session_created");
  if (created) {
    return (created.payload["scene"] as SceneDoc).boxes;
  }
  return state.scene.boxes;
}

function collapsedIds(events: EventDoc[]): Set<string> {
  const out = new Set<string>();
  for (const event of events) {
    for (const id of (event.payload["collapsed"] as string[] | undefined) ?? []) {
      out.add(id);
    }
  }
  return out;
}

/** Boxes destabilized by the most recent scene mutation; these flash. */
export function lastCollapse(events: EventDoc[]): Set<string> {
  for (let i = events.length - 1; i >= 0; i--) {
    const event = events[i]!;
    if (event.kind === "box_removed" || (event.kind === "plan_step" && event.payload["applied"])) {
      return new Set((event.payload["collapsed"] as string[]) ?? []);
    }
  }
  return new Set();
}

export function buildViewModel(
  state: SessionState,
  selected: string | null,
  supportIds: Set<string>,
): ViewModel {
  const present = new Set(state.scene.boxes.map((b) => b.id));
  const collapsed = collapsedIds(state.events);
  const flash = lastCollapse(state.events);

  const boxes: BoxView[] = initialBoxes(state).map((box) => ({
    box,
    status: present.has(box.id) ? "present" : collapsed.has(box.id) ? "collapsed" : "removed",
    target: box.id === selected,
    supportCandidate: supportIds.has(box.id),
    flash: flash.has(box.id),
  }));
  // painter's order: farther into the shelf first
  boxes.sort((a, b) => b.box.center[1] - a.box.center[1]);

  const robot = new Set(state.split?.robot_tasks ?? []);
  const sequence = state.plan?.sequence ?? [];
  const plan = sequence.map((box, i) => ({
    box,
    actor: (robot.has(box) ? "robot" : "human") as "robot" | "human",
    done: i < state.cursor,
    next: i === state.cursor && state.plan_valid,
  }));

  return {
    shelf: state.scene.shelf,
    boxes,
    edges: state.brg.edges,
    plan,
    planTarget: state.plan?.target ?? null,
    planValid: state.plan_valid,
    planExhausted: state.plan !== null && state.cursor >= sequence.length,
    events: state.events,
  };
}
