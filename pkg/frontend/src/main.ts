// Console wiring. The console is stateless beyond the session id: every
// render derives from the latest get_state snapshot, and all mutating
// calls are serialized through one task queue.

import { ApiClient } from "./api.js";
import { buildViewModel } from "./state.js";
import { renderEvents, renderPlan, renderScene, renderSupport } from "./render.js";
import type { Policy, SessionState } from "./types.js";

const SKELETON = `
  <div id="banner" hidden></div>
  <section id="controls">
    <textarea id="scene-input" rows="4" placeholder="paste a scene document"></textarea>
    <input id="scene-file" type="file" accept="application/json">
    <button id="load-btn">Load scene</button>
    <label>seed <input id="seed-input" type="number" value="42"></label>
    <label>boxes <input id="boxes-input" type="number" value="8"></label>
    <button id="generate-btn">Generate</button>
    <label>policy
      <select id="policy-select">
        <option value="literal" selected>literal</option>
        <option value="independence">independence</option>
      </select>
    </label>
  </section>
  <section id="actions">
    <button id="step-robot" disabled>step robot</button>
    <button id="step-human" disabled>step human</button>
    <button id="whatif-btn" disabled>what-if remove</button>
    <button id="support-btn" disabled>support candidates</button>
    <span id="session-label"></span>
  </section>
  <svg id="scene-svg"></svg>
  <section id="panels">
    <div id="plan-panel"></div>
    <ul id="support-panel"></ul>
    <ul id="event-feed"></ul>
  </section>
`;

export interface ConsoleHandle {
  root: HTMLElement;
  /** Resolves once every queued action (and its re-render) completed. */
  flush(): Promise<void>;
}

export function initConsole(root: HTMLElement, baseUrl: string): ConsoleHandle {
  const api = new ApiClient(baseUrl);
  root.innerHTML = SKELETON;

  const el = <T extends HTMLElement>(id: string) =>
    root.querySelector<T>(`#${id}`) as T;
  const svg = root.querySelector<SVGSVGElement>("#scene-svg") as SVGSVGElement;
  const banner = el<HTMLDivElement>("banner");
  const stepRobot = el<HTMLButtonElement>("step-robot");
  const stepHuman = el<HTMLButtonElement>("step-human");
  const whatifBtn = el<HTMLButtonElement>("whatif-btn");
  const supportBtn = el<HTMLButtonElement>("support-btn");

  let sid: string | null = null;
  let selected: string | null = null;
  let supportIds = new Set<string>();
  let queue: Promise<void> = Promise.resolve();

  function enqueue(task: () => Promise<void>): void {
    queue = queue.then(async () => {
      banner.hidden = true;
      try {
        await task();
      } catch (err) {
        banner.hidden = false;
        banner.textContent = err instanceof Error ? err.message : String(err);
      }
    });
  }

  async function refresh(): Promise<void> {
    if (!sid) return;
    const state: SessionState = await api.getState(sid);
    const vm = buildViewModel(state, selected, supportIds);
    renderScene(svg, vm, (id) => {
      enqueue(async () => {
        selected = id;
        if (sid) {
          await api.requestPlan(sid, id, policy());
          await refresh();
        }
      });
    });
    renderPlan(el("plan-panel"), vm);
    renderEvents(el("event-feed"), vm);
    el("session-label").textContent = `session ${state.session_id}`;
    const stepsLeft = state.plan !== null && state.plan_valid && !vm.planExhausted;
    stepRobot.disabled = !stepsLeft;
    stepHuman.disabled = !stepsLeft;
    whatifBtn.disabled = selected === null || !state.scene.boxes.some((b) => b.id === selected);
    supportBtn.disabled = selected === null || !state.scene.boxes.some((b) => b.id === selected);
  }

  function policy(): Policy {
    return el<HTMLSelectElement>("policy-select").value as Policy;
  }

  async function startSession(doc: unknown): Promise<void> {
    const summary = await api.createSession(doc);
    sid = summary.session_id;
    selected = null;
    supportIds = new Set();
    el<HTMLUListElement>("support-panel").replaceChildren();
    await refresh();
  }

  el("load-btn").addEventListener("click", () => {
    enqueue(async () => {
      const text = el<HTMLTextAreaElement>("scene-input").value;
      let doc: unknown;
      try {
        doc = JSON.parse(text);
      } catch (err) {
        throw new Error(`SchemaError: scene input is not valid JSON (${err})`);
      }
      await startSession(doc);
    });
  });

  el<HTMLInputElement>("scene-file").addEventListener("change", (event) => {
    const file = (event.target as HTMLInputElement).files?.[0];
    if (!file) return;
    enqueue(async () => {
      el<HTMLTextAreaElement>("scene-input").value = await file.text();
    });
  });

  el("generate-btn").addEventListener("click", () => {
    enqueue(async () => {
      const seed = Number(el<HTMLInputElement>("seed-input").value);
      const boxes = Number(el<HTMLInputElement>("boxes-input").value);
      const doc = await api.generate(seed, boxes);
      el<HTMLTextAreaElement>("scene-input").value = JSON.stringify(doc, null, 2);
      await startSession(doc);
    });
  });

  el<HTMLSelectElement>("policy-select").addEventListener("change", () => {
    enqueue(async () => {
      if (sid && selected) {
        await api.requestPlan(sid, selected, policy());
        await refresh();
      }
    });
  });

  function stepWith(actor: "robot" | "human"): void {
    enqueue(async () => {
      if (!sid) return;
      await api.step(sid, actor);
      await refresh();
    });
  }
  stepRobot.addEventListener("click", () => stepWith("robot"));
  stepHuman.addEventListener("click", () => stepWith("human"));

  whatifBtn.addEventListener("click", () => {
    enqueue(async () => {
      if (!sid || !selected) return;
      await api.removeBox(sid, selected);
      await refresh();
    });
  });

  supportBtn.addEventListener("click", () => {
    enqueue(async () => {
      if (!sid || !selected) return;
      const result = await api.support(sid, selected, 3, "literal");
      supportIds = new Set(result.ranked.map(([id]) => id));
      renderSupport(el("support-panel"), result.ranked);
      await refresh();
    });
  });

  return {
    root,
    flush: () => queue,
  };
}
