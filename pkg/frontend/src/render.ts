// DOM/SVG rendering of the view model. The scene is a front (x-z)
// projection; depth only picks the paint order and a shade.

import type { ViewModel } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function svgEl<K extends keyof SVGElementTagNameMap>(
  name: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, name);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, value);
  }
  return el;
}

function depthShade(y: number, depth: number): string {
  // nearer boxes slightly lighter
  const t = depth > 0 ? Math.min(Math.max(y / depth, 0), 1) : 0;
  const light = 72 - 18 * t;
  return `hsl(33, 45%, ${light}%)`;
}

export function renderScene(
  svg: SVGSVGElement,
  vm: ViewModel,
  onPick: (id: string) => void,
): void {
  const { width_x: w, height_z: h, depth_y: d } = vm.shelf;
  svg.setAttribute("viewBox", `${-0.05} ${-0.05} ${w + 0.1} ${h + 0.1}`);
  svg.replaceChildren();

  svg.appendChild(
    svgEl("rect", {
      x: "0", y: "0", width: String(w), height: String(h),
      class: "shelf-frame",
    }),
  );

  const centers = new Map<string, [number, number]>();
  for (const view of vm.boxes) {
    const [cx, cy, cz] = view.box.center;
    const [dx, , dz] = view.box.dims;
    centers.set(view.box.id, [cx, h - cz]);
    const classes = ["box", view.status];
    if (view.target) classes.push("target");
    if (view.supportCandidate) classes.push("support");
    if (view.flash) classes.push("flash");
    const rect = svgEl("rect", {
      x: String(cx - dx / 2),
      y: String(h - cz - dz / 2),
      width: String(dx),
      height: String(dz),
      class: classes.join(" "),
      "data-id": view.box.id,
    });
    if (view.status === "present") {
      rect.style.fill = depthShade(cy, d);
      rect.addEventListener("click", () => onPick(view.box.id));
    }
    svg.appendChild(rect);
    const label = svgEl("text", {
      x: String(cx),
      y: String(h - cz),
      class: "box-label",
      "text-anchor": "middle",
      "dominant-baseline": "central",
    });
    label.textContent = view.box.id;
    svg.appendChild(label);
  }

  for (const [from, to] of vm.edges) {
    const a = centers.get(from);
    const b = centers.get(to);
    if (!a || !b) continue;
    svg.appendChild(
      svgEl("line", {
        x1: String(a[0]), y1: String(a[1]),
        x2: String(b[0]), y2: String(b[1]),
        class: "brg-edge",
        "data-edge": `${from}->${to}`,
      }),
    );
    // arrowhead dot near the dependent end
    const tx = a[0] + 0.82 * (b[0] - a[0]);
    const ty = a[1] + 0.82 * (b[1] - a[1]);
    svg.appendChild(
      svgEl("circle", { cx: String(tx), cy: String(ty), r: "0.012", class: "brg-arrow" }),
    );
  }
}

export function renderPlan(panel: HTMLElement, vm: ViewModel): void {
  panel.replaceChildren();
  if (vm.plan.length === 0) {
    const empty = document.createElement("p");
    empty.className = "plan-empty";
    empty.textContent = "No plan. Click a box to plan its extraction.";
    panel.appendChild(empty);
    return;
  }
  const title = document.createElement("p");
  title.className = "plan-title" + (vm.planValid ? "" : " stale");
  title.textContent = `Plan for ${vm.planTarget}` + (vm.planValid ? "" : " (invalidated)");
  panel.appendChild(title);
  const list = document.createElement("ol");
  list.id = "plan-list";
  for (const step of vm.plan) {
    const item = document.createElement("li");
    item.className = "plan-item" + (step.done ? " done" : "") + (step.next ? " next" : "");
    if (!vm.planValid) item.classList.add("stale");
    item.dataset.actor = step.actor;
    item.dataset.box = step.box;
    const badge = document.createElement("span");
    badge.className = `badge ${step.actor}`;
    badge.textContent = step.actor;
    item.appendChild(badge);
    item.appendChild(document.createTextNode(` ${step.box}`));
    list.appendChild(item);
  }
  panel.appendChild(list);
  if (!vm.planValid) {
    const prompt = document.createElement("p");
    prompt.id = "replan-prompt";
    prompt.textContent = "Scene diverged from the plan. Click a box to replan.";
    panel.appendChild(prompt);
  }
}

export function renderEvents(feed: HTMLElement, vm: ViewModel): void {
  feed.replaceChildren();
  for (const event of vm.events.slice(-40)) {
    const item = document.createElement("li");
    item.className = "event";
    item.dataset.kind = event.kind;
    item.textContent = `#${event.seq} ${event.kind} ${JSON.stringify(event.payload)}`;
    feed.appendChild(item);
  }
  feed.scrollTop = feed.scrollHeight;
}

export function renderSupport(panel: HTMLElement, ranked: [string, number][]): void {
  panel.replaceChildren();
  for (const [id, count] of ranked) {
    const item = document.createElement("li");
    item.className = "support-item";
    item.dataset.box = id;
    item.textContent = `hold ${id} (supports ${count})`;
    panel.appendChild(item);
  }
}
