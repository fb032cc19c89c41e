// Thin fetch client; every console fact comes through these calls.

import type {
  Policy,
  Ranking,
  SceneDoc,
  SessionState,
  SessionSummary,
  SplitDoc,
  StepOutcomeDoc,
  SupportDoc,
  PlanDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  const text = await response.text();
  if (!response.ok) {
    let code = `HTTP ${response.status}`;
    let detail = text;
    try {
      const body = JSON.parse(text);
      code = body.error ?? code;
      detail = body.detail ?? detail;
    } catch {
      // non-JSON error body; keep raw text
    }
    throw new ApiError(response.status, code, detail);
  }
  return JSON.parse(text) as T;
}

function post(body: unknown): RequestInit {
  return {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  };
}

export class ApiClient {
  constructor(readonly base: string) {}

  createSession(doc: unknown): Promise<SessionSummary> {
    return request(`${this.base}/sessions`, post(doc));
  }

  generate(seed: number, boxes: number): Promise<SceneDoc> {
    return request(`${this.base}/generate`, post({ seed, boxes }));
  }

  getState(sid: string): Promise<SessionState> {
    return request(`${this.base}/sessions/${sid}`);
  }

  requestPlan(
    sid: string,
    target: string,
    policy: Policy,
  ): Promise<{ plan: PlanDoc; split: SplitDoc }> {
    return request(`${this.base}/sessions/${sid}/plan`, post({ target, policy }));
  }

  step(sid: string, actor: "robot" | "human"): Promise<StepOutcomeDoc> {
    return request(`${this.base}/sessions/${sid}/step`, post({ actor }));
  }

  removeBox(sid: string, box: string): Promise<StepOutcomeDoc> {
    return request(`${this.base}/sessions/${sid}/remove`, post({ box }));
  }

  support(sid: string, target: string, k: number, ranking: Ranking): Promise<SupportDoc> {
    return request(`${this.base}/sessions/${sid}/support`, post({ target, k, ranking }));
  }
}
