"""Session orchestration: scene lifecycle, plan stepping, event sourcing.

Sessions hold an immutable scene snapshot plus the graph, plan, and task
split derived from it; every mutation re-settles the scene, rebuilds the
graph, and appends to an append-only event log. Event logs are plain
JSONL and replaying one reconstructs the exact session state, which
doubles as a determinism audit (divergence raises).
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

from . import brg, physics, pointing
from .errors import (
    MissingBox,
    NoPlan,
    PlanExhausted,
    ReplayDivergence,
    SessionNotFound,
)
from .scene import ALL, Scene, parse_scene, scene_to_document


@dataclass(frozen=True)
class StepOutcome:
    """Result of removing one box (planned or what-if)."""

    removed_box: str
    actor: str
    collapsed: tuple[str, ...]
    plan_valid: bool

    def to_document(self) -> dict:
        return {
            "removed_box": self.removed_box,
            "actor": self.actor,
            "collapsed": list(self.collapsed),
            "plan_valid": self.plan_valid,
        }


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


class Session:
    """One planning session; mutations are serialized by an internal lock."""

    def __init__(self, session_id: str, scene: Scene, sink: Path | None = None):
        self.session_id = session_id
        self.scene = scene
        self.dep = brg.build_dependency_dictionary(scene)
        self.graph = brg.build_graph(self.dep)
        self.plan: brg.ExtractionPlan | None = None
        self.split: brg.TaskSplit | None = None
        self.cursor = 0
        self.plan_valid = True
        self._stale_collapse: tuple[str, ...] = ()
        self.events: list[dict] = []
        self._lock = threading.Lock()
        self._sink = sink

    # -- event log ---------------------------------------------------------

    def _log(self, kind: str, payload: dict, ts: str | None = None) -> dict:
        event = {
            "seq": len(self.events) + 1,
            "ts": ts if ts is not None else _now(),
            "kind": kind,
            "payload": payload,
        }
        self.events.append(event)
        if self._sink is not None:
            with self._sink.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(event) + "\n")
        return event

    # -- operations ---------------------------------------------------------

    def summary(self) -> dict:
        return {
            "session_id": self.session_id,
            "boxes": len(self.scene.boxes),
            "nodes": len(self.graph.nodes),
            "edges": len(self.graph.edges),
        }

    def request_plan(self, target: str, policy: str = "literal",
                     ts: str | None = None) -> dict:
        with self._lock:
            if target == ALL:
                plan = brg.full_clear_sequence(self.graph)
            else:
                if target not in self.scene.by_id:
                    raise MissingBox(target)
                plan = brg.safe_sequence(self.graph, target)
            split = brg.divide_tasks(plan, self.dep, policy=policy)
            self.plan = plan
            self.split = split
            self.cursor = 0
            self.plan_valid = True
            self._stale_collapse = ()
            result = {"plan": plan.to_document(), "split": split.to_document()}
            self._log("plan_requested", {"target": target, "policy": policy, **result}, ts)
            return result

    def step_plan(self, actor: str, ts: str | None = None) -> StepOutcome:
        if actor not in ("robot", "human"):
            raise ValueError(f"actor must be 'robot' or 'human', got {actor!r}")
        with self._lock:
            if self.plan is None:
                raise NoPlan("no plan stored; request one first")
            if self.cursor >= len(self.plan.sequence):
                raise PlanExhausted("plan fully executed")
            box = self.plan.sequence[self.cursor]
            if not self.plan_valid:
                # stepping stays frozen until a replan; report why
                outcome = StepOutcome(removed_box=box, actor=actor,
                                      collapsed=self._stale_collapse, plan_valid=False)
                self._log("plan_step", {"applied": False, **outcome.to_document()}, ts)
                return outcome
            collapsed = self._apply_removal(box)
            self.cursor += 1
            if collapsed:
                self.plan_valid = False
                self._stale_collapse = collapsed
            outcome = StepOutcome(removed_box=box, actor=actor,
                                  collapsed=collapsed, plan_valid=self.plan_valid)
            self._log("plan_step", {"applied": True, "cursor": self.cursor,
                                    **outcome.to_document()}, ts)
            return outcome

    def remove_box(self, box: str, actor: str = "human",
                   ts: str | None = None) -> StepOutcome:
        with self._lock:
            if box not in self.scene.by_id:
                raise MissingBox(box)
            collapsed = self._apply_removal(box)
            if self.plan is not None and self.plan_valid:
                remaining = set(self.plan.sequence[self.cursor:])
                gone = {box, *collapsed}
                if remaining & gone:
                    self.plan_valid = False
                    self._stale_collapse = collapsed
            outcome = StepOutcome(removed_box=box, actor=actor,
                                  collapsed=collapsed, plan_valid=self.plan_valid)
            self._log("box_removed", {"box": box, **outcome.to_document()}, ts)
            return outcome

    def request_support(self, target: str, k: int, ranking: str = "literal",
                        ts: str | None = None) -> brg.SupportCandidates:
        with self._lock:
            if target not in self.scene.by_id:
                raise MissingBox(target)
            candidates = brg.support_candidates(self.graph, target, k, ranking=ranking)
            self._log("support_requested",
                      {"target": target, "k": k, "ranking": ranking,
                       **candidates.to_document()}, ts)
            return candidates

    def resolve_pointing(self, document, ts: str | None = None) -> pointing.PointingResult:
        cloud, pose = pointing.parse_cloud(document)
        with self._lock:
            result = pointing.resolve_pointing(cloud, self.scene, camera_pose=pose)
            self._log("pointing_resolved",
                      {"document": _as_document(document), "result": result.to_document()}, ts)
            return result

    def get_state(self) -> dict:
        with self._lock:
            return {
                "session_id": self.session_id,
                "scene": scene_to_document(self.scene),
                "brg": self.graph.to_document(),
                "plan": self.plan.to_document() if self.plan else None,
                "cursor": self.cursor,
                "plan_valid": self.plan_valid,
                "split": self.split.to_document() if self.split else None,
                "events": [dict(e) for e in self.events],
            }

    def _apply_removal(self, box: str) -> tuple[str, ...]:
        collapsed = physics.settle(self.scene, {box}).collapsed
        self.scene = self.scene.without({box, *collapsed})
        self.dep = brg.build_dependency_dictionary(self.scene)
        self.graph = brg.build_graph(self.dep)
        return collapsed


def _as_document(document) -> dict:
    if isinstance(document, (str, bytes)):
        return json.loads(document)
    return document


class ServiceCore:
    """Session registry; the shared backend for the HTTP API and replay."""

    def __init__(self, state_dir: str | Path | None = None):
        self.state_dir = Path(state_dir) if state_dir is not None else None
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create_session(self, document, session_id: str | None = None,
                       ts: str | None = None) -> dict:
        scene = parse_scene(document)
        sid = session_id or uuid.uuid4().hex[:12]
        sink = None
        if self.state_dir is not None:
            self.state_dir.mkdir(parents=True, exist_ok=True)
            sink = self.state_dir / f"{sid}.events.jsonl"
        session = Session(sid, scene, sink=sink)
        with self._lock:
            self._sessions[sid] = session
        session._log("session_created",
                     {"session_id": sid, "scene": scene_to_document(scene)}, ts)
        return session.summary()

    def session(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise SessionNotFound(session_id)
        return session


# -- deterministic replay ----------------------------------------------------


def replay_events(lines: Iterable[str]) -> dict:
    """Rebuild a session from its event log and return the final state.

    Re-executes every command with the recorded timestamps, verifying the
    recomputed outcomes against the recorded ones; any mismatch raises
    ReplayDivergence.
    """
    events = []
    for line in lines:
        line = line.strip()
        if line:
            events.append(json.loads(line))
    if not events or events[0]["kind"] != "session_created":
        raise ReplayDivergence("event log must start with session_created")

    first = events[0]
    session = Session(first["payload"]["session_id"], parse_scene(first["payload"]["scene"]))
    session._log("session_created", first["payload"], ts=first["ts"])

    for event in events[1:]:
        kind, payload, ts = event["kind"], event["payload"], event["ts"]
        if kind == "plan_requested":
            result = session.request_plan(payload["target"], payload["policy"], ts=ts)
            _expect(result["plan"] == payload["plan"], "plan_requested", event)
        elif kind == "plan_step":
            outcome = session.step_plan(payload["actor"], ts=ts)
            _expect(outcome.to_document()["collapsed"] == payload["collapsed"],
                    "plan_step", event)
        elif kind == "box_removed":
            outcome = session.remove_box(payload["box"], payload["actor"], ts=ts)
            _expect(list(outcome.collapsed) == payload["collapsed"], "box_removed", event)
        elif kind == "support_requested":
            candidates = session.request_support(payload["target"], payload["k"],
                                                 payload["ranking"], ts=ts)
            _expect(candidates.to_document()["ranked"] == payload["ranked"],
                    "support_requested", event)
        elif kind == "pointing_resolved":
            result = session.resolve_pointing(payload["document"], ts=ts)
            _expect(result.to_document() == payload["result"], "pointing_resolved", event)
        else:
            raise ReplayDivergence(f"unknown event kind {kind!r}")

    state = session.get_state()
    recorded_seqs = [e["seq"] for e in events]
    replayed_seqs = [e["seq"] for e in state["events"]]
    if recorded_seqs != replayed_seqs:
        raise ReplayDivergence("event sequence numbers diverged")
    return state


def _expect(ok: bool, kind: str, event: dict) -> None:
    if not ok:
        raise ReplayDivergence(f"{kind} event {event['seq']} no longer reproduces")
