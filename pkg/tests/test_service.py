import json

import pytest

from shelfplan import brg
from shelfplan.errors import (
    MissingBox,
    NoPlan,
    PlanExhausted,
    ReplayDivergence,
    SchemaError,
    SessionNotFound,
    ValidationError,
)
from shelfplan.scene import export_scene, generate_scene, parse_scene
from shelfplan.service import ServiceCore, replay_events


@pytest.fixture
def core():
    return ServiceCore()


@pytest.fixture
def p1_session(core, p1_document):
    summary = core.create_session(p1_document)
    return core.session(summary["session_id"])


@pytest.fixture
def s1_session(core, s1_document):
    summary = core.create_session(s1_document)
    return core.session(summary["session_id"])


class TestCreateSession:
    def test_p1_summary(self, core, p1_document):
        summary = core.create_session(p1_document)
        assert summary["boxes"] == 3
        assert summary["nodes"] == 3
        assert summary["edges"] == 2

    def test_malformed_document_no_session(self, core):
        with pytest.raises(SchemaError):
            core.create_session({"boxes": []})
        assert core._sessions == {}

    def test_invalid_scene_rejected(self, core, p1_document):
        bad = json.loads(json.dumps(p1_document))
        bad["boxes"][0]["center"] = [0.1, 0.1, 1.0]
        with pytest.raises(ValidationError):
            core.create_session(bad)

    def test_reference_shelf_with_palette_boxes(self, core):
        doc = export_scene(generate_scene(5, 3))
        summary = core.create_session(doc)
        assert summary["boxes"] == 3

    def test_unknown_session(self, core):
        with pytest.raises(SessionNotFound):
            core.session("nope")


class TestRequestPlan:
    def test_p1_target_a(self, p1_session):
        result = p1_session.request_plan("A")
        assert result["plan"]["sequence"] == ["C", "A"]
        assert result["split"] == {"robot_tasks": ["A"], "human_tasks": ["C"]}

    def test_p1_full_clear(self, p1_session):
        result = p1_session.request_plan("ALL")
        assert result["plan"]["sequence"] == ["C", "A", "B"]

    def test_unknown_target(self, p1_session):
        with pytest.raises(MissingBox):
            p1_session.request_plan("zz")

    def test_policy_forwarded(self, s1_session):
        result = s1_session.request_plan("ALL", policy="independence")
        assert result["split"]["human_tasks"] == []


class TestStepPlan:
    def test_two_steps_clear_p1_target(self, p1_session):
        p1_session.request_plan("A")
        first = p1_session.step_plan("human")
        assert (first.removed_box, first.collapsed, first.plan_valid) == ("C", (), True)
        second = p1_session.step_plan("robot")
        assert (second.removed_box, second.collapsed, second.plan_valid) == ("A", (), True)
        state = p1_session.get_state()
        assert [b["id"] for b in state["scene"]["boxes"]] == ["B"]
        assert state["cursor"] == 2

    def test_step_without_plan(self, p1_session):
        with pytest.raises(NoPlan):
            p1_session.step_plan("robot")

    def test_step_past_end(self, s1_session):
        s1_session.request_plan("C")
        s1_session.step_plan("robot")
        with pytest.raises(PlanExhausted):
            s1_session.step_plan("robot")

    def test_bad_actor(self, p1_session):
        p1_session.request_plan("A")
        with pytest.raises(ValueError):
            p1_session.step_plan("drone")

    def test_stale_plan_freezes_with_collapse_report(self, p1_session):
        p1_session.request_plan("A")  # plan [C, A]
        outcome = p1_session.remove_box("A")  # out-of-plan removal
        assert outcome.collapsed == ("C",)
        assert outcome.plan_valid is False
        frozen = p1_session.step_plan("robot")
        assert frozen.plan_valid is False
        assert frozen.collapsed == ("C",)
        # the scene did not change while frozen
        assert [b["id"] for b in p1_session.get_state()["scene"]["boxes"]] == ["B"]
        # replanning unfreezes
        p1_session.request_plan("B")
        assert p1_session.step_plan("robot").plan_valid is True

    def test_collapse_during_step_freezes(self, p1_session):
        # force an unsafe plan by rebinding the stored one
        p1_session.request_plan("A")
        p1_session.plan = brg.ExtractionPlan(target="A", sequence=("A", "C"))
        outcome = p1_session.step_plan("robot")
        assert outcome.collapsed == ("C",)
        assert outcome.plan_valid is False


class TestRemoveBox:
    def test_p1_remove_a_collapses_c(self, p1_session):
        outcome = p1_session.remove_box("A")
        assert outcome.collapsed == ("C",)
        assert outcome.removed_box == "A"

    def test_topmost_removal_no_collapse(self, s1_session):
        assert s1_session.remove_box("C").collapsed == ()

    def test_double_removal(self, s1_session):
        s1_session.remove_box("C")
        with pytest.raises(MissingBox):
            s1_session.remove_box("C")


class TestSupportAndPointing:
    def test_support_stack_target_a(self, s1_session):
        candidates = s1_session.request_support("A", 1)
        assert candidates.ranked == (("C", 2),)

    def test_support_only_target_related(self, s1_session):
        candidates = s1_session.request_support("C", 2)
        assert candidates.ranked == (("C", 0),)

    def test_pointing_endpoint(self, p1_session):
        from test_pointing import arm_cloud

        result = p1_session.resolve_pointing({"points": arm_cloud((0.1, 0.1, 0.13))})
        assert result.detected and result.selected_box == "A"

    def test_pointing_no_gesture_logged(self, p1_session):
        result = p1_session.resolve_pointing({"points": []})
        assert result.detected is False
        assert p1_session.get_state()["events"][-1]["kind"] == "pointing_resolved"

    def test_pointing_schema_error(self, p1_session):
        with pytest.raises(SchemaError):
            p1_session.resolve_pointing({"pointz": []})


class TestGetState:
    def test_fresh_session(self, p1_session):
        state = p1_session.get_state()
        assert state["cursor"] == 0
        assert state["plan"] is None
        assert state["split"] is None
        assert state["plan_valid"] is True

    def test_snapshot_reflects_steps(self, p1_session):
        p1_session.request_plan("A")
        p1_session.step_plan("human")
        state = p1_session.get_state()
        assert state["cursor"] == 1
        assert "C" not in [b["id"] for b in state["scene"]["boxes"]]

    def test_repeated_reads_identical(self, p1_session):
        p1_session.request_plan("A")
        assert p1_session.get_state() == p1_session.get_state()

    def test_brg_coherence_after_every_mutation(self, p1_session):
        p1_session.request_plan("ALL")
        while True:
            try:
                p1_session.step_plan("robot")
            except PlanExhausted:
                break
            state = p1_session.get_state()
            scene = parse_scene(state["scene"]) if state["scene"]["boxes"] else None
            if scene is None:
                assert state["brg"] == {"nodes": [], "edges": []}
                continue
            fresh = brg.build_graph(brg.build_dependency_dictionary(scene))
            assert state["brg"] == fresh.to_document()

    def test_event_log_gap_free(self, p1_session):
        p1_session.request_plan("A")
        p1_session.step_plan("human")
        p1_session.request_support("A", 1)
        seqs = [e["seq"] for e in p1_session.get_state()["events"]]
        assert seqs == list(range(1, len(seqs) + 1))


class TestPlanCompletion:
    def test_full_clear_empties_scene_without_collapse(self):
        for seed in (0, 4, 9):
            core = ServiceCore()
            doc = export_scene(generate_scene(seed, 6))
            sid = core.create_session(doc)["session_id"]
            session = core.session(sid)
            plan = session.request_plan("ALL")["plan"]["sequence"]
            for _ in plan:
                outcome = session.step_plan("robot")
                assert outcome.collapsed == ()
            assert session.get_state()["scene"]["boxes"] == []


class TestPersistenceAndReplay:
    def test_event_file_written(self, tmp_path, p1_document):
        core = ServiceCore(state_dir=tmp_path)
        sid = core.create_session(p1_document)["session_id"]
        session = core.session(sid)
        session.request_plan("A")
        session.step_plan("human")
        lines = (tmp_path / f"{sid}.events.jsonl").read_text().splitlines()
        assert len(lines) == 3
        assert json.loads(lines[0])["kind"] == "session_created"

    def test_replay_reproduces_state(self, tmp_path, p1_document):
        core = ServiceCore(state_dir=tmp_path)
        sid = core.create_session(p1_document)["session_id"]
        session = core.session(sid)
        session.request_plan("A")
        session.step_plan("human")
        session.remove_box("A")
        session.request_support("B", 1)
        path = tmp_path / f"{sid}.events.jsonl"
        state = replay_events(path.read_text().splitlines())
        assert state == session.get_state()

    def test_replay_divergence_detected(self, tmp_path, p1_document):
        core = ServiceCore(state_dir=tmp_path)
        sid = core.create_session(p1_document)["session_id"]
        session = core.session(sid)
        session.request_plan("A")
        path = tmp_path / f"{sid}.events.jsonl"
        lines = path.read_text().splitlines()
        tampered = json.loads(lines[1])
        tampered["payload"]["plan"]["sequence"] = ["A", "C"]
        with pytest.raises(ReplayDivergence):
            replay_events([lines[0], json.dumps(tampered)])

    def test_replay_requires_creation_event(self):
        with pytest.raises(ReplayDivergence):
            replay_events(['{"seq": 1, "ts": "t", "kind": "plan_step", "payload": {}}'])
