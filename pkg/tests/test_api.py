import pytest
from fastapi.testclient import TestClient

from shelfplan.api import create_app
from shelfplan.service import ServiceCore


@pytest.fixture
def client():
    return TestClient(create_app(ServiceCore()))


@pytest.fixture
def sid(client, p1_document):
    response = client.post("/sessions", json=p1_document)
    assert response.status_code == 201
    return response.json()["session_id"]


class TestSessions:
    def test_create_returns_summary(self, client, p1_document):
        body = client.post("/sessions", json=p1_document).json()
        assert body["nodes"] == 3 and body["edges"] == 2

    def test_malformed_scene_400(self, client):
        response = client.post("/sessions", json={"boxes": []})
        assert response.status_code == 400
        assert response.json()["error"] == "SchemaError"

    def test_invalid_scene_422(self, client, p1_document):
        bad = dict(p1_document, boxes=[{"id": "x", "dims": [0.2, 0.2, 0.2],
                                        "center": [0.1, 0.1, 1.0]}])
        response = client.post("/sessions", json=bad)
        assert response.status_code == 422
        assert response.json()["error"] == "ValidationError"
        assert response.json()["violations"]

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/nope").status_code == 404


class TestPlanFlow:
    def test_plan_step_state(self, client, sid):
        plan = client.post(f"/sessions/{sid}/plan", json={"target": "A"}).json()
        assert plan["plan"]["sequence"] == ["C", "A"]
        assert plan["split"] == {"robot_tasks": ["A"], "human_tasks": ["C"]}

        s1 = client.post(f"/sessions/{sid}/step", json={"actor": "human"}).json()
        assert s1 == {"removed_box": "C", "actor": "human", "collapsed": [],
                      "plan_valid": True}
        s2 = client.post(f"/sessions/{sid}/step", json={"actor": "robot"}).json()
        assert s2["removed_box"] == "A" and s2["collapsed"] == []

        state = client.get(f"/sessions/{sid}").json()
        assert [b["id"] for b in state["scene"]["boxes"]] == ["B"]
        assert state["cursor"] == 2

    def test_plan_missing_target_404(self, client, sid):
        assert client.post(f"/sessions/{sid}/plan",
                           json={"target": "zz"}).status_code == 404

    def test_step_without_plan_409(self, client, sid):
        response = client.post(f"/sessions/{sid}/step", json={"actor": "robot"})
        assert response.status_code == 409
        assert response.json()["error"] == "NoPlan"

    def test_exhausted_409(self, client, sid):
        client.post(f"/sessions/{sid}/plan", json={"target": "C"})
        client.post(f"/sessions/{sid}/step", json={"actor": "robot"})
        response = client.post(f"/sessions/{sid}/step", json={"actor": "robot"})
        assert response.status_code == 409
        assert response.json()["error"] == "PlanExhausted"

    def test_bad_actor_400(self, client, sid):
        client.post(f"/sessions/{sid}/plan", json={"target": "A"})
        assert client.post(f"/sessions/{sid}/step",
                           json={"actor": "drone"}).status_code == 400


class TestRemoveSupportPointing:
    def test_remove(self, client, sid):
        body = client.post(f"/sessions/{sid}/remove", json={"box": "A"}).json()
        assert body["collapsed"] == ["C"]

    def test_remove_missing_404(self, client, sid):
        assert client.post(f"/sessions/{sid}/remove",
                           json={"box": "zz"}).status_code == 404

    def test_support(self, client, sid):
        body = client.post(f"/sessions/{sid}/support",
                           json={"target": "A", "k": 1}).json()
        assert body == {"ranked": [["C", 1]]}

    def test_support_invalid_k_422(self, client, sid):
        response = client.post(f"/sessions/{sid}/support",
                               json={"target": "A", "k": 0})
        assert response.status_code == 422
        assert response.json()["error"] == "InvalidK"

    def test_pointing(self, client, sid):
        from test_pointing import arm_cloud

        body = client.post(f"/sessions/{sid}/pointing",
                           json={"points": arm_cloud((0.1, 0.1, 0.13))}).json()
        assert body["detected"] is True and body["selected_box"] == "A"

    def test_pointing_schema_400(self, client, sid):
        assert client.post(f"/sessions/{sid}/pointing",
                           json={"nope": 1}).status_code == 400


class TestDotAndGenerate:
    def test_brg_dot(self, client, sid):
        response = client.get(f"/sessions/{sid}/brg.dot")
        assert response.status_code == 200
        assert response.headers["content-type"].startswith("text/plain")
        assert '"A" -> "C";' in response.text

    def test_generate_endpoint_matches_library(self, client):
        from shelfplan.scene import generate_scene, scene_to_document

        body = client.post("/generate", json={"seed": 42, "boxes": 8}).json()
        assert body == scene_to_document(generate_scene(42, 8))

    def test_generate_bad_args_400(self, client):
        assert client.post("/generate", json={"seed": "x", "boxes": 2}).status_code == 400
        assert client.post("/generate", json={"seed": 1, "boxes": 0}).status_code == 400
