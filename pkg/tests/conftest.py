import pytest

from shelfplan.scene import BoxSpec, Scene, SceneConfig, ShelfSpec


def make_box(bid, dims, center, density=1.0, mass=None):
    if mass is None:
        mass = density * dims[0] * dims[1] * dims[2]
    return BoxSpec(id=bid, dims=tuple(dims), center=tuple(center), mass=mass)


def make_scene(boxes, shelf=None, config=None):
    return Scene(
        shelf=shelf or ShelfSpec(),
        boxes=tuple(boxes),
        config=config or SceneConfig(),
    )


@pytest.fixture
def p1_scene():
    """Pyramid: bridge C resting on grounded cubes A and B."""
    return make_scene([
        make_box("A", (0.2, 0.2, 0.2), (0.1, 0.1, 0.1)),
        make_box("B", (0.2, 0.2, 0.2), (0.5, 0.1, 0.1)),
        make_box("C", (0.6, 0.2, 0.2), (0.3, 0.1, 0.3)),
    ])


@pytest.fixture
def s1_scene():
    """Tower: cube A under B under C, perfectly aligned."""
    return make_scene([
        make_box("A", (0.2, 0.2, 0.2), (0.1, 0.1, 0.1)),
        make_box("B", (0.2, 0.2, 0.2), (0.1, 0.1, 0.3)),
        make_box("C", (0.2, 0.2, 0.2), (0.1, 0.1, 0.5)),
    ])


@pytest.fixture
def p1_document():
    return {
        "shelf": {"width_x": 1.0, "depth_y": 0.3, "height_z": 1.6},
        "boxes": [
            {"id": "A", "dims": [0.2, 0.2, 0.2], "center": [0.1, 0.1, 0.1]},
            {"id": "B", "dims": [0.2, 0.2, 0.2], "center": [0.5, 0.1, 0.1]},
            {"id": "C", "dims": [0.6, 0.2, 0.2], "center": [0.3, 0.1, 0.3]},
        ],
    }


@pytest.fixture
def s1_document():
    return {
        "shelf": {"width_x": 1.0, "depth_y": 0.3, "height_z": 1.6},
        "boxes": [
            {"id": "A", "dims": [0.2, 0.2, 0.2], "center": [0.1, 0.1, 0.1]},
            {"id": "B", "dims": [0.2, 0.2, 0.2], "center": [0.1, 0.1, 0.3]},
            {"id": "C", "dims": [0.2, 0.2, 0.2], "center": [0.1, 0.1, 0.5]},
        ],
    }
