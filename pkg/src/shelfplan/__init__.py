"""Collapse-safe extraction planning for boxes stacked on shelves.

Submodules: ``scene`` (model, I/O, generation), ``physics`` (quasi-static
stability engine), ``brg`` (box relations graph and planners),
``pointing`` (gesture resolution), ``service``/``api``/``cli``
(orchestration surfaces), ``kernels`` (compiled/pure compute backends).
"""

from .scene import (  # noqa: F401
    ALL,
    SHELF,
    BoxSpec,
    Scene,
    SceneConfig,
    ShelfSpec,
    export_scene,
    generate_scene,
    parse_scene,
    validate_scene,
)

__version__ = "0.1.0"
