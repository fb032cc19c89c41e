"""Scene model: axis-aligned boxes on a shelf, file I/O, and generation.

Coordinate frame: x right, y into the shelf, z up; z = 0 is the shelf
surface and the shelf origin is its front-left surface corner. Scenes are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import GenerationExhausted, SchemaError, ValidationError

SHELF = "SHELF"  # sentinel supporter id for the shelf surface
ALL = "ALL"      # sentinel plan target meaning "clear every box"
_RESERVED_IDS = frozenset({SHELF, ALL})

# the three mixed cardboard sizes used on the reference shelf, meters
DEFAULT_PALETTE = (
    (0.23, 0.31, 0.25),
    (0.20, 0.20, 0.20),
    (0.50, 0.17, 0.17),
)


@dataclass(frozen=True)
class ShelfSpec:
    """Usable shelf volume in meters."""

    width_x: float = 1.0
    depth_y: float = 0.3
    height_z: float = 1.6


@dataclass(frozen=True)
class SceneConfig:
    """Physics constants and geometric tolerances.

    ``contact_tolerance`` (m) is the maximum face gap that still counts as
    contact, ``min_overlap_area`` (m^2) the smallest overlap that counts
    as a support patch, and ``stability_margin`` (m) how far inside the
    support hull the center of mass must lie (0 = boundary counts stable).
    """

    gravity: float = 9.81
    friction: float = 0.75
    spinning_friction: float = 0.01
    density: float = 1.0
    contact_tolerance: float = 1e-3
    min_overlap_area: float = 1e-4
    stability_margin: float = 0.0


@dataclass(frozen=True)
class BoxSpec:
    """One axis-aligned box: extents, center position, and mass."""

    id: str
    dims: tuple[float, float, float]
    center: tuple[float, float, float]
    mass: float

    @property
    def volume(self) -> float:
        return self.dims[0] * self.dims[1] * self.dims[2]

    @property
    def bottom(self) -> float:
        return self.center[2] - self.dims[2] * 0.5

    @property
    def top(self) -> float:
        return self.center[2] + self.dims[2] * 0.5

    def footprint(self) -> tuple[float, float, float, float]:
        """Axis-aligned x-y extent as (x0, y0, x1, y1)."""
        return (
            self.center[0] - self.dims[0] * 0.5,
            self.center[1] - self.dims[1] * 0.5,
            self.center[0] + self.dims[0] * 0.5,
            self.center[1] + self.dims[1] * 0.5,
        )


@dataclass(frozen=True)
class Scene:
    """A shelf, its boxes, and the physics configuration."""

    shelf: ShelfSpec
    boxes: tuple[BoxSpec, ...]
    config: SceneConfig = field(default_factory=SceneConfig)

    @cached_property
    def by_id(self) -> Mapping[str, BoxSpec]:
        return {b.id: b for b in self.boxes}

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(b.id for b in self.boxes)

    def without(self, removed: Iterable[str]) -> "Scene":
        """Copy of this scene minus the given boxes (no revalidation)."""
        gone = set(removed)
        return replace(self, boxes=tuple(b for b in self.boxes if b.id not in gone))


@dataclass(frozen=True)
class ValidationReport:
    """Every invariant violation found in a scene; empty means valid."""

    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


PAPER_SHELF = ShelfSpec()


def _require_number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{where}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise SchemaError(f"{where}: value must be finite")
    return value


def _require_keys(obj, allowed: set[str], required: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise SchemaError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise SchemaError(f"{where}: missing keys {sorted(missing)}")


def _parse_triple(value, where: str) -> tuple[float, float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise SchemaError(f"{where}: expected 3 numbers")
    return tuple(_require_number(v, where) for v in value)  # type: ignore[return-value]


_CONFIG_KEYS = {
    "gravity", "friction", "spinning_friction", "density",
    "contact_tolerance", "min_overlap_area", "stability_margin",
}


def parse_scene(document: str | Mapping) -> Scene:
    """Parse and fully validate a scene document.

    Accepts the raw JSON text or an already-decoded mapping. Raises
    SchemaError for malformed documents and ValidationError when the
    described scene breaks a structural invariant.
    """
    if isinstance(document, (str, bytes)):
        try:
            data = json.loads(document, parse_constant=_reject_constant)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from exc
    else:
        data = document

    _require_keys(data, {"shelf", "config", "boxes"}, {"shelf", "boxes"}, "document")
    _require_keys(data["shelf"], {"width_x", "depth_y", "height_z"},
                  {"width_x", "depth_y", "height_z"}, "shelf")
    shelf = ShelfSpec(
        width_x=_require_number(data["shelf"]["width_x"], "shelf.width_x"),
        depth_y=_require_number(data["shelf"]["depth_y"], "shelf.depth_y"),
        height_z=_require_number(data["shelf"]["height_z"], "shelf.height_z"),
    )

    cfg_data = data.get("config", {})
    _require_keys(cfg_data, _CONFIG_KEYS, set(), "config")
    config = SceneConfig(**{k: _require_number(v, f"config.{k}") for k, v in cfg_data.items()})

    if not isinstance(data["boxes"], list):
        raise SchemaError("boxes: expected a list")
    boxes = []
    for i, raw in enumerate(data["boxes"]):
        where = f"boxes[{i}]"
        _require_keys(raw, {"id", "dims", "center", "mass"}, {"id", "dims", "center"}, where)
        if not isinstance(raw["id"], str) or not raw["id"]:
            raise SchemaError(f"{where}.id: expected a non-empty string")
        dims = _parse_triple(raw["dims"], f"{where}.dims")
        center = _parse_triple(raw["center"], f"{where}.center")
        if "mass" in raw:
            mass = _require_number(raw["mass"], f"{where}.mass")
        else:
            mass = config.density * dims[0] * dims[1] * dims[2]
        boxes.append(BoxSpec(id=raw["id"], dims=dims, center=center, mass=mass))

    scene = Scene(shelf=shelf, boxes=tuple(boxes), config=config)
    report = validate_scene(scene)
    if not report.ok:
        raise ValidationError(report.violations)
    return scene


def _reject_constant(name):
    raise SchemaError(f"non-finite JSON constant {name!r} not allowed")


def validate_scene(scene: Scene) -> ValidationReport:
    """Check every scene invariant; violations are data, not errors."""
    v: list[str] = []
    cfg = scene.config
    eps_z = cfg.contact_tolerance

    if scene.shelf.width_x <= 0 or scene.shelf.depth_y <= 0 or scene.shelf.height_z <= 0:
        v.append("shelf extents must be strictly positive")
    if cfg.gravity <= 0:
        v.append("gravity must be strictly positive")
    if eps_z < 0 or cfg.min_overlap_area < 0 or cfg.stability_margin < 0:
        v.append("tolerances must be non-negative")

    seen: set[str] = set()
    for b in scene.boxes:
        if b.id in _RESERVED_IDS:
            v.append(f"box {b.id!r}: id is reserved")
        if b.id in seen:
            v.append(f"duplicate id {b.id!r}")
        seen.add(b.id)
        if min(b.dims) <= 0:
            v.append(f"box {b.id!r}: dims must be strictly positive")
            continue
        if b.mass <= 0:
            v.append(f"box {b.id!r}: mass must be strictly positive")
        if b.bottom < -eps_z:
            v.append(f"box {b.id!r}: penetrates shelf surface")
        x0, y0, x1, y1 = b.footprint()
        # side walls, back wall, and height are hard limits; the shelf
        # front is open, so forward (y < 0) overhang is legal and only
        # bounded by the stability check
        if (x0 < -eps_z or x1 > scene.shelf.width_x + eps_z
                or y1 > scene.shelf.depth_y + eps_z or b.top > scene.shelf.height_z + eps_z):
            v.append(f"box {b.id!r}: outside shelf volume")

    for i, a in enumerate(scene.boxes):
        for b in scene.boxes[i + 1:]:
            if _interpenetrates(a, b, eps_z):
                v.append(f"boxes {a.id!r} and {b.id!r} inter-penetrate")

    if not v and scene.boxes:
        from . import physics  # deferred: physics depends on this module

        collapsed = physics.settle(scene, frozenset()).collapsed
        if collapsed:
            v.append("initially unstable: " + ", ".join(collapsed))
    return ValidationReport(violations=tuple(v))


def _interpenetrates(a: BoxSpec, b: BoxSpec, eps_z: float) -> bool:
    for axis in range(3):
        lo = max(a.center[axis] - a.dims[axis] * 0.5, b.center[axis] - b.dims[axis] * 0.5)
        hi = min(a.center[axis] + a.dims[axis] * 0.5, b.center[axis] + b.dims[axis] * 0.5)
        if hi - lo <= eps_z:
            return False
    return True


def scene_to_document(scene: Scene) -> dict:
    """Plain-dict mirror of a scene, suitable for JSON serialization."""
    cfg = scene.config
    return {
        "shelf": {
            "width_x": scene.shelf.width_x,
            "depth_y": scene.shelf.depth_y,
            "height_z": scene.shelf.height_z,
        },
        "config": {
            "gravity": cfg.gravity,
            "friction": cfg.friction,
            "spinning_friction": cfg.spinning_friction,
            "density": cfg.density,
            "contact_tolerance": cfg.contact_tolerance,
            "min_overlap_area": cfg.min_overlap_area,
            "stability_margin": cfg.stability_margin,
        },
        "boxes": [
            {"id": b.id, "dims": list(b.dims), "center": list(b.center), "mass": b.mass}
            for b in scene.boxes
        ],
    }


def export_scene(scene: Scene) -> str:
    """Canonical scene document text; parse_scene(export_scene(s)) == s."""
    return json.dumps(scene_to_document(scene), indent=2) + "\n"


def generate_scene(
    seed: int,
    n_boxes: int,
    palette: Sequence[tuple[float, float, float]] = DEFAULT_PALETTE,
    shelf: ShelfSpec = PAPER_SHELF,
    config: SceneConfig | None = None,
    max_attempts: int = 240,
) -> Scene:
    """Seeded pseudo-random stable stacking; bit-exact for equal inputs.

    Each box is placed either on the shelf floor or on top of an earlier
    box (with its center over the support so the placement is stable by
    construction); placements that leave the shelf, inter-penetrate, or
    end up unstable are rejected and retried. Raises GenerationExhausted
    when a box exceeds the per-box attempt budget.
    """
    if n_boxes < 1:
        raise ValueError("n_boxes must be at least 1")
    if not palette:
        raise ValueError("palette must be non-empty")
    cfg = config or SceneConfig()
    rng = random.Random(seed)
    placed: list[BoxSpec] = []
    # keep the support point comfortably inside the base so the single
    # patch always contains the new center of mass; boxes may overhang
    # the open shelf front as long as the center stays supported
    inset = 0.02

    for i in range(n_boxes):
        for _ in range(max_attempts):
            dims = tuple(rng.choice(tuple(palette)))
            w, d, h = dims
            if placed and rng.random() < 0.5:
                base = rng.choice(placed)
                bx0, by0, bx1, by1 = base.footprint()
                lo_x = max(bx0 + inset, w * 0.5)
                hi_x = min(bx1 - inset, shelf.width_x - w * 0.5)
                lo_y = by0 + inset
                hi_y = min(by1 - inset, shelf.depth_y - d * 0.5)
                cz = base.top + h * 0.5
                if lo_x > hi_x or lo_y > hi_y or base.top + h > shelf.height_z:
                    continue
                cx = rng.uniform(lo_x, hi_x)
                cy = rng.uniform(lo_y, hi_y)
            else:
                lo_y = inset
                hi_y = shelf.depth_y - d * 0.5
                if w > shelf.width_x or lo_y > hi_y or h > shelf.height_z:
                    continue
                cx = rng.uniform(w * 0.5, shelf.width_x - w * 0.5)
                cy = rng.uniform(lo_y, hi_y)
                cz = h * 0.5
            cand = BoxSpec(
                id=f"b{i}",
                dims=dims,
                center=(cx, cy, cz),
                mass=cfg.density * w * d * h,
            )
            if any(_interpenetrates(cand, other, cfg.contact_tolerance) for other in placed):
                continue
            if not _candidate_stable(cand, placed, shelf, cfg):
                continue
            placed.append(cand)
            break
        else:
            raise GenerationExhausted(
                f"could not place box {i + 1} of {n_boxes} within {max_attempts} attempts"
            )

    scene = Scene(shelf=shelf, boxes=tuple(placed), config=cfg)
    report = validate_scene(scene)
    if not report.ok:  # placement rules guarantee validity
        raise GenerationExhausted("generated scene failed validation: " + "; ".join(report.violations))
    return scene


def _candidate_stable(cand: BoxSpec, placed: Sequence[BoxSpec], shelf: ShelfSpec,
                      cfg: SceneConfig) -> bool:
    from . import physics  # deferred: physics depends on this module

    trial = Scene(shelf=shelf, boxes=tuple(placed) + (cand,), config=cfg)
    support = physics.compute_contacts(trial)
    return physics.is_stable(cand.id, support, trial)
