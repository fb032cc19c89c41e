"""Quasi-static stability engine over immutable scenes.

A box is stable iff the x-y projection of its center of mass lies inside
(or on the boundary of) the convex hull of the corner points of its
support patches. Settling removes unstable boxes to a fixpoint, treating
collapsed boxes as vanished; the friction constants carried in the scene
config play no role in this criterion. All operations are pure functions
and safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

from . import kernels
from .errors import MissingBox
from .scene import SHELF, Scene


@dataclass(frozen=True)
class ContactPatch:
    """Overlap rectangle between a supporter's top face and a supported
    box's bottom face (supporter may be the SHELF sentinel)."""

    supporter_id: str
    supported_id: str
    rect: tuple[float, float, float, float]  # x0, y0, x1, y1
    z_level: float

    @property
    def area(self) -> float:
        return (self.rect[2] - self.rect[0]) * (self.rect[3] - self.rect[1])

    def corners(self) -> tuple[tuple[float, float], ...]:
        x0, y0, x1, y1 = self.rect
        return ((x0, y0), (x1, y0), (x1, y1), (x0, y1))


@dataclass(frozen=True)
class SupportMap:
    """All contact patches of a scene, indexed by the supported box."""

    patches: tuple[ContactPatch, ...]
    by_supported: Mapping[str, tuple[ContactPatch, ...]]


@dataclass(frozen=True)
class StabilityReport:
    """Cascade outcome: who collapsed (in order) and who remains."""

    collapsed: tuple[str, ...]
    survivors: tuple[str, ...]

    def to_document(self) -> dict:
        return {"collapsed": list(self.collapsed), "survivors": list(self.survivors)}


@lru_cache(maxsize=256)
def _scene_arrays(scene: Scene):
    n = len(scene.boxes)
    centers = np.empty((n, 3), dtype=np.float64)
    dims = np.empty((n, 3), dtype=np.float64)
    for i, b in enumerate(scene.boxes):
        centers[i] = b.center
        dims[i] = b.dims
    ids = scene.ids
    rank_of = {bid: r for r, bid in enumerate(sorted(ids))}
    id_rank = np.array([rank_of[bid] for bid in ids], dtype=np.int64)
    centers.setflags(write=False)
    dims.setflags(write=False)
    id_rank.setflags(write=False)
    return centers, dims, id_rank


def compute_contacts(scene: Scene) -> SupportMap:
    """Detect every support patch in the scene.

    A patch (a, b) exists iff the vertical gap between a's top face and
    b's bottom face is within the contact tolerance and the footprint
    overlap area exceeds the minimum overlap area; boxes resting within
    tolerance of z = 0 get a SHELF patch over the intersection of their
    footprint and the shelf surface (the shelf front is open, so a box
    may overhang forward but earns no support there).
    """
    centers, dims, _ = _scene_arrays(scene)
    cfg = scene.config
    raw = kernels.box_patches(np.ascontiguousarray(centers), np.ascontiguousarray(dims),
                              cfg.contact_tolerance, cfg.min_overlap_area,
                              scene.shelf.width_x, scene.shelf.depth_y)
    ids = scene.ids
    patches = []
    by_supported: dict[str, list[ContactPatch]] = {}
    for b, row in enumerate(raw):
        for sup, x0, y0, x1, y1 in row:
            supporter = SHELF if sup == kernels.SHELF_IDX else ids[sup]
            patch = ContactPatch(
                supporter_id=supporter,
                supported_id=ids[b],
                rect=(x0, y0, x1, y1),
                z_level=scene.boxes[b].bottom,
            )
            patches.append(patch)
            by_supported.setdefault(ids[b], []).append(patch)
    patches.sort(key=lambda p: (p.supported_id, p.supporter_id))
    return SupportMap(
        patches=tuple(patches),
        by_supported={k: tuple(v) for k, v in by_supported.items()},
    )


def is_stable(box_id: str, support_map: SupportMap, scene: Scene) -> bool:
    """Center-of-mass-over-support-hull test for one box."""
    box = scene.by_id.get(box_id)
    if box is None:
        raise MissingBox(box_id)
    corners: list[tuple[float, float]] = []
    for patch in support_map.by_supported.get(box_id, ()):
        corners.extend(patch.corners())
    if not corners:
        return False
    from .kernels import pure  # hull helpers live with the reference kernel

    hull = pure.convex_hull(corners)
    return pure.hull_contains(hull, box.center[0], box.center[1],
                              scene.config.stability_margin)


def settle(scene: Scene, removed: Iterable[str] = frozenset()) -> StabilityReport:
    """Cascade to a fixpoint after the given boxes are taken away.

    Each round, every box that fails the stability test is appended to
    the collapse order (lowest z-center first, ties by id) and stops
    supporting others; collapsed boxes vanish rather than falling.
    """
    removed = frozenset(removed)
    unknown = removed - set(scene.ids)
    if unknown:
        raise MissingBox(", ".join(sorted(unknown)))
    centers, dims, id_rank = _scene_arrays(scene)
    active = np.array([0 if b.id in removed else 1 for b in scene.boxes], dtype=np.uint8)
    cfg = scene.config
    order = kernels.settle_cascade(
        np.ascontiguousarray(centers), np.ascontiguousarray(dims), id_rank, active,
        cfg.contact_tolerance, cfg.min_overlap_area, cfg.stability_margin,
        scene.shelf.width_x, scene.shelf.depth_y,
    )
    ids = scene.ids
    collapsed = tuple(ids[i] for i in order)
    gone = removed | set(collapsed)
    survivors = tuple(sorted(b for b in ids if b not in gone))
    return StabilityReport(collapsed=collapsed, survivors=survivors)


def probe_removal(scene: Scene, box_id: str) -> frozenset[str]:
    """Boxes that would collapse if ``box_id`` were removed; pure."""
    if box_id not in scene.by_id:
        raise MissingBox(box_id)
    return frozenset(settle(scene, {box_id}).collapsed)


def probe_all_removals(scene: Scene) -> dict[str, frozenset[str]]:
    """probe_removal for every box, sharing one contact-detection pass."""
    centers, dims, id_rank = _scene_arrays(scene)
    cfg = scene.config
    rows = kernels.probe_all(
        np.ascontiguousarray(centers), np.ascontiguousarray(dims), id_rank,
        cfg.contact_tolerance, cfg.min_overlap_area, cfg.stability_margin,
        scene.shelf.width_x, scene.shelf.depth_y,
    )
    ids = scene.ids
    return {ids[i]: frozenset(ids[j] for j in row) for i, row in enumerate(rows)}
