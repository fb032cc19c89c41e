"""Pointing-gesture resolution from labeled point clouds.

Pipeline: keep the points flagged as belonging to the arm mask, cluster
them with DBSCAN to shed segmentation noise, take the largest cluster,
estimate the intended target as the per-coordinate median of the deepest
2% of its points, and pick the scene box whose centroid is nearest after
transforming into the shelf frame. Camera frame: z is depth, increasing
away from the camera.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .errors import EmptyCluster, EmptyScene, SchemaError
from .scene import Scene

NOISE = kernels.NOISE


@dataclass(frozen=True)
class ClusterParams:
    """DBSCAN radius/threshold plus the pointing-detection size gate."""

    eps: float = 0.03
    min_pts: int = 8
    min_cluster_size: int = 30

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.min_pts < 1:
            raise ValueError("min_pts must be at least 1")
        if self.min_cluster_size < self.min_pts:
            raise ValueError("min_cluster_size must be >= min_pts")


_IDENTITY = (1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0)


@dataclass(frozen=True)
class CameraPose:
    """Rigid transform from the camera frame into the shelf frame."""

    translation: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rotation_rowmajor: tuple[float, ...] = _IDENTITY

    def to_shelf(self, p: Sequence[float]) -> np.ndarray:
        r = np.asarray(self.rotation_rowmajor, dtype=np.float64).reshape(3, 3)
        return r @ np.asarray(p, dtype=np.float64) + np.asarray(self.translation)


@dataclass(frozen=True)
class PointCloud:
    """3-D points in the camera frame with per-point arm-mask flags."""

    points: np.ndarray
    mask: np.ndarray

    def masked_points(self) -> np.ndarray:
        return self.points[self.mask]


@dataclass(frozen=True)
class PointingResult:
    """Outcome of gesture resolution; absence of a gesture is not an error."""

    detected: bool
    target_point: tuple[float, float, float] | None = None
    selected_box: str | None = None
    distance: float | None = None

    def to_document(self) -> dict:
        doc: dict = {"detected": self.detected}
        if self.detected:
            doc["target_point"] = list(self.target_point)
            doc["selected_box"] = self.selected_box
            doc["distance"] = self.distance
        return doc


def parse_cloud(document: str | Mapping) -> tuple[PointCloud, CameraPose]:
    """Parse a point-cloud document; SchemaError on any malformation."""
    if isinstance(document, (str, bytes)):
        try:
            data = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from exc
    else:
        data = document
    if not isinstance(data, dict):
        raise SchemaError("cloud document: expected an object")
    unknown = set(data) - {"camera_pose", "points"}
    if unknown:
        raise SchemaError(f"cloud document: unknown keys {sorted(unknown)}")
    if "points" not in data or not isinstance(data["points"], list):
        raise SchemaError("cloud document: missing or invalid 'points' list")

    pose = CameraPose()
    if "camera_pose" in data:
        raw = data["camera_pose"]
        if not isinstance(raw, dict) or set(raw) - {"translation", "rotation_rowmajor"}:
            raise SchemaError("camera_pose: expected translation and rotation_rowmajor")
        t = raw.get("translation", (0.0, 0.0, 0.0))
        r = raw.get("rotation_rowmajor", _IDENTITY)
        if not isinstance(t, (list, tuple)) or len(t) != 3:
            raise SchemaError("camera_pose.translation: expected 3 numbers")
        if not isinstance(r, (list, tuple)) or len(r) != 9:
            raise SchemaError("camera_pose.rotation_rowmajor: expected 9 numbers")
        t = tuple(float(v) for v in t)
        r = tuple(float(v) for v in r)
        rm = np.array(r, dtype=np.float64).reshape(3, 3)
        if not np.allclose(rm @ rm.T, np.eye(3), atol=1e-6):
            raise SchemaError("camera_pose.rotation_rowmajor: not a rotation matrix")
        pose = CameraPose(translation=t, rotation_rowmajor=r)

    pts = np.zeros((len(data["points"]), 3), dtype=np.float64)
    mask = np.zeros(len(data["points"]), dtype=bool)
    for i, raw_pt in enumerate(data["points"]):
        if not isinstance(raw_pt, dict) or set(raw_pt) - {"p", "mask"} or "p" not in raw_pt:
            raise SchemaError(f"points[{i}]: expected {{'p': [x,y,z], 'mask': bool}}")
        p = raw_pt["p"]
        if not isinstance(p, (list, tuple)) or len(p) != 3:
            raise SchemaError(f"points[{i}].p: expected 3 numbers")
        try:
            pts[i] = [float(v) for v in p]
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"points[{i}].p: expected numbers") from exc
        if not np.all(np.isfinite(pts[i])):
            raise SchemaError(f"points[{i}].p: coordinates must be finite")
        flag = raw_pt.get("mask", False)
        if not isinstance(flag, bool):
            raise SchemaError(f"points[{i}].mask: expected a boolean")
        mask[i] = flag
        if flag and pts[i, 2] <= 0:
            raise SchemaError(f"points[{i}]: masked point must have positive depth")
    pts.setflags(write=False)
    mask.setflags(write=False)
    return PointCloud(points=pts, mask=mask), pose


def dbscan(points, params: ClusterParams) -> np.ndarray:
    """Cluster labels per point (NOISE = -1), deterministic in input order."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    return kernels.dbscan_labels(np.ascontiguousarray(pts), params.eps, params.min_pts)


def largest_cluster(points, labels) -> np.ndarray:
    """Points of the biggest cluster; ties favor the smaller cluster index."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    labels = np.asarray(labels)
    best_label, best_size = None, 0
    for label in np.unique(labels):
        if label == NOISE:
            continue
        size = int((labels == label).sum())
        if size > best_size:
            best_label, best_size = label, size
    if best_label is None:
        return pts[:0]
    return pts[labels == best_label]


def estimate_target(cluster_points, fraction: float = 0.02,
                    farthest: bool = True) -> np.ndarray:
    """Per-coordinate median of the deepest slice of a cluster.

    Keeps the m = max(1, ceil(fraction * n)) points with the greatest
    depth (smallest, when ``farthest`` is False); depth ties resolve to
    earlier input points.
    """
    pts = np.asarray(cluster_points, dtype=np.float64).reshape(-1, 3)
    n = pts.shape[0]
    if n == 0:
        raise EmptyCluster("cannot estimate a target from an empty cluster")
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    m = max(1, math.ceil(fraction * n))
    depth = pts[:, 2] if farthest else -pts[:, 2]
    order = np.lexsort((np.arange(n), -depth))
    return np.median(pts[order[:m]], axis=0)


def select_box(target_point, scene: Scene,
               camera_pose: CameraPose = CameraPose()) -> tuple[str, float]:
    """Nearest box centroid to the target point, ties by id ascending."""
    if not scene.boxes:
        raise EmptyScene("cannot select a box from an empty scene")
    p = camera_pose.to_shelf(np.asarray(target_point, dtype=np.float64))
    best_id, best_d = None, math.inf
    for b in scene.boxes:
        d = math.dist(p, b.center)
        if d < best_d or (d == best_d and (best_id is None or b.id < best_id)):
            best_id, best_d = b.id, d
    return best_id, best_d


def resolve_pointing(cloud: PointCloud, scene: Scene,
                     params: ClusterParams = ClusterParams(),
                     camera_pose: CameraPose = CameraPose(),
                     fraction: float = 0.02,
                     farthest: bool = True) -> PointingResult:
    """Full gesture pipeline; detected=False when no usable gesture exists."""
    masked = cloud.masked_points()
    if masked.shape[0] == 0:
        return PointingResult(detected=False)
    labels = dbscan(masked, params)
    cluster = largest_cluster(masked, labels)
    if cluster.shape[0] < params.min_cluster_size:
        return PointingResult(detected=False)
    target = estimate_target(cluster, fraction=fraction, farthest=farthest)
    box_id, distance = select_box(target, scene, camera_pose)
    return PointingResult(
        detected=True,
        target_point=tuple(float(v) for v in target),
        selected_box=box_id,
        distance=distance,
    )
