"""Pure Python/numpy kernels: support-cascade settling and density clustering.

This module defines the reference semantics for the compiled extension in
``_native.pyx``; the two are interchangeable and are cross-checked by the
kernel parity tests. Geometry is axis-aligned throughout: a box is stable
iff the x-y projection of its center of mass lies inside (or on the
boundary of) the convex hull of the corner points of its support patches,
shrunk inward by ``margin``.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np

NOISE = -1
SHELF_IDX = -1


def box_patches(centers, dims, eps_z, eps_a, shelf_w, shelf_d):
    """Support patches per box.

    Returns a list with one entry per box; entry ``b`` is a list of tuples
    ``(supporter, x0, y0, x1, y1)`` where ``supporter`` is a box index or
    ``SHELF_IDX`` for the shelf surface. A patch exists iff the vertical
    gap between the two faces is within ``eps_z`` and the footprint
    overlap area exceeds ``eps_a``; shelf patches are clipped to the
    shelf surface rectangle, so front overhang earns no support.
    """
    n = centers.shape[0]
    patches = [[] for _ in range(n)]
    for b in range(n):
        bx0 = centers[b, 0] - dims[b, 0] * 0.5
        bx1 = centers[b, 0] + dims[b, 0] * 0.5
        by0 = centers[b, 1] - dims[b, 1] * 0.5
        by1 = centers[b, 1] + dims[b, 1] * 0.5
        bot = centers[b, 2] - dims[b, 2] * 0.5
        if abs(bot) <= eps_z:
            sx0 = max(bx0, 0.0)
            sx1 = min(bx1, shelf_w)
            sy0 = max(by0, 0.0)
            sy1 = min(by1, shelf_d)
            if sx1 > sx0 and sy1 > sy0 and (sx1 - sx0) * (sy1 - sy0) > eps_a:
                patches[b].append((SHELF_IDX, sx0, sy0, sx1, sy1))
        for a in range(n):
            if a == b:
                continue
            top = centers[a, 2] + dims[a, 2] * 0.5
            if abs(bot - top) > eps_z:
                continue
            x0 = max(bx0, centers[a, 0] - dims[a, 0] * 0.5)
            x1 = min(bx1, centers[a, 0] + dims[a, 0] * 0.5)
            y0 = max(by0, centers[a, 1] - dims[a, 1] * 0.5)
            y1 = min(by1, centers[a, 1] + dims[a, 1] * 0.5)
            if x1 > x0 and y1 > y0 and (x1 - x0) * (y1 - y0) > eps_a:
                patches[b].append((a, x0, y0, x1, y1))
    return patches


def _cross(ox, oy, ax, ay, bx, by):
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def convex_hull(points):
    """Andrew monotone chain; counter-clockwise, collinear points dropped."""
    pts = sorted(points)
    if len(pts) <= 2:
        return pts
    lower = []
    for px, py in pts:
        while len(lower) >= 2 and _cross(lower[-2][0], lower[-2][1],
                                         lower[-1][0], lower[-1][1], px, py) <= 0.0:
            lower.pop()
        lower.append((px, py))
    upper = []
    for px, py in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2][0], upper[-2][1],
                                         upper[-1][0], upper[-1][1], px, py) <= 0.0:
            upper.pop()
        upper.append((px, py))
    return lower[:-1] + upper[:-1]


def hull_contains(hull, px, py, margin):
    """Point-in-convex-polygon with an inward margin.

    With ``margin == 0`` a point exactly on the boundary counts as inside.
    Degenerate hulls (segment, single point) only contain points lying on
    them, and never satisfy a positive margin.
    """
    m = len(hull)
    if m == 0:
        return False
    if m == 1:
        return margin <= 0.0 and px == hull[0][0] and py == hull[0][1]
    if m == 2:
        if margin > 0.0:
            return False
        (x0, y0), (x1, y1) = hull
        if _cross(x0, y0, x1, y1, px, py) != 0.0:
            return False
        dot = (px - x0) * (x1 - x0) + (py - y0) * (y1 - y0)
        return 0.0 <= dot <= (x1 - x0) ** 2 + (y1 - y0) ** 2
    for i in range(m):
        x0, y0 = hull[i]
        x1, y1 = hull[(i + 1) % m]
        cr = _cross(x0, y0, x1, y1, px, py)
        if margin == 0.0:
            if cr < 0.0:
                return False
        elif cr < margin * math.sqrt((x1 - x0) ** 2 + (y1 - y0) ** 2):
            return False
    return True


def _stable(b, patches, active, centers, margin):
    corners = []
    for sup, x0, y0, x1, y1 in patches[b]:
        if sup == SHELF_IDX or active[sup]:
            corners.extend(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))
    if not corners:
        return False
    return hull_contains(convex_hull(corners), centers[b, 0], centers[b, 1], margin)


def _cascade(patches, centers, id_rank, active, margin):
    n = centers.shape[0]
    act = list(active)
    order = []
    while True:
        unstable = [b for b in range(n) if act[b] and not _stable(b, patches, act, centers, margin)]
        if not unstable:
            break
        unstable.sort(key=lambda b: (centers[b, 2], id_rank[b]))
        for b in unstable:
            act[b] = 0
            order.append(b)
    return order


def settle_cascade(centers, dims, id_rank, active, eps_z, eps_a, margin, shelf_w, shelf_d):
    """Collapse order among active boxes after the inactive ones vanish.

    Fixpoint of: every active box failing the stability criterion is
    appended to the collapse order (lowest z-center first, then id rank)
    and stops supporting others. Returns box indices in collapse order.
    """
    patches = box_patches(centers, dims, eps_z, eps_a, shelf_w, shelf_d)
    return _cascade(patches, centers, id_rank, active, margin)


def probe_all(centers, dims, id_rank, eps_z, eps_a, margin, shelf_w, shelf_d):
    """Collapse order for each single-box removal, sharing one contact pass."""
    n = centers.shape[0]
    patches = box_patches(centers, dims, eps_z, eps_a, shelf_w, shelf_d)
    out = []
    for removed in range(n):
        active = [1] * n
        active[removed] = 0
        out.append(_cascade(patches, centers, id_rank, active, margin))
    return out


def dbscan_labels(points, eps, min_pts):
    """Density-based cluster labels; ``NOISE`` for unclustered points.

    A core point has at least ``min_pts`` points (itself included) within
    Euclidean distance ``eps``. Cluster indices are assigned in order of
    the first core point encountered scanning the input; expansion visits
    neighbors in ascending index order, so labels are deterministic.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    n = pts.shape[0]
    labels = np.full(n, -2, dtype=np.int64)
    # every queued point is labeled when popped, so enqueue-once keeps
    # labels identical while bounding the queue
    queued = np.zeros(n, dtype=bool)
    eps2 = eps * eps
    cluster = 0
    for i in range(n):
        if labels[i] != -2:
            continue
        d2 = ((pts - pts[i]) ** 2).sum(axis=1)
        neigh = np.flatnonzero(d2 <= eps2)
        if neigh.size < min_pts:
            labels[i] = NOISE
            continue
        labels[i] = cluster
        queue = deque()
        for j in neigh:
            if j != i and not queued[j]:
                queued[j] = True
                queue.append(int(j))
        while queue:
            j = queue.popleft()
            if labels[j] == NOISE:
                labels[j] = cluster
            if labels[j] != -2:
                continue
            labels[j] = cluster
            d2j = ((pts - pts[j]) ** 2).sum(axis=1)
            jn = np.flatnonzero(d2j <= eps2)
            if jn.size >= min_pts:
                for x in jn:
                    if (labels[x] == -2 or labels[x] == NOISE) and not queued[x]:
                        queued[x] = True
                        queue.append(int(x))
        cluster += 1
    return labels
