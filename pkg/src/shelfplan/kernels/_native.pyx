# cython: language_level=3
# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: support-cascade settling and density clustering.

Direct transliteration of ``pure.py``; the two backends are interchangeable
and must produce identical output on identical input (enforced by the
kernel parity tests). All floating-point expressions mirror the pure
versions operation for operation.
"""

from libc.math cimport fabs, sqrt
from libc.stdlib cimport free, malloc, qsort
from libc.string cimport memset

import numpy as np

cimport numpy as cnp

NOISE = -1
SHELF_IDX = -1


cdef struct PatchSet:
    Py_ssize_t n
    Py_ssize_t total
    Py_ssize_t max_per_box
    Py_ssize_t* indptr
    Py_ssize_t* sup
    double* rect


cdef void _free_patches(PatchSet* ps) noexcept:
    if ps.indptr != NULL:
        free(ps.indptr)
    if ps.sup != NULL:
        free(ps.sup)
    if ps.rect != NULL:
        free(ps.rect)


cdef int _build_patches(const double[:, ::1] centers, const double[:, ::1] dims,
                        double eps_z, double eps_a, double shelf_w, double shelf_d,
                        PatchSet* ps) except -1:
    cdef Py_ssize_t n = centers.shape[0]
    cdef Py_ssize_t a, b, k
    cdef double bx0, bx1, by0, by1, bot, top, x0, x1, y0, y1

    ps.n = n
    ps.indptr = <Py_ssize_t*> malloc((n + 1) * sizeof(Py_ssize_t))
    if ps.indptr == NULL:
        raise MemoryError()
    ps.sup = NULL
    ps.rect = NULL

    # counting pass
    ps.indptr[0] = 0
    for b in range(n):
        k = 0
        bx0 = centers[b, 0] - dims[b, 0] * 0.5
        bx1 = centers[b, 0] + dims[b, 0] * 0.5
        by0 = centers[b, 1] - dims[b, 1] * 0.5
        by1 = centers[b, 1] + dims[b, 1] * 0.5
        bot = centers[b, 2] - dims[b, 2] * 0.5
        if fabs(bot) <= eps_z:
            x0 = max(bx0, 0.0)
            x1 = min(bx1, shelf_w)
            y0 = max(by0, 0.0)
            y1 = min(by1, shelf_d)
            if x1 > x0 and y1 > y0 and (x1 - x0) * (y1 - y0) > eps_a:
                k += 1
        for a in range(n):
            if a == b:
                continue
            top = centers[a, 2] + dims[a, 2] * 0.5
            if fabs(bot - top) > eps_z:
                continue
            x0 = max(bx0, centers[a, 0] - dims[a, 0] * 0.5)
            x1 = min(bx1, centers[a, 0] + dims[a, 0] * 0.5)
            y0 = max(by0, centers[a, 1] - dims[a, 1] * 0.5)
            y1 = min(by1, centers[a, 1] + dims[a, 1] * 0.5)
            if x1 > x0 and y1 > y0 and (x1 - x0) * (y1 - y0) > eps_a:
                k += 1
        ps.indptr[b + 1] = ps.indptr[b] + k

    ps.total = ps.indptr[n]
    ps.max_per_box = 0
    for b in range(n):
        if ps.indptr[b + 1] - ps.indptr[b] > ps.max_per_box:
            ps.max_per_box = ps.indptr[b + 1] - ps.indptr[b]
    ps.sup = <Py_ssize_t*> malloc(max(ps.total, 1) * sizeof(Py_ssize_t))
    ps.rect = <double*> malloc(max(ps.total, 1) * 4 * sizeof(double))
    if ps.sup == NULL or ps.rect == NULL:
        _free_patches(ps)
        raise MemoryError()

    # fill pass
    for b in range(n):
        k = ps.indptr[b]
        bx0 = centers[b, 0] - dims[b, 0] * 0.5
        bx1 = centers[b, 0] + dims[b, 0] * 0.5
        by0 = centers[b, 1] - dims[b, 1] * 0.5
        by1 = centers[b, 1] + dims[b, 1] * 0.5
        bot = centers[b, 2] - dims[b, 2] * 0.5
        if fabs(bot) <= eps_z:
            x0 = max(bx0, 0.0)
            x1 = min(bx1, shelf_w)
            y0 = max(by0, 0.0)
            y1 = min(by1, shelf_d)
            if x1 > x0 and y1 > y0 and (x1 - x0) * (y1 - y0) > eps_a:
                ps.sup[k] = -1
                ps.rect[4 * k] = x0
                ps.rect[4 * k + 1] = y0
                ps.rect[4 * k + 2] = x1
                ps.rect[4 * k + 3] = y1
                k += 1
        for a in range(n):
            if a == b:
                continue
            top = centers[a, 2] + dims[a, 2] * 0.5
            if fabs(bot - top) > eps_z:
                continue
            x0 = max(bx0, centers[a, 0] - dims[a, 0] * 0.5)
            x1 = min(bx1, centers[a, 0] + dims[a, 0] * 0.5)
            y0 = max(by0, centers[a, 1] - dims[a, 1] * 0.5)
            y1 = min(by1, centers[a, 1] + dims[a, 1] * 0.5)
            if x1 > x0 and y1 > y0 and (x1 - x0) * (y1 - y0) > eps_a:
                ps.sup[k] = a
                ps.rect[4 * k] = x0
                ps.rect[4 * k + 1] = y0
                ps.rect[4 * k + 2] = x1
                ps.rect[4 * k + 3] = y1
                k += 1
    return 0


cdef int _cmp_pair(const void* pa, const void* pb) noexcept nogil:
    cdef const double* a = <const double*> pa
    cdef const double* b = <const double*> pb
    if a[0] < b[0]:
        return -1
    if a[0] > b[0]:
        return 1
    if a[1] < b[1]:
        return -1
    if a[1] > b[1]:
        return 1
    return 0


cdef inline double _cross(double ox, double oy, double ax, double ay,
                          double bx, double by) noexcept nogil:
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


cdef bint _segment_contains(double x0, double y0, double x1, double y1,
                            double px, double py, double margin) noexcept nogil:
    cdef double dot
    if margin > 0.0:
        return False
    if _cross(x0, y0, x1, y1, px, py) != 0.0:
        return False
    dot = (px - x0) * (x1 - x0) + (py - y0) * (y1 - y0)
    return 0.0 <= dot <= (x1 - x0) * (x1 - x0) + (y1 - y0) * (y1 - y0)


cdef bint _point_in_corner_hull(double* corners, Py_ssize_t m, double px, double py,
                                double margin, double* lower, double* upper) noexcept nogil:
    """Sorts ``corners`` in place, builds the hull, tests containment."""
    cdef Py_ssize_t i, lo, up, h, nxt
    cdef double cx, cy, x0, y0, x1, y1, cr, ex, ey

    if m == 0:
        return False
    qsort(corners, m, 2 * sizeof(double), _cmp_pair)
    if m == 1:
        return margin <= 0.0 and px == corners[0] and py == corners[1]
    if m == 2:
        return _segment_contains(corners[0], corners[1], corners[2], corners[3],
                                 px, py, margin)

    lo = 0
    for i in range(m):
        cx = corners[2 * i]
        cy = corners[2 * i + 1]
        while lo >= 2 and _cross(lower[2 * (lo - 2)], lower[2 * (lo - 2) + 1],
                                 lower[2 * (lo - 1)], lower[2 * (lo - 1) + 1],
                                 cx, cy) <= 0.0:
            lo -= 1
        lower[2 * lo] = cx
        lower[2 * lo + 1] = cy
        lo += 1
    up = 0
    for i in range(m - 1, -1, -1):
        cx = corners[2 * i]
        cy = corners[2 * i + 1]
        while up >= 2 and _cross(upper[2 * (up - 2)], upper[2 * (up - 2) + 1],
                                 upper[2 * (up - 1)], upper[2 * (up - 1) + 1],
                                 cx, cy) <= 0.0:
            up -= 1
        upper[2 * up] = cx
        upper[2 * up + 1] = cy
        up += 1

    # hull = lower[:-1] + upper[:-1]
    h = (lo - 1) + (up - 1)
    if h == 2:
        return _segment_contains(lower[0], lower[1], upper[0], upper[1], px, py, margin)
    for i in range(h):
        if i < lo - 1:
            x0 = lower[2 * i]
            y0 = lower[2 * i + 1]
        else:
            x0 = upper[2 * (i - (lo - 1))]
            y0 = upper[2 * (i - (lo - 1)) + 1]
        nxt = (i + 1) % h
        if nxt < lo - 1:
            x1 = lower[2 * nxt]
            y1 = lower[2 * nxt + 1]
        else:
            x1 = upper[2 * (nxt - (lo - 1))]
            y1 = upper[2 * (nxt - (lo - 1)) + 1]
        cr = _cross(x0, y0, x1, y1, px, py)
        if margin == 0.0:
            if cr < 0.0:
                return False
        else:
            ex = x1 - x0
            ey = y1 - y0
            if cr < margin * sqrt(ex * ex + ey * ey):
                return False
    return True


cdef list _cascade(PatchSet* ps, const double[:, ::1] centers, const cnp.int64_t[::1] id_rank,
                   unsigned char* act, double margin):
    cdef Py_ssize_t n = ps.n
    cdef Py_ssize_t b, i, j, k, m, u, key
    cdef Py_ssize_t cap = 4 * ps.max_per_box
    cdef double kz
    cdef cnp.int64_t kr
    cdef bint ok
    cdef double* corners = <double*> malloc(max(cap, 1) * 2 * sizeof(double))
    cdef double* lower = <double*> malloc((max(cap, 1) + 1) * 2 * sizeof(double))
    cdef double* upper = <double*> malloc((max(cap, 1) + 1) * 2 * sizeof(double))
    cdef Py_ssize_t* unstable = <Py_ssize_t*> malloc(max(n, 1) * sizeof(Py_ssize_t))
    order = []
    if corners == NULL or lower == NULL or upper == NULL or unstable == NULL:
        if corners != NULL:
            free(corners)
        if lower != NULL:
            free(lower)
        if upper != NULL:
            free(upper)
        if unstable != NULL:
            free(unstable)
        raise MemoryError()
    try:
        while True:
            u = 0
            for b in range(n):
                if not act[b]:
                    continue
                m = 0
                for k in range(ps.indptr[b], ps.indptr[b + 1]):
                    if ps.sup[k] == -1 or act[ps.sup[k]]:
                        corners[2 * m] = ps.rect[4 * k]
                        corners[2 * m + 1] = ps.rect[4 * k + 1]
                        corners[2 * m + 2] = ps.rect[4 * k + 2]
                        corners[2 * m + 3] = ps.rect[4 * k + 1]
                        corners[2 * m + 4] = ps.rect[4 * k + 2]
                        corners[2 * m + 5] = ps.rect[4 * k + 3]
                        corners[2 * m + 6] = ps.rect[4 * k]
                        corners[2 * m + 7] = ps.rect[4 * k + 3]
                        m += 4
                ok = _point_in_corner_hull(corners, m, centers[b, 0], centers[b, 1],
                                           margin, lower, upper)
                if not ok:
                    unstable[u] = b
                    u += 1
            if u == 0:
                break
            # insertion sort by (z_center, id_rank)
            for i in range(1, u):
                key = unstable[i]
                kz = centers[key, 2]
                kr = id_rank[key]
                j = i - 1
                while j >= 0 and (centers[unstable[j], 2] > kz or
                                  (centers[unstable[j], 2] == kz and id_rank[unstable[j]] > kr)):
                    unstable[j + 1] = unstable[j]
                    j -= 1
                unstable[j + 1] = key
            for i in range(u):
                act[unstable[i]] = 0
                order.append(unstable[i])
    finally:
        free(corners)
        free(lower)
        free(upper)
        free(unstable)
    return order


def box_patches(const double[:, ::1] centers, const double[:, ::1] dims,
                double eps_z, double eps_a, double shelf_w, double shelf_d):
    """Support patches per box; same structure as the pure backend."""
    cdef PatchSet ps
    cdef Py_ssize_t b, k
    _build_patches(centers, dims, eps_z, eps_a, shelf_w, shelf_d, &ps)
    try:
        out = []
        for b in range(ps.n):
            row = []
            for k in range(ps.indptr[b], ps.indptr[b + 1]):
                row.append((ps.sup[k], ps.rect[4 * k], ps.rect[4 * k + 1],
                            ps.rect[4 * k + 2], ps.rect[4 * k + 3]))
            out.append(row)
        return out
    finally:
        _free_patches(&ps)


def settle_cascade(const double[:, ::1] centers, const double[:, ::1] dims,
                   const cnp.int64_t[::1] id_rank, const unsigned char[::1] active,
                   double eps_z, double eps_a, double margin,
                   double shelf_w, double shelf_d):
    """Collapse order among active boxes after the inactive ones vanish."""
    cdef PatchSet ps
    cdef Py_ssize_t n = centers.shape[0]
    cdef Py_ssize_t i
    cdef unsigned char* act = <unsigned char*> malloc(max(n, 1))
    if act == NULL:
        raise MemoryError()
    _build_patches(centers, dims, eps_z, eps_a, shelf_w, shelf_d, &ps)
    try:
        for i in range(n):
            act[i] = active[i]
        return _cascade(&ps, centers, id_rank, act, margin)
    finally:
        free(act)
        _free_patches(&ps)


def probe_all(const double[:, ::1] centers, const double[:, ::1] dims,
              const cnp.int64_t[::1] id_rank, double eps_z, double eps_a, double margin,
              double shelf_w, double shelf_d):
    """Collapse order for each single-box removal, sharing one contact pass."""
    cdef PatchSet ps
    cdef Py_ssize_t n = centers.shape[0]
    cdef Py_ssize_t i, removed
    cdef unsigned char* act = <unsigned char*> malloc(max(n, 1))
    if act == NULL:
        raise MemoryError()
    _build_patches(centers, dims, eps_z, eps_a, shelf_w, shelf_d, &ps)
    try:
        out = []
        for removed in range(n):
            for i in range(n):
                act[i] = 1
            act[removed] = 0
            out.append(_cascade(&ps, centers, id_rank, act, margin))
        return out
    finally:
        free(act)
        _free_patches(&ps)


def dbscan_labels(points, double eps, Py_ssize_t min_pts):
    """Density-based cluster labels; ``NOISE`` for unclustered points."""
    pts_arr = np.ascontiguousarray(np.asarray(points, dtype=np.float64).reshape(-1, 3))
    cdef double[:, ::1] p = pts_arr
    cdef Py_ssize_t n = p.shape[0]
    labels_arr = np.full(n, -2, dtype=np.int64)
    cdef cnp.int64_t[::1] labels = labels_arr
    cdef Py_ssize_t i, j, k, count, head, tail
    cdef cnp.int64_t cluster = 0
    cdef double eps2 = eps * eps
    cdef double dx, dy, dz, d2
    cdef Py_ssize_t* queue
    cdef Py_ssize_t* neigh
    cdef unsigned char* enqueued
    if n == 0:
        return labels_arr
    queue = <Py_ssize_t*> malloc(n * sizeof(Py_ssize_t))
    neigh = <Py_ssize_t*> malloc(n * sizeof(Py_ssize_t))
    enqueued = <unsigned char*> malloc(n)
    if queue == NULL or neigh == NULL or enqueued == NULL:
        if queue != NULL:
            free(queue)
        if neigh != NULL:
            free(neigh)
        if enqueued != NULL:
            free(enqueued)
        raise MemoryError()
    memset(enqueued, 0, n)
    try:
        for i in range(n):
            if labels[i] != -2:
                continue
            count = 0
            for k in range(n):
                dx = p[k, 0] - p[i, 0]
                dy = p[k, 1] - p[i, 1]
                dz = p[k, 2] - p[i, 2]
                d2 = dx * dx + dy * dy + dz * dz
                if d2 <= eps2:
                    neigh[count] = k
                    count += 1
            if count < min_pts:
                labels[i] = -1
                continue
            labels[i] = cluster
            head = 0
            tail = 0
            for k in range(count):
                # a flagged point was drained by an earlier cluster and is
                # already labeled, so skipping it cannot change any label
                if neigh[k] != i and not enqueued[neigh[k]]:
                    queue[tail] = neigh[k]
                    enqueued[neigh[k]] = 1
                    tail += 1
            while head < tail:
                j = queue[head]
                head += 1
                if labels[j] == -1:
                    labels[j] = cluster
                if labels[j] != -2:
                    continue
                labels[j] = cluster
                count = 0
                for k in range(n):
                    dx = p[k, 0] - p[j, 0]
                    dy = p[k, 1] - p[j, 1]
                    dz = p[k, 2] - p[j, 2]
                    d2 = dx * dx + dy * dy + dz * dz
                    if d2 <= eps2:
                        neigh[count] = k
                        count += 1
                if count >= min_pts:
                    for k in range(count):
                        if (labels[neigh[k]] == -2 or labels[neigh[k]] == -1) and not enqueued[neigh[k]]:
                            queue[tail] = neigh[k]
                            enqueued[neigh[k]] = 1
                            tail += 1
            # flags are only meaningful within one expansion; every queued
            # point now carries a label, so they can stay set
            cluster += 1
    finally:
        free(queue)
        free(neigh)
        free(enqueued)
    return labels_arr
