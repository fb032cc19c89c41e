"""Kernel backend selection: compiled extension with pure-Python fallback.

The compiled extension (``_native``) is used when importable; set
``SHELFPLAN_PURE_KERNELS=1`` to force the pure backend. Both backends
implement identical semantics and are interchangeable.
"""

from __future__ import annotations

import os

from . import pure

try:
    from . import _native
except ImportError:
    _native = None

_force_pure = os.environ.get("SHELFPLAN_PURE_KERNELS", "").strip() not in ("", "0")
_backend = pure if _force_pure or _native is None else _native

NOISE = pure.NOISE
SHELF_IDX = pure.SHELF_IDX

box_patches = _backend.box_patches
settle_cascade = _backend.settle_cascade
probe_all = _backend.probe_all
dbscan_labels = _backend.dbscan_labels


def active_backend() -> str:
    """Name of the backend in use: ``"native"`` or ``"pure"``."""
    return "pure" if _backend is pure else "native"


def native_available() -> bool:
    return _native is not None
