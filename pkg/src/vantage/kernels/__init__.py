"""Kernel backend selection.

Two interchangeable implementations of the hot geometry kernels exist:
a numba JIT backend (default) and a pure-numpy fallback. Set
VANTAGE_NUMBA=0 to force the numpy path; if numba is unavailable the
fallback is selected automatically. The choice is re-read on every
call so tests can flip backends per subprocess or per test.
"""

from __future__ import annotations

import os

from . import numpy_impl

_FALSEY = {"0", "false", "no", "off"}

_numba_impl = None
_numba_error: Exception | None = None


def _load_numba():
    global _numba_impl, _numba_error
    if _numba_impl is None and _numba_error is None:
        try:
            from . import numba_impl
            _numba_impl = numba_impl
        except Exception as exc:  # pragma: no cover - numba always present in CI
            _numba_error = exc
    return _numba_impl


def active():
    """Return the currently selected backend module."""
    flag = os.environ.get("VANTAGE_NUMBA", "1").strip().lower()
    if flag in _FALSEY:
        return numpy_impl
    impl = _load_numba()
    return impl if impl is not None else numpy_impl


def backend_name() -> str:
    return active().BACKEND_NAME


def traverse_bundle(origins, dirs, t_max, g0, edge, dims):
    return active().traverse_bundle(origins, dirs, t_max, g0, edge, dims)


def first_hits(origins, dirs, t_max, boxes):
    return active().first_hits(origins, dirs, t_max, boxes)


def first_hits_from(origin, dirs, t_max, boxes):
    return active().first_hits_from(origin, dirs, t_max, boxes)


def rasterize_frames(frame_ptr, boxes, g0, edge, dims, counts):
    return active().rasterize_frames(frame_ptr, boxes, g0, edge, dims, counts)


def occlusion_scan(inv_ptr, inv_ray, inv_t, thresh, freq):
    return active().occlusion_scan(inv_ptr, inv_ray, inv_t, thresh, freq)
