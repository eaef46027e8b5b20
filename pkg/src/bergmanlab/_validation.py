"""Input validation helpers shared by the functional and estimator APIs."""

from __future__ import annotations

import numbers

import numpy as np


def check_points(X, chart=None):
    """Coerce point input to ``(z, charts)`` arrays.

    Accepted forms: a :class:`~bergmanlab.geometry.ChartPoint`, a sequence of
    them, a complex scalar or 1-D array, or a real array of shape
    ``(n, 2)`` (columns re, im) or ``(n, 3)`` (re, im, chart id).

    ``chart`` (scalar or one id per point) overrides any ids in the input.
    Returned arrays are 1-D: ``z`` complex128, ``charts`` int64.
    """
    from .geometry import ChartPoint

    if isinstance(X, ChartPoint):
        return np.array([X.z], dtype=complex), np.array([X.chart], dtype=np.int64)
    if isinstance(X, (list, tuple)) and X and all(isinstance(p, ChartPoint) for p in X):
        z = np.array([p.z for p in X], dtype=complex)
        charts = np.array([p.chart for p in X], dtype=np.int64)
        return z, charts

    arr = np.asarray(X)
    if arr.dtype == object:
        raise TypeError("point input must be numeric")
    if np.iscomplexobj(arr) or arr.ndim <= 1:
        z = np.atleast_1d(arr).astype(complex).ravel()
        charts = None
    elif arr.ndim == 2 and arr.shape[1] in (2, 3):
        arr = arr.astype(float)
        z = arr[:, 0] + 1j * arr[:, 1]
        charts = arr[:, 2].astype(np.int64) if arr.shape[1] == 3 else None
        if arr.shape[1] == 3 and not np.all(arr[:, 2] == charts):
            raise ValueError("chart ids must be integers")
    else:
        raise ValueError(f"expected complex points or an (n, 2)/(n, 3) real array, got shape {arr.shape}")

    if not np.all(np.isfinite(z)):
        raise ValueError("points must be finite")
    if chart is not None:
        c = np.asarray(chart)
        if not np.all(c == np.round(c)):
            raise ValueError("chart ids must be integers")
        try:
            charts = np.broadcast_to(c.astype(np.int64).ravel() if c.ndim else c.astype(np.int64), z.shape).copy()
        except ValueError as exc:
            raise ValueError(f"chart ids of shape {c.shape} do not match {z.size} points") from exc
    elif charts is None:
        charts = np.zeros(z.shape, dtype=np.int64)
    return z, charts


def check_level(N, minimum=1):
    if isinstance(N, bool) or not isinstance(N, numbers.Integral):
        raise TypeError(f"level must be an integer, got {type(N).__name__}")
    if N < minimum:
        raise ValueError(f"level must be >= {minimum}, got {N}")
    return int(N)


def check_levels(levels, strictly_increasing=False):
    out = [check_level(N) for N in levels]
    if len(set(out)) != len(out):
        raise ValueError("levels must be distinct")
    if strictly_increasing and any(b <= a for a, b in zip(out, out[1:])):
        raise ValueError("levels must be strictly increasing")
    return out


def check_positive(value, name):
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value}")
    return value
