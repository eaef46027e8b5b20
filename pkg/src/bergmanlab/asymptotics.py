"""Fitting ``Σ_j a_j N^{n-j}`` to level sweeps and measuring decay rates."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_levels
from .exceptions import IllConditionedFitError

__all__ = ["ExpansionFit", "fit_expansion", "convergence_rate", "MAX_DESIGN_CONDITION"]

MAX_DESIGN_CONDITION = 1e10


@dataclass(frozen=True, eq=False)
class ExpansionFit:
    """Least-squares coefficients of ``value/N^n ≈ Σ_{j<R} a_j N^{-j}``.

    ``coefficients`` has shape ``(R,)`` for scalar samples or ``(R, P)``
    when every level carries ``P`` grid values.
    """

    n: int
    R: int
    coefficients: np.ndarray
    residual_max: float
    levels: tuple
    residuals: np.ndarray = field(repr=False)

    @property
    def a0(self):
        return self.coefficients[0]

    def predict(self, levels):
        N = np.asarray(levels, dtype=float)
        V = (1.0 / N[:, None]) ** np.arange(self.R)
        return (V @ self.coefficients) * (N ** self.n).reshape((-1,) + (1,) * (self.coefficients.ndim - 1))

    def to_record(self, **extra):
        a = np.asarray(self.coefficients)
        return {
            **extra,
            "n": self.n,
            "R": self.R,
            "a": a.tolist(),
            "residual_max": float(self.residual_max),
            "N_range": list(self.levels),
        }


def fit_expansion(samples, n=1, R=3):
    """Fit the asymptotic expansion to ``{N: value}``.

    Values may be scalars or equal-length arrays (one fit per component).
    Requires at least ``R + 2`` distinct levels with the largest ``>= 4R``;
    raises :class:`IllConditionedFitError` if the design matrix in
    ``x = 1/N`` has condition number above ``MAX_DESIGN_CONDITION``.
    """
    if not isinstance(samples, Mapping):
        raise TypeError("samples must map level -> value")
    R = int(R)
    if R < 1:
        raise ValueError("R must be >= 1")
    levels = sorted(check_levels(list(samples)))
    if len(levels) < R + 2:
        raise ValueError(f"need at least R + 2 = {R + 2} distinct levels, got {len(levels)}")
    if levels[-1] < 4 * R:
        raise ValueError(f"largest level must be >= 4R = {4 * R}, got {levels[-1]}")

    N = np.array(levels, dtype=float)
    Y = np.array([np.asarray(samples[k], dtype=float) for k in levels])
    V = (1.0 / N[:, None]) ** np.arange(R)
    cond = np.linalg.cond(V)
    if not cond < MAX_DESIGN_CONDITION:
        raise IllConditionedFitError(f"design matrix condition {cond:.3e}; levels too clustered")
    scale = (N**n).reshape((-1,) + (1,) * (Y.ndim - 1))
    coef, *_ = np.linalg.lstsq(V, Y / scale, rcond=None)
    residuals = Y - (V @ coef) * scale
    return ExpansionFit(int(n), R, coef, float(np.max(np.abs(residuals))), tuple(levels), residuals)


def convergence_rate(errors):
    """Least-squares slope of ``log(error)`` against ``log(N)``.

    A zero error (exact agreement) returns ``-inf``.
    """
    if not isinstance(errors, Mapping):
        raise TypeError("errors must map level -> error")
    levels = sorted(check_levels(list(errors)))
    if len(levels) < 4:
        raise ValueError(f"need at least 4 levels, got {len(levels)}")
    e = np.array([float(errors[k]) for k in levels])
    if np.any(e < 0) or not np.all(np.isfinite(e)):
        raise ValueError("errors must be finite and non-negative")
    if np.any(e == 0):
        return float("-inf")
    slope, _ = np.polyfit(np.log(levels), np.log(e), 1)
    return float(slope)
