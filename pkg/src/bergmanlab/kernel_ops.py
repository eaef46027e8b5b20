"""Bergman density, level-N Szegő kernel, Fubini–Study pullback and distortion.

All functions take an :class:`~bergmanlab.inner_product.OrthonormalTransform`
built for level ``N`` and evaluate through its weighted orthonormal values
``G_j(z) = g_j(z) exp(-Nφ(z)/2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_level, check_points
from .exceptions import BasePointError
from .geometry import ChartPoint, FlatTorus, SpherePerturbed
from .jets import log_kernel_jet

__all__ = [
    "DensityProfile",
    "PullbackForm",
    "density",
    "kernel",
    "fs_pullback",
    "distortion",
    "pullback_derivatives",
    "kahler_density_derivatives",
    "log_density_laplacian",
    "ck_error_norm",
    "evaluation_grid",
    "density_profile",
    "pullback_form",
]

FD_STEP = 1e-3


def _prepare(onb, model, N, z, chart):
    N = check_level(N)
    if onb.N != N:
        raise ValueError(f"orthonormal transform is for level {onb.N}, not {N}")
    zz, charts = check_points(z, chart)
    model.check_domain(zz, charts, cover=True)
    return N, zz, charts


def _out(z, values):
    if isinstance(z, ChartPoint) or np.ndim(z) == 0:
        return values[0]
    return values


def density(onb, model, N, z, chart=None):
    """``ρ_N(z) = Σ_j ‖S_j(z)‖²_{h_N} = exp(-Nφ) Σ_j |g_j(z)|²``."""
    N, zz, charts = _prepare(onb, model, N, z, chart)
    G = onb.weighted_values(zz, charts)
    return _out(z, np.sum(np.abs(G) ** 2, axis=1))


def kernel(onb, model, N, x, y):
    """``Π_N(x, y) = e^{iN(θ-θ')} Σ_j G_j(z) conj(G_j(w))`` for circle points."""
    N = check_level(N)
    if onb.N != N:
        raise ValueError(f"orthonormal transform is for level {onb.N}, not {N}")
    single = not isinstance(x, (list, tuple))
    xs = [x] if single else list(x)
    ys = [y] if single else list(y)
    if len(xs) != len(ys):
        raise ValueError("x and y must have the same length")
    zx = np.array([p.base.z for p in xs], dtype=complex)
    cx = np.array([p.base.chart for p in xs])
    zy = np.array([p.base.z for p in ys], dtype=complex)
    cy = np.array([p.base.chart for p in ys])
    tx = np.array([p.theta for p in xs])
    ty = np.array([p.theta for p in ys])
    Gx = onb.weighted_values(zx, cx)
    Gy = onb.weighted_values(zy, cy)
    vals = np.exp(1j * N * (tx - ty)) * np.sum(Gx * Gy.conj(), axis=1)
    return complex(vals[0]) if single else vals


def fs_pullback(onb, model, N, z, chart=None):
    """dx dy density of ``(1/N) φ_N^* ω_FS``.

    ``(A C - |B|²) / (π N A²)`` with ``A = Σ|g|²``, ``B = Σ g' conj(g)``,
    ``C = Σ|g'|²``; a common per-point scale of the ``g`` cancels, so the
    weighted values are used directly.
    """
    N, zz, charts = _prepare(onb, model, N, z, chart)
    D = onb.weighted_derivatives(zz, charts, 1)
    g, dg = D[0], D[1]
    A = np.sum(np.abs(g) ** 2, axis=1)
    if np.any(A <= 0):
        raise BasePointError("all sections vanish at an evaluation point")
    B = np.sum(dg * g.conj(), axis=1)
    C = np.sum(np.abs(dg) ** 2, axis=1)
    return _out(z, (A * C - np.abs(B) ** 2) / (np.pi * N * A * A))


def distortion(onb_G, model, N, z, chart=None):
    """``1/ρ_N^G(z)`` for a transform built with background metric G."""
    return 1.0 / density(onb_G, model, N, z, chart)


def _log_kernel_jet(onb, z, charts, order):
    return log_kernel_jet(onb.weighted_derivatives(z, charts, order))


def pullback_derivatives(onb, model, N, z, charts=0, k=2):
    """``{(a, b): ∂^a ∂̄^b}`` of the pullback density for ``a + b <= k``.

    Exact expressions from the jet of ``log Σ g_j(z) conj(g_j(ζ))``.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    L = _log_kernel_jet(onb, z, charts, k + 1)
    return {
        (a, b): (L.derivative(1 + a, 1 + b) / (np.pi * N)).real if a == b else L.derivative(1 + a, 1 + b) / (np.pi * N)
        for a in range(k + 1)
        for b in range(k + 1 - a)
    }


def kahler_density_derivatives(model, z, charts=0, k=2):
    """``{(a, b): ∂^a ∂̄^b (φ_{zz̄}/π)}`` for ``a + b <= k``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    J = model.potential_jet(z, charts, k + 1)
    return {
        (a, b): (J.derivative(1 + a, 1 + b) / np.pi).real if a == b else J.derivative(1 + a, 1 + b) / np.pi
        for a in range(k + 1)
        for b in range(k + 1 - a)
    }


def log_density_laplacian(onb, model, N, z, charts=0):
    """``∂∂̄ log ρ_N`` (the correction term relating the pullback to ω_g)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    L = _log_kernel_jet(onb, z, charts, 1)
    return (L.derivative(1, 1) - N * model.laplacian(z, charts)).real


def _error_fields(onb, model, N, z, charts, k):
    pb = pullback_derivatives(onb, model, N, z, charts, k)
    kd = kahler_density_derivatives(model, z, charts, k)
    return {ab: pb[ab] - kd[ab] for ab in pb}


def ck_error_norm(onb, model, N, z, charts=0, k=0, step=FD_STEP):
    """Grid ``C^k`` norm of ``(1/N)φ_N^*ω_FS - ω_g`` (dx dy densities).

    ``max_{a+b<=k} max_grid |∂^a ∂̄^b (error)|``.  Orders up to 2 use the
    exact jet expressions; order 3 differentiates the exact order-2 fields
    by centred differences (steps h and h/2) with one Richardson step.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    charts = np.broadcast_to(np.asarray(charts), z.shape)
    if k < 0 or k > 3:
        raise ValueError("C^k norms are available for 0 <= k <= 3")
    fields = _error_fields(onb, model, N, z, charts, min(k, 2))
    norm = max(float(np.max(np.abs(v))) for v in fields.values())
    if k == 3:
        for a in range(3):
            b = 2 - a

            def field(zz, a=a, b=b):
                return _error_fields(onb, model, N, zz, charts, 2)[(a, b)]

            dx, dy = _richardson_gradient(field, z, step)
            d_z = 0.5 * (dx - 1j * dy)
            d_zbar = 0.5 * (dx + 1j * dy)
            norm = max(norm, float(np.max(np.abs(d_z))), float(np.max(np.abs(d_zbar))))
    return norm


def _richardson_gradient(f, z, h):
    def central(hh):
        return (f(z + hh) - f(z - hh)) / (2 * hh), (f(z + 1j * hh) - f(z - 1j * hh)) / (2 * hh)

    dx1, dy1 = central(h)
    dx2, dy2 = central(h / 2)
    return (4 * dx2 - dx1) / 3, (4 * dy2 - dy1) / 3


def evaluation_grid(model, points=None, radius=3.0, mirror=True):
    """Fixed evaluation grid.

    Sphere: ``points × points`` tensor grid on ``[-radius, radius]²`` in
    chart 0 plus, if ``mirror``, the same coordinates in chart 1.  Torus:
    ``points × points`` grid over the fundamental parallelogram.
    """
    if isinstance(model, SpherePerturbed):
        points = 41 if points is None else int(points)
        g = np.linspace(-radius, radius, points)
        X, Y = np.meshgrid(g, g, indexing="ij")
        z = (X + 1j * Y).ravel()
        charts = np.zeros(z.shape, dtype=np.int64)
        if mirror:
            z = np.concatenate([z, z])
            charts = np.concatenate([charts, np.ones_like(charts)])
        return z, charts
    if isinstance(model, FlatTorus):
        points = 32 if points is None else int(points)
        g = np.arange(points) / points
        A, B = np.meshgrid(g, g, indexing="ij")
        z = (A + B * model.tau).ravel()
        return z, np.zeros(z.shape, dtype=np.int64)
    raise TypeError(f"unsupported model {model!r}")


@dataclass(frozen=True, eq=False)
class DensityProfile:
    """Sampled ``ρ_N`` over a grid."""

    N: int
    z: np.ndarray
    charts: np.ndarray
    values: np.ndarray

    def to_rows(self):
        return [
            (self.N, int(c), float(zz.real), float(zz.imag), float(v))
            for c, zz, v in zip(self.charts, self.z, self.values)
        ]


@dataclass(frozen=True, eq=False)
class PullbackForm:
    """Sampled dx dy density of ``(1/N) φ_N^* ω_FS``."""

    N: int
    z: np.ndarray
    charts: np.ndarray
    values: np.ndarray

    def to_rows(self):
        return DensityProfile.to_rows(self)


def density_profile(onb, model, N, z, charts):
    z = np.asarray(z, dtype=complex)
    charts = np.asarray(charts, dtype=np.int64)
    values = density(onb, model, N, np.column_stack([z.real, z.imag, charts]))
    return DensityProfile(N, z, charts, values)


def pullback_form(onb, model, N, z, charts):
    z = np.asarray(z, dtype=complex)
    charts = np.asarray(charts, dtype=np.int64)
    values = fs_pullback(onb, model, N, np.column_stack([z.real, z.imag, charts]))
    return PullbackForm(N, z, charts, values)
