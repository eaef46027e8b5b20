"""Exact model Szegő kernels and the diagonal phase machinery.

Sign convention: on ``L*`` with coframe coordinate λ the circle bundle is
``X = {ρ = 0}`` for ``ρ(z, λ) = exp(φ(z))|λ|² - 1``.  The phase is

    ψ(z, λ; w, μ) = (1/i) (a(z, w) λ conj(μ) - 1),

``a`` the polarization of ``exp(φ)``.  Then ``ψ(x, x) = ρ(x)/i``,
``ψ(x, y) = -conj(ψ(y, x))`` and ``Im ψ >= 0`` on ``X × X``, and the
diagonal phase ``Ψ(t, θ) = t ψ(r_θ x, x) - θ = (t/i)(e^{iθ} - 1) - θ`` has
its only critical point at ``(t, θ) = (1, 0)`` with Hessian
``[[0, 1], [1, i]]``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import comb

import numpy as np

from .exceptions import DomainError, FourierMismatchWarning, PoleError, UnsupportedModelError
from .geometry import FlatTorus, SpherePerturbed

__all__ = [
    "PhaseValue",
    "as_ball_point",
    "ball_kernel",
    "ball_fourier",
    "ball_fourier_exact",
    "fourier_nodes",
    "phase_psi",
    "model_phase",
    "model_phase_gradient",
    "phase_hessian",
    "circle_lift",
    "FOURIER_TOLERANCE",
]

FOURIER_TOLERANCE = 1e-9


@dataclass(frozen=True)
class PhaseValue:
    """A phase value with the point it was evaluated at."""

    value: complex
    point: tuple

    def __complex__(self):
        return complex(self.value)


def as_ball_point(v, n=None):
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    if v.ndim != 1:
        raise ValueError("ball points are vectors in C^{n+1}")
    if n is not None and v.size != n + 1:
        raise ValueError(f"expected a vector in C^{n + 1}, got length {v.size}")
    if np.linalg.norm(v) > 1 + 1e-12:
        raise DomainError(f"point has norm {np.linalg.norm(v):.16g} > 1")
    return v


def _pairing(z, w):
    return complex(np.vdot(w, z))


def ball_kernel(z, w, n):
    """Szegő kernel of the unit ball in ``C^{n+1}``: ``(1 - ⟨z, w⟩)^{-(n+1)}``."""
    z = as_ball_point(z, n)
    w = as_ball_point(w, n)
    s = _pairing(z, w)
    if abs(1.0 - s) < 1e-14:
        raise PoleError("⟨z, w⟩ = 1 is the pole of the ball kernel")
    return (1.0 - s) ** (-(n + 1))


def ball_fourier_exact(N, n, s):
    """Closed form ``C(N + n, n) s^N`` of the N-th angular coefficient."""
    return comb(N + n, n) * complex(s) ** N


def fourier_nodes(N, n, s, floor=1e-14):
    """Trapezoid node count for the N-th angular coefficient.

    At least ``4(N + n) + 16``; more are added until the leading aliasing
    term ``C(N + M + n, n) |s|^{N + M}`` is below ``floor`` relative to the
    coefficient (or absolutely, for coefficients below one).
    """
    m = 4 * (N + n) + 16
    a = abs(s)
    if a == 0:
        return m
    scale = max(1.0, comb(N + n, n) * a**N)
    while comb(N + m + n, n) * a ** (N + m) > floor * scale and m < 1 << 20:
        m *= 2
    return m


def ball_fourier(N, n, z, w):
    """``(1/2π) ∫ e^{-iNθ} K(e^{iθ} z, w) dθ`` by the trapezoid rule.

    The node count comes from :func:`fourier_nodes`; differences above
    ``FOURIER_TOLERANCE`` from the binomial closed form emit
    :class:`FourierMismatchWarning`.
    """
    if N < 0:
        raise ValueError("N must be non-negative")
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    if z.size != n + 1 or w.size != n + 1:
        raise ValueError(f"expected vectors in C^{n + 1}")
    s = _pairing(z, w)
    if abs(s) >= 1:
        raise DomainError("ball_fourier needs |⟨z, w⟩| < 1")
    m = fourier_nodes(N, n, s)
    theta = 2.0 * np.pi * np.arange(m) / m
    value = complex(np.mean(np.exp(-1j * N * theta) * (1.0 - np.exp(1j * theta) * s) ** (-(n + 1))))
    exact = ball_fourier_exact(N, n, s)
    if abs(value - exact) > FOURIER_TOLERANCE:
        warnings.warn(
            f"quadrature/series mismatch {abs(value - exact):.3e} at N={N}, n={n}", FourierMismatchWarning, stacklevel=2
        )
    return value


def _check_polarizable(model):
    if not isinstance(model, (SpherePerturbed, FlatTorus)):
        raise UnsupportedModelError(f"no polarization available for {model!r}")


def phase_psi(model, z, lam, w, mu, chart=0):
    """Phase ``ψ(z, λ; w, μ) = (1/i)(a(z, w) λ conj(μ) - 1)``.

    Vectorized over broadcastable array arguments.
    """
    _check_polarizable(model)
    a = model.polarized_dual_weight(z, w, chart)
    value = (a * np.asarray(lam, dtype=complex) * np.conj(np.asarray(mu, dtype=complex)) - 1.0) / 1j
    if np.ndim(value) == 0:
        value = complex(value)
    return PhaseValue(value, (z, lam, w, mu))


def circle_lift(model, z, theta, chart=0):
    """Coframe coordinate ``λ = exp(-φ(z)/2) e^{iθ}`` of the point ``(z, θ)`` of X."""
    return np.exp(-0.5 * model.potential_values(z, chart)) * np.exp(1j * np.asarray(theta, dtype=float))


def model_phase(t, theta):
    """Diagonal phase ``Ψ(t, θ) = (t/i)(e^{iθ} - 1) - θ``; ``Im Ψ = t(1 - cos θ)``."""
    if np.any(np.asarray(t) <= 0):
        raise ValueError("t must be positive")
    value = np.asarray(t) * (np.exp(1j * np.asarray(theta)) - 1.0) / 1j - np.asarray(theta)
    if np.ndim(value) == 0:
        value = complex(value)
    return PhaseValue(value, (t, theta))


def model_phase_gradient(t, theta):
    """``(∂_t Ψ, ∂_θ Ψ) = ((e^{iθ} - 1)/i, t e^{iθ} - 1)``."""
    e = np.exp(1j * theta)
    return np.array([(e - 1.0) / 1j, t * e - 1.0])


def phase_hessian(step=1e-5, t=1.0, theta=0.0):
    """Hessian of Ψ in ``(t, θ)`` by centred differences with one Richardson step."""

    def f(a, b):
        return complex(model_phase(a, b))

    def second(h):
        H = np.empty((2, 2), dtype=complex)
        c = f(t, theta)
        H[0, 0] = (f(t + h, theta) - 2 * c + f(t - h, theta)) / h**2
        H[1, 1] = (f(t, theta + h) - 2 * c + f(t, theta - h)) / h**2
        H[0, 1] = H[1, 0] = (
            f(t + h, theta + h) - f(t + h, theta - h) - f(t - h, theta + h) + f(t - h, theta - h)
        ) / (4 * h**2)
        return H

    return (4 * second(step / 2) - second(step)) / 3
