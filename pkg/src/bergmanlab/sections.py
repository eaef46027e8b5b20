"""Holomorphic section bases of L^N and their lifts to the circle bundle X.

A section ``S = f e_L^N`` lifts to ``ŝ(z, θ) = f(z) exp(-Nφ(z)/2) exp(iNθ)``
in the unitary-frame coordinates ``(z, θ)``; ``|ŝ|²`` is the pointwise norm
``‖S(z)‖²_{h_N}``.  Evaluators return *weighted* values (the factor
``exp(-Nφ/2)`` included), computed in log space so that large levels never
overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from ._validation import check_level, check_points
from .exceptions import UnsupportedModelError
from .geometry import ChartPoint, FlatTorus, SpherePerturbed

__all__ = [
    "CirclePoint",
    "SectionBasis",
    "MonomialBasis",
    "ThetaBasis",
    "BasisElement",
    "basis",
    "lift_value",
    "rotate",
]

_TWO_PI = 2.0 * np.pi
# Gaussian exponent beyond which theta-series terms are dropped (e^-50 ~ 2e-22)
_THETA_TAIL_EXPONENT = 50.0


@dataclass(frozen=True)
class CirclePoint:
    """A point ``(z, θ)`` of the circle bundle; θ is reduced modulo 2π."""

    base: ChartPoint
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta) % _TWO_PI)


def rotate(x, theta):
    """The circle action ``r_θ x``."""
    return CirclePoint(x.base, x.theta + theta)


class SectionBasis:
    """Raw (not orthonormalized) basis of H⁰(M, L^N)."""

    def __init__(self, model, N):
        self.model = model
        self.N = check_level(N)

    @property
    def dim(self):
        return self.model.section_count(self.N)

    def __len__(self):
        return self.dim

    def weighted_derivatives(self, z, charts=0, order=0):
        """Array ``(order + 1, n_points, dim)`` of ``f_i^{(p)}(z) exp(-Nφ(z)/2)``."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        charts = np.broadcast_to(np.asarray(charts, dtype=np.int64), z.shape)
        out = np.empty((order + 1,) + z.shape + (self.dim,), dtype=complex)
        for c in np.unique(charts):
            mask = charts == c
            out[:, mask] = self._weighted_derivatives(z[mask], int(c), order)
        return out

    def weighted_values(self, z, charts=0):
        return self.weighted_derivatives(z, charts, 0)[0]

    def values(self, z, charts=0):
        """Raw holomorphic coefficient functions ``f_i(z)``."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        weight = np.exp(0.5 * self.N * self.model.potential_values(z, charts))
        return self.weighted_values(z, charts) * weight[:, None]

    def derivatives(self, z, charts=0, order=1):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        weight = np.exp(0.5 * self.N * self.model.potential_values(z, charts))
        return self.weighted_derivatives(z, charts, order) * weight[None, :, None]

    def element(self, i):
        if not 0 <= i < self.dim:
            raise IndexError(f"basis index {i} out of range for dim {self.dim}")
        return BasisElement(self, i)

    def __iter__(self):
        return (self.element(i) for i in range(self.dim))

    def _weighted_derivatives(self, z, chart, order):
        raise NotImplementedError


class MonomialBasis(SectionBasis):
    """``z^k``, ``k = 0..N`` on the sphere model (``w^{N-k}`` in chart 1).

    With ``prescaled=True`` each monomial is multiplied by its exact
    Fubini–Study normalization ``sqrt((N + 1) C(N, k))``.
    """

    def __init__(self, model, N, prescaled=False):
        if not isinstance(model, SpherePerturbed):
            raise UnsupportedModelError("monomial basis requires the sphere model")
        super().__init__(model, N)
        self.prescaled = bool(prescaled)
        k = np.arange(self.N + 1)
        if self.prescaled:
            self.log_scales = 0.5 * (np.log(self.N + 1) + gammaln(self.N + 1) - gammaln(k + 1) - gammaln(self.N - k + 1))
        else:
            self.log_scales = np.zeros(self.N + 1)

    def exponents(self, chart):
        k = np.arange(self.N + 1)
        return k if chart == 0 else self.N - k

    def _weighted_derivatives(self, z, chart, order):
        e = self.exponents(chart)
        with np.errstate(divide="ignore"):
            log_r = np.log(np.abs(z))[:, None]
        arg = np.angle(z)[:, None]
        half_weight = (-0.5 * self.N * self.model.potential_values(z, chart))[:, None]
        out = np.zeros((order + 1, z.size, e.size), dtype=complex)
        for p in range(order + 1):
            live = e >= p
            ep = (e - p)[live]
            with np.errstate(divide="ignore", invalid="ignore"):
                log_pow = np.where(ep == 0, 0.0, ep * log_r)
            log_mag = self.log_scales[live] + gammaln(e[live] + 1) - gammaln(ep + 1) + log_pow + half_weight
            out[p][:, live] = np.exp(log_mag + 1j * ep * arg)
        return out


class ThetaBasis(SectionBasis):
    """Level-N theta functions on the flat torus.

    ``θ_j(z) = Σ_{n ≡ j mod N} exp(πiτn²/N + 2πinz)``, ``j = 0..N-1``, with
    ``θ_j(z + 1) = θ_j(z)`` and ``θ_j(z + τ) = exp(-πiNτ - 2πiNz) θ_j(z)``.
    The weighted term is ``exp(-π(tn + Ny)²/(Nt) + i(π s n²/N + 2π n x))``
    for ``τ = s + it``; terms whose Gaussian exponent exceeds 50 are dropped.
    """

    def __init__(self, model, N):
        if not isinstance(model, FlatTorus):
            raise UnsupportedModelError("theta basis requires the torus model")
        super().__init__(model, N)
        t = model.tau.imag
        self.half_width = int(np.ceil(np.sqrt(_THETA_TAIL_EXPONENT * self.N / (np.pi * t)))) + 1

    def _weighted_derivatives(self, z, chart, order):
        N = self.N
        s, t = self.model.tau.real, self.model.tau.imag
        x, y = z.real, z.imag
        centre = np.rint(-N * y / t).astype(np.int64)
        offsets = np.arange(-self.half_width, self.half_width + 1)
        n = centre[:, None] + offsets[None, :]
        nf = n.astype(float)
        terms = np.exp(
            -np.pi * (t * nf + N * y[:, None]) ** 2 / (N * t)
            + 1j * (np.pi * s * nf * nf / N + _TWO_PI * nf * x[:, None])
        )
        flat = (np.arange(z.size)[:, None] * N + np.mod(n, N)).ravel()
        out = np.empty((order + 1, z.size, N), dtype=complex)
        for p in range(order + 1):
            tp = (terms * (1j * _TWO_PI * nf) ** p).ravel()
            re = np.bincount(flat, weights=tp.real, minlength=z.size * N)
            im = np.bincount(flat, weights=tp.imag, minlength=z.size * N)
            out[p] = (re + 1j * im).reshape(z.size, N)
        return out


@dataclass(frozen=True, eq=False)
class BasisElement:
    """One coefficient function ``f_i`` of a basis, callable on chart points."""

    basis: SectionBasis
    index: int

    def __call__(self, p, chart=None):
        z, charts = check_points(p, chart)
        vals = self.basis.values(z, charts)[:, self.index]
        return vals[0] if isinstance(p, ChartPoint) or np.ndim(p) == 0 else vals

    def weighted(self, z, charts=0):
        return self.basis.weighted_values(z, charts)[:, self.index]


def basis(model, N, prescaled=False):
    """Canonical raw basis of H⁰(M, L^N) for ``model``."""
    N = check_level(N)
    if isinstance(model, SpherePerturbed):
        return MonomialBasis(model, N, prescaled=prescaled)
    if isinstance(model, FlatTorus):
        return ThetaBasis(model, N)
    raise UnsupportedModelError(f"no section basis for {model!r}")


def lift_value(f, model, N, x):
    """Equivariant lift ``ŝ(x) = f(z) exp(-Nφ(z)/2) exp(iNθ)``.

    ``f`` is a :class:`BasisElement` or any callable holomorphic coefficient
    function of the chart coordinate.
    """
    N = check_level(N)
    z, chart = x.base.z, x.base.chart
    model.check_domain(np.array([z]), np.array([chart]))
    phase = np.exp(1j * N * x.theta)
    if isinstance(f, BasisElement) and f.basis.N == N:
        return complex(f.weighted(np.array([z]), chart)[0] * phase)
    weight = np.exp(-0.5 * N * model.potential_values(np.array([z]), chart)[0])
    return complex(f(z) * weight * phase)
