"""Model Kähler manifolds, background metrics and quadrature against dV_g.

Conventions used throughout the package:

* the Hermitian metric of the local frame is ``‖e_L‖²_h = exp(-φ)`` and the
  dual coframe has ``|e_L*|² = exp(+φ)``;
* the Kähler form is ``ω = (i/2π) ∂∂̄φ``, so its density with respect to
  Lebesgue measure ``dx dy`` is ``φ_{zz̄}/π``;
* ``dV_g = ωⁿ/n!`` (``n = 1`` here), which gives total volume 1 for the
  degree-one bundles shipped below.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from ._validation import check_points, check_positive
from .exceptions import DegenerateMetricError, DomainError, PositivityError
from .jets import Jet

__all__ = [
    "ChartPoint",
    "MetricModel",
    "SpherePerturbed",
    "FlatTorus",
    "BackgroundMetric",
    "QuadratureRule",
    "potential",
    "kahler_density",
    "defining_function",
    "quadrature_rule",
    "default_order",
    "minimum_order",
    "relative_eigenvalues",
]


@dataclass(frozen=True)
class ChartPoint:
    """A point ``z`` in affine chart ``chart`` of a model."""

    chart: int
    z: complex

    def __post_init__(self):
        object.__setattr__(self, "chart", int(self.chart))
        object.__setattr__(self, "z", complex(self.z))


class MetricModel:
    """Base class for a model manifold with a positive line bundle.

    Subclasses implement the vectorized ``_potential`` / ``_laplacian`` /
    ``potential_jet`` evaluators; the public functions in this module add
    domain validation on top.
    """

    kind = "abstract"
    charts = (0,)

    def check_domain(self, z, charts, cover=False):
        """Raise :class:`DomainError` unless every point is valid.

        ``cover=True`` accepts any finite point of the universal cover
        (relevant for the torus only).
        """
        z = np.asarray(z, dtype=complex)
        charts = np.asarray(charts)
        bad = ~np.isin(charts, self.charts)
        if np.any(bad):
            raise DomainError(f"{self.kind} model has charts {self.charts}, got {np.unique(charts[bad]).tolist()}")
        if not np.all(np.isfinite(z)):
            raise DomainError("points must be finite")

    def potential_values(self, z, charts=0):
        """φ at arbitrary finite points (no fundamental-domain check)."""
        raise NotImplementedError

    def laplacian(self, z, charts=0):
        """φ_{zz̄}."""
        raise NotImplementedError

    def potential_jet(self, z, charts=0, order=3):
        raise NotImplementedError

    def polarized_dual_weight(self, z, w, charts=0):
        """Holomorphic-antiholomorphic extension ``a(z, w)`` of ``exp(φ)``.

        Holomorphic in ``z``, antiholomorphic in ``w``, with ``a(z, z) = exp(φ(z))``.
        """
        raise NotImplementedError

    def section_count(self, N):
        raise NotImplementedError

    def total_volume(self):
        return 1.0

    def transition(self, z, chart):
        """Coordinate of the same point in the other chart (None if single chart)."""
        return None

    def to_config(self):
        raise NotImplementedError


@dataclass(frozen=True)
class SpherePerturbed(MetricModel):
    """ℂP¹ with ``φ = log(1 + |z|²) + ε |z|²/(1 + |z|²)²`` in both charts.

    The perturbation is invariant under ``z -> 1/z`` after the frame change
    ``e_1 = z e_0``, so chart 1 (coordinate ``w = 1/z``) carries the same
    formula.  Positivity holds for ``ε < 2``.
    """

    epsilon: float = 0.0
    perturbation_id: str = "bump"

    kind = "sphere"
    charts = (0, 1)

    def __post_init__(self):
        object.__setattr__(self, "epsilon", float(self.epsilon))
        if self.perturbation_id != "bump":
            raise ValueError(f"unknown perturbation {self.perturbation_id!r}")

    def potential_values(self, z, charts=0):
        r = np.abs(np.asarray(z, dtype=complex)) ** 2
        return np.log1p(r) + self.epsilon * r / (1.0 + r) ** 2

    def laplacian(self, z, charts=0):
        r = np.abs(np.asarray(z, dtype=complex)) ** 2
        return ((1.0 + r) ** 2 + self.epsilon * (1.0 - 4.0 * r + r * r)) / (1.0 + r) ** 4

    def potential_jet(self, z, charts=0, order=3):
        s = Jet.variable_z(z, order) * Jet.variable_zeta(z, order)
        one_plus = s + 1.0
        jet = one_plus.log()
        if self.epsilon:
            jet = jet + s * one_plus.reciprocal() ** 2 * self.epsilon
        return jet

    def polarized_dual_weight(self, z, w, charts=0):
        s = np.asarray(z, dtype=complex) * np.conj(np.asarray(w, dtype=complex))
        return (1.0 + s) * np.exp(self.epsilon * s / (1.0 + s) ** 2)

    def section_count(self, N):
        return N + 1

    def transition(self, z, chart):
        z = np.asarray(z, dtype=complex)
        if np.any(z == 0):
            raise DomainError("z = 0 is not in the chart overlap")
        return 1.0 / z

    def to_config(self):
        return {"kind": "sphere", "epsilon": self.epsilon}


@dataclass(frozen=True)
class FlatTorus(MetricModel):
    """ℂ/(ℤ + τℤ) with ``φ = 2π y²/Im τ`` (area-one flat metric).

    The chart is the fundamental parallelogram ``[0,1) + [0,1)τ``; the weight
    is also evaluated on the universal cover, which the theta functions need.
    """

    tau: complex = 1j

    kind = "torus"
    charts = (0,)

    def __post_init__(self):
        object.__setattr__(self, "tau", complex(self.tau))
        if self.tau.imag <= 0:
            raise ValueError(f"Im tau must be positive, got {self.tau}")

    def lattice_coordinates(self, z):
        """``(a, b)`` with ``z = a + b τ``."""
        z = np.asarray(z, dtype=complex)
        b = z.imag / self.tau.imag
        a = z.real - b * self.tau.real
        return a, b

    def check_domain(self, z, charts, cover=False):
        super().check_domain(z, charts)
        if cover:
            return
        a, b = self.lattice_coordinates(z)
        slack = 1e-12
        if np.any((a < -slack) | (a > 1 + slack) | (b < -slack) | (b > 1 + slack)):
            raise DomainError("torus points must lie in the fundamental parallelogram [0,1) + [0,1)·tau")

    def potential_values(self, z, charts=0):
        y = np.asarray(z, dtype=complex).imag
        return 2.0 * np.pi * y * y / self.tau.imag

    def laplacian(self, z, charts=0):
        return np.full(np.shape(z), np.pi / self.tau.imag)

    def potential_jet(self, z, charts=0, order=3):
        d = Jet.variable_z(z, order) - Jet.variable_zeta(z, order)
        return d * d * (-np.pi / (2.0 * self.tau.imag))

    def polarized_dual_weight(self, z, w, charts=0):
        d = np.asarray(z, dtype=complex) - np.conj(np.asarray(w, dtype=complex))
        return np.exp(-np.pi * d * d / (2.0 * self.tau.imag))

    def section_count(self, N):
        return N

    def to_config(self):
        return {"kind": "torus", "tau": [self.tau.real, self.tau.imag]}


@dataclass(frozen=True)
class BackgroundMetric:
    """Volume form ``dV_G = J_G ω`` used to define the inner product.

    ``scale = 1`` is the Kähler volume itself.
    """

    scale: float = 1.0

    def __post_init__(self):
        scale = float(self.scale)
        if not np.isfinite(scale) or scale <= 0:
            raise DegenerateMetricError(f"background volume density must be positive, got {self.scale}")
        object.__setattr__(self, "scale", scale)

    @classmethod
    def same_as_kahler(cls):
        return cls(1.0)

    @classmethod
    def scaled(cls, lam):
        return cls(lam)

    @property
    def kind(self):
        return "kahler" if self.scale == 1.0 else "scaled"

    def volume_density(self, z, charts=0):
        """``J_G`` at the given points."""
        return np.full(np.shape(z), self.scale)

    def to_config(self):
        return {"kind": self.kind, "scale": self.scale}


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and positive weights integrating against ``dV_g``."""

    nodes: np.ndarray
    charts: np.ndarray
    weights: np.ndarray
    order: int
    angular_order: int

    def __len__(self):
        return len(self.weights)

    def points(self):
        return [ChartPoint(c, z) for c, z in zip(self.charts.tolist(), self.nodes.tolist())]

    def integrate(self, values):
        """``Σ_q w_q f(z_q)`` (pairwise summation along the node axis)."""
        return np.sum(np.asarray(values) * self.weights.reshape((-1,) + (1,) * (np.ndim(values) - 1)), axis=0)


def _points(model, p, chart):
    z, charts = check_points(p, chart)
    model.check_domain(z, charts)
    return z, charts


def _maybe_scalar(p, values):
    if isinstance(p, ChartPoint) or np.ndim(p) == 0:
        return values[0]
    return values


def potential(model, p, chart=None):
    """Kähler potential φ of the frame weight at ``p``.

    Raises :class:`DomainError` for points outside the chart domain.
    """
    z, charts = _points(model, p, chart)
    return _maybe_scalar(p, model.potential_values(z, charts))


def kahler_density(model, p, chart=None):
    """Density of ``dV_g`` with respect to ``dx dy``: ``φ_{zz̄}/π``."""
    z, charts = _points(model, p, chart)
    lap = model.laplacian(z, charts)
    if np.any(lap <= 0):
        raise PositivityError(
            f"φ_zz̄ is not positive (min {lap.min():.3g}); perturbation {getattr(model, 'epsilon', None)} too large"
        )
    return _maybe_scalar(p, lap / np.pi)


def defining_function(model, p, lam, chart=None):
    """Defining function ``exp(φ(z)) |λ|² - 1`` of the unit circle bundle X.

    Negative on the open disc bundle D and zero exactly on X.
    """
    z, charts = _points(model, p, chart)
    lam = np.asarray(lam, dtype=complex).ravel()
    val = np.exp(model.potential_values(z, charts)) * np.abs(lam) ** 2 - 1.0
    return _maybe_scalar(p, val)


def minimum_order(model, N):
    """Smallest ``(radial, angular)`` orders at which the ε = 0 Gram is exact."""
    if isinstance(model, SpherePerturbed):
        return N // 2 + 1, N + 1
    if isinstance(model, FlatTorus):
        m = int(np.ceil(3.0 * np.sqrt(N * model.tau.imag)))
        return max(m, 4), max(m, 4)
    raise TypeError(f"unsupported model {model!r}")


def default_order(model, N):
    """Quadrature orders used for level ``N``.

    Sphere: radial ``2N + 16`` and angular ``2N + 8``.  Torus: the trapezoid
    aliasing error of the Gaussian integrands is ``exp(-π M² / (2 N Im τ))``,
    so ``M = 6 sqrt(N Im τ)`` (at least 32) keeps it below 1e-16.
    """
    if isinstance(model, SpherePerturbed):
        return 2 * N + 16, 2 * N + 8
    if isinstance(model, FlatTorus):
        m = max(32, int(np.ceil(6.0 * np.sqrt(N * model.tau.imag))))
        return m, m
    raise TypeError(f"unsupported model {model!r}")


def quadrature_rule(model, order, angular_order=None):
    """Tensor quadrature rule for ``∫_M f dV_g``.

    Sphere: with ``u = |z|²/(1 + |z|²)`` the volume form becomes
    ``(1 + ε(1 - 6u + 6u²)) du dθ / 2π``; Gauss–Legendre in ``u`` times the
    uniform trapezoid rule in θ.  Nodes with ``|z| > 1`` are stored in chart 1
    so no basis evaluation ever sees ``|z| > 1``.

    Torus: uniform ``order × order`` grid in lattice coordinates, each node
    with weight ``1/order²`` (spectrally accurate for periodic integrands).
    """
    order = int(order)
    if order < 4:
        raise ValueError(f"quadrature order must be >= 4, got {order}")
    m = order if angular_order is None else int(angular_order)
    if m < 4:
        raise ValueError(f"angular order must be >= 4, got {m}")

    if isinstance(model, SpherePerturbed):
        x, wx = leggauss(order)
        u = 0.5 * (x + 1.0)
        wu = 0.5 * wx
        theta = 2.0 * np.pi * np.arange(m) / m
        U, T = np.meshgrid(u, theta, indexing="ij")
        W = (wu * (1.0 + model.epsilon * (1.0 - 6.0 * u + 6.0 * u * u)))[:, None] / m * np.ones((1, m))
        outer = U > 0.5
        radius = np.where(outer, np.sqrt((1.0 - U) / U), np.sqrt(U / (1.0 - U)))
        nodes = radius * np.exp(np.where(outer, -1j, 1j) * T)
        charts = np.where(outer, 1, 0)
        return QuadratureRule(nodes.ravel(), charts.ravel().astype(np.int64), W.ravel(), order, m)

    if isinstance(model, FlatTorus):
        if angular_order is not None and angular_order != order:
            raise ValueError("torus rules are square; angular_order must equal order")
        g = np.arange(order) / order
        A, B = np.meshgrid(g, g, indexing="ij")
        nodes = (A + B * model.tau).ravel()
        weights = np.full(nodes.shape, 1.0 / order**2)
        return QuadratureRule(nodes, np.zeros(nodes.shape, dtype=np.int64), weights, order, order)

    raise TypeError(f"unsupported model {model!r}")


def relative_eigenvalues(model, G, p, chart=None):
    """Eigenvalues of ω_g relative to the background Kähler form at ``p``.

    For ``n = 1`` this is the single ratio ``1/J_G``.
    """
    if not isinstance(G, BackgroundMetric):
        raise TypeError("G must be a BackgroundMetric")
    z, charts = _points(model, p, chart)
    jg = G.volume_density(z, charts)
    if np.any(jg <= 0):
        raise DegenerateMetricError("background metric is degenerate")
    check_positive(jg.min(), "J_G")
    alphas = (1.0 / jg)[..., None]
    return _maybe_scalar(p, alphas)
