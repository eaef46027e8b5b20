"""scikit-learn style wrappers around the level-N pipeline and the expansion fit."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import kernel_ops
from ._validation import check_level, check_points
from .asymptotics import fit_expansion
from .geometry import BackgroundMetric, SpherePerturbed, default_order, quadrature_rule
from .inner_product import gram, orthonormalize
from .sections import basis

__all__ = ["BergmanKernel", "ExpansionRegressor"]


class BergmanKernel(TransformerMixin, BaseEstimator):
    """Orthonormal section basis of ``H⁰(M, L^N)`` for a metric model.

    ``fit`` assembles the Gram matrix on the model's quadrature rule and
    orthonormalizes it.  ``transform`` maps points to the weighted orthonormal
    values ``g_j(z) exp(-Nφ(z)/2)``, shape ``(n_points, dim)``; the squared
    row norms are the Bergman density.

    Parameters
    ----------
    model : MetricModel, default SpherePerturbed()
    level : int
        Tensor power ``N``.
    background : BackgroundMetric or None
        Volume form of the inner product; ``None`` is the Kähler volume.
    quadrature_order : int, (int, int) or None
        ``None`` uses :func:`~bergmanlab.geometry.default_order`.
    prescale : bool
        Prescale sphere monomials by ``sqrt((N+1) C(N, k))`` before the
        Gram assembly (improves conditioning; the span is unchanged).
    """

    def __init__(self, model=None, level=8, background=None, quadrature_order=None, prescale=True):
        self.model = model
        self.level = level
        self.background = background
        self.quadrature_order = quadrature_order
        self.prescale = prescale

    def _model(self):
        return SpherePerturbed() if self.model is None else self.model

    def fit(self, X=None, y=None):
        model = self._model()
        N = check_level(self.level)
        G = BackgroundMetric() if self.background is None else self.background
        if self.quadrature_order is None:
            order = default_order(model, N)
        elif np.ndim(self.quadrature_order) == 0:
            order = (int(self.quadrature_order),) * 2
        else:
            order = tuple(int(o) for o in self.quadrature_order)
        self.basis_ = basis(model, N, prescaled=self.prescale) if isinstance(model, SpherePerturbed) else basis(model, N)
        self.rule_ = quadrature_rule(model, *order)
        self.gram_ = gram(self.basis_, model, G, self.rule_)
        self.transform_ = orthonormalize(self.gram_, self.basis_)
        self.n_features_out_ = self.basis_.dim
        return self

    def _points(self, X, chart=None):
        check_is_fitted(self, "transform_")
        z, charts = check_points(X, chart)
        self._model().check_domain(z, charts, cover=True)
        return z, charts

    def transform(self, X, chart=None):
        z, charts = self._points(X, chart)
        return self.transform_.weighted_values(z, charts)

    def density(self, X, chart=None):
        z, charts = self._points(X, chart)
        return kernel_ops.density(self.transform_, self._model(), self.level, z, charts)

    def pullback(self, X, chart=None):
        z, charts = self._points(X, chart)
        return kernel_ops.fs_pullback(self.transform_, self._model(), self.level, z, charts)

    def distortion(self, X, chart=None):
        return 1.0 / self.density(X, chart)

    def kernel(self, x, y):
        check_is_fitted(self, "transform_")
        return kernel_ops.kernel(self.transform_, self._model(), self.level, x, y)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "transform_")
        return np.array([f"section{j}" for j in range(self.n_features_out_)], dtype=object)


class ExpansionRegressor(RegressorMixin, BaseEstimator):
    """Regress level-sweep samples onto ``Σ_{j<R} a_j N^{n-j}``.

    ``X`` holds the levels (shape ``(n_levels,)`` or ``(n_levels, 1)``),
    ``y`` the sampled values (``(n_levels,)`` or ``(n_levels, n_points)``).
    """

    def __init__(self, n_dim=1, n_terms=3):
        self.n_dim = n_dim
        self.n_terms = n_terms

    @staticmethod
    def _levels(X):
        X = np.asarray(X)
        if X.ndim == 2:
            if X.shape[1] != 1:
                raise ValueError(f"X must have a single column of levels, got shape {X.shape}")
            X = X[:, 0]
        if X.ndim != 1:
            raise ValueError("X must be one-dimensional")
        if not np.all(np.isfinite(X)) or np.any(X != np.round(X)):
            raise ValueError("levels must be integers")
        return X.astype(int)

    def fit(self, X, y):
        levels = self._levels(X)
        y = np.asarray(y, dtype=float)
        if y.shape[0] != levels.size:
            raise ValueError(f"X has {levels.size} levels but y has {y.shape[0]} rows")
        if len(set(levels.tolist())) != levels.size:
            raise ValueError("levels must be distinct")
        fit = fit_expansion(dict(zip(levels.tolist(), y)), n=self.n_dim, R=self.n_terms)
        self.fit_ = fit
        self.coef_ = fit.coefficients
        self.residual_max_ = fit.residual_max
        self.levels_ = fit.levels
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        return self.fit_.predict(self._levels(X))
