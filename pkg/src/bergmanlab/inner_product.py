"""Gram matrices of section bases and their orthonormalization."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack, solve_triangular
from scipy.special import gammaln

from ._validation import check_level
from .ddprec import hermitian_inverse_factor_dd
from .exceptions import CholeskyBreakdownError, QuadratureOrderError
from .geometry import BackgroundMetric, minimum_order

__all__ = [
    "GramMatrix",
    "OrthonormalTransform",
    "gram",
    "orthonormalize",
    "exact_gram_sphere_fs",
    "EXTENDED_PRECISION_THRESHOLD",
]

logger = logging.getLogger(__name__)

EXTENDED_PRECISION_THRESHOLD = 1e12


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Hermitian matrix ``⟨s_i, s_j⟩`` at level ``N``."""

    N: int
    entries: np.ndarray
    volume_kind: str = "kahler"
    background: BackgroundMetric | None = None

    @property
    def shape(self):
        return self.entries.shape

    def hermitian_defect(self):
        return float(np.max(np.abs(self.entries - self.entries.conj().T), initial=0.0))

    def to_rows(self):
        """``(row, col, re, im)`` tuples, row-major."""
        n = self.entries.shape[0]
        return [
            (i, j, float(self.entries[i, j].real), float(self.entries[i, j].imag))
            for i in range(n)
            for j in range(n)
        ]


@dataclass(frozen=True, eq=False)
class OrthonormalTransform:
    """Change of basis ``B`` with ``B^H · Gram · B = I``.

    With ``Gram_ij = ∫ f_i conj(f_j)``, the orthonormal coefficient
    functions are ``g_j = Σ_i conj(B_ij) f_i``.
    """

    matrix: np.ndarray
    source: object
    condition_estimate: float
    extended_precision: bool = False

    @property
    def N(self):
        return self.source.N

    def weighted_values(self, z, charts=0):
        """Orthonormal lifted values ``g_j(z) exp(-Nφ(z)/2)``, shape ``(n, dim)``."""
        return self.source.weighted_values(z, charts) @ self.matrix.conj()

    def weighted_derivatives(self, z, charts=0, order=0):
        return self.source.weighted_derivatives(z, charts, order) @ self.matrix.conj()

    def with_unitary(self, U):
        """The transform ``B·U`` (another orthonormal basis of the same space)."""
        return OrthonormalTransform(self.matrix @ U, self.source, self.condition_estimate, self.extended_precision)

    def orthonormality_defect(self, gram_matrix):
        G = gram_matrix.entries if isinstance(gram_matrix, GramMatrix) else np.asarray(gram_matrix)
        B = self.matrix
        return float(np.max(np.abs(B.conj().T @ G @ B - np.eye(B.shape[1]))))


def gram(basis, model, G=None, rule=None):
    """Assemble ``G_ij = Σ_q w_q exp(-Nφ(z_q)) f_i(z_q) conj(f_j(z_q)) J_G(z_q)``.

    The result is symmetrized as ``(G + G^H)/2`` and must be positive
    definite; eigenvalues are never clipped.
    """
    from .geometry import default_order, quadrature_rule

    G = BackgroundMetric() if G is None else G
    if rule is None:
        rule = quadrature_rule(model, *default_order(model, basis.N))
    need_r, need_a = minimum_order(model, basis.N)
    if rule.order < need_r or rule.angular_order < need_a:
        raise QuadratureOrderError(
            f"rule order ({rule.order}, {rule.angular_order}) below the minimum ({need_r}, {need_a}) for level {basis.N}"
        )
    F = basis.weighted_values(rule.nodes, rule.charts)
    w = rule.weights * G.volume_density(rule.nodes, rule.charts)
    M = F.T @ (w[:, None] * F.conj())
    M = 0.5 * (M + M.conj().T)
    _, info = lapack.zpotrf(M, lower=1)
    if info != 0:
        eig_min = float(np.linalg.eigvalsh(M)[0])
        raise QuadratureOrderError(
            f"Gram matrix at level {basis.N} is not positive definite (leading minor {info}, "
            f"λ_min = {eig_min:.3e}) with rule order ({rule.order}, {rule.angular_order}); "
            "increase the quadrature order"
        )
    kind = "kahler" if G.scale == 1.0 else "background"
    return GramMatrix(basis.N, M, kind, G)


def _condition(M):
    ev = np.linalg.eigvalsh(M)
    if ev[0] <= 0:
        return np.inf
    return float(ev[-1] / ev[0])


def orthonormalize(gram_matrix, basis, threshold=EXTENDED_PRECISION_THRESHOLD):
    """``B = Cholesky(Gram)^{-H}``.

    Above ``threshold`` (2-norm condition number) the factorization and the
    triangular inverse are redone in double-double arithmetic.
    """
    M = gram_matrix.entries if isinstance(gram_matrix, GramMatrix) else np.asarray(gram_matrix, dtype=complex)
    M = np.asarray(M, dtype=complex)
    L, info = lapack.zpotrf(M, lower=1, clean=1)
    if info > 0:
        raise CholeskyBreakdownError(info)
    if info < 0:
        raise ValueError(f"illegal argument {-info} to zpotrf")
    cond = _condition(M)
    if cond > threshold:
        logger.info("Gram condition %.3e exceeds %.1e; using double-double Cholesky", cond, threshold)
        B, _ = hermitian_inverse_factor_dd(M)
        return OrthonormalTransform(B, basis, cond, True)
    X = solve_triangular(L, np.eye(M.shape[0], dtype=complex), lower=True)
    return OrthonormalTransform(X.conj().T, basis, cond, False)


def exact_gram_sphere_fs(N):
    """Closed-form Gram of the raw monomials for ε = 0: ``k!(N-k)!/(N+1)!``."""
    N = check_level(N)
    k = np.arange(N + 1)
    diag = np.exp(gammaln(k + 1) + gammaln(N - k + 1) - gammaln(N + 2))
    return GramMatrix(N, np.diag(diag).astype(complex), "kahler", BackgroundMetric())
