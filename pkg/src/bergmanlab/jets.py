"""Truncated bivariate Taylor jets in ``(z, zeta)``.

A real-analytic function ``F(z, z̄)`` is treated as a function of two
independent complex variables ``F(z, zeta)`` and expanded around
``(z0, conj(z0))``.  Coefficients are stored in a box
``c[..., p, q]`` for ``0 <= p, q <= order`` and multiply as

    (a * b)[p, q] = sum_{i <= p, j <= q} a[i, j] b[p - i, q - j],

which is exact within the box.  The mixed derivative
``∂^p ∂̄^q F(z0)`` is ``p! q! c[p, q]``.
"""

from __future__ import annotations

from math import factorial

import numpy as np

from .ddprec import ComplexDD, dd_div, two_prod


class Jet:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.ndim < 2 or coeffs.shape[-1] != coeffs.shape[-2]:
            raise ValueError("jet coefficients must end in a square (order+1, order+1) box")
        self.coeffs = coeffs

    @property
    def order(self):
        return self.coeffs.shape[-1] - 1

    @property
    def shape(self):
        return self.coeffs.shape[:-2]

    @classmethod
    def constant(cls, value, order):
        value = np.asarray(value, dtype=complex)
        c = np.zeros(value.shape + (order + 1, order + 1), dtype=complex)
        c[..., 0, 0] = value
        return cls(c)

    @classmethod
    def variable_z(cls, z0, order):
        jet = cls.constant(z0, order)
        if order >= 1:
            jet.coeffs[..., 1, 0] = 1.0
        return jet

    @classmethod
    def variable_zeta(cls, z0, order):
        """The conjugate variable, expanded around ``conj(z0)``."""
        jet = cls.constant(np.conj(z0), order)
        if order >= 1:
            jet.coeffs[..., 0, 1] = 1.0
        return jet

    # arithmetic -----------------------------------------------------

    def _wrap(self, other):
        if isinstance(other, Jet):
            return other
        return Jet.constant(np.broadcast_to(np.asarray(other, dtype=complex), self.shape), self.order)

    def __add__(self, other):
        return Jet(self.coeffs + self._wrap(other).coeffs)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coeffs)

    def __sub__(self, other):
        return Jet(self.coeffs - self._wrap(other).coeffs)

    def __rsub__(self, other):
        return Jet(self._wrap(other).coeffs - self.coeffs)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs * np.asarray(other, dtype=complex)[..., None, None])
        a, b = self.coeffs, other.coeffs
        D = self.order + 1
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=complex)
        for i in range(D):
            for j in range(D):
                out[..., i:, j:] += a[..., i, j, None, None] * b[..., : D - i, : D - j]
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs / np.asarray(other, dtype=complex)[..., None, None])
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = Jet.constant(np.ones(self.shape), self.order)
        for _ in range(k):
            out = out * self
        return out

    # composition with analytic functions ----------------------------

    def _split(self):
        c0 = self.coeffs[..., 0, 0].copy()
        nil = self.coeffs.copy()
        nil[..., 0, 0] = 0.0
        return c0, Jet(nil)

    def _series(self, c0, nil, taylor):
        # nil^k vanishes in the box once k > 2 * order
        out = Jet.constant(taylor[0], self.order)
        power = Jet.constant(np.ones(self.shape), self.order)
        for k in range(1, 2 * self.order + 1):
            power = power * nil
            out = out + power * taylor[k]
        return out

    def reciprocal(self):
        c0, nil = self._split()
        taylor = [(-1) ** k / c0 ** (k + 1) for k in range(2 * self.order + 1)]
        return self._series(c0, nil, taylor)

    def log(self):
        c0, nil = self._split()
        taylor = [np.log(c0)] + [(-1) ** (k + 1) / (k * c0**k) for k in range(1, 2 * self.order + 1)]
        return self._series(c0, nil, taylor)

    def exp(self):
        c0, nil = self._split()
        e0 = np.exp(c0)
        taylor = [e0 / factorial(k) for k in range(2 * self.order + 1)]
        return self._series(c0, nil, taylor)

    # readout ----------------------------------------------------------

    def mixed_partial(self):
        """Jet of ``∂_z ∂_zeta F``, one order lower."""
        n = self.order
        if n < 1:
            raise ValueError("mixed partial needs a jet of order >= 1")
        k = np.arange(1, n + 1, dtype=float)
        return Jet(self.coeffs[..., 1:, 1:] * k[:, None] * k[None, :])

    def derivative(self, p, q):
        """``∂_z^p ∂_zeta^q`` at the expansion point."""
        if p > self.order or q > self.order:
            raise ValueError(f"derivative ({p}, {q}) exceeds jet order {self.order}")
        return factorial(p) * factorial(q) * self.coeffs[..., p, q]

    def __repr__(self):
        return f"Jet(order={self.order}, shape={self.shape})"


def kernel_jet(derivs):
    """Jet of ``K(z, zeta) = sum_i g_i(z) conj(g_i(conj zeta))``.

    ``derivs[p]`` holds ``g_i^{(p)}(z0)`` with shape ``(..., dim)``.  The
    common per-point scale of the ``g_i`` is irrelevant for derivatives of
    ``log K`` beyond order zero.
    """
    derivs = np.asarray(derivs)
    order = derivs.shape[0] - 1
    scaled = derivs / np.array([factorial(p) for p in range(order + 1)])[(slice(None),) + (None,) * (derivs.ndim - 1)]
    coeffs = np.einsum("p...i,q...i->...pq", scaled, scaled.conj())
    return Jet(coeffs)


def _dd_box_mul(a, b, n):
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            acc = None
            for k in range(i + 1):
                for m in range(j + 1):
                    x, y = a[k][m], b[i - k][j - m]
                    if x is None or y is None:
                        continue
                    t = x * y
                    acc = t if acc is None else acc + t
            out[i][j] = acc
    return out


def log_kernel_jet(derivs):
    """Jet of ``log K`` for the kernel of :func:`kernel_jet`, in double-double.

    The Taylor coefficients of ``K`` grow like ``N^{p+q}`` while those of
    ``log K`` grow like ``N``, so the logarithm loses about ``(p+q-1) log10 N``
    digits; accumulating the kernel and the log series in double-double and
    rounding once keeps the result at working precision.  The products of
    the input derivatives are formed exactly.
    """
    derivs = np.asarray(derivs, dtype=complex)
    n = derivs.shape[0]
    def pair(p, q):
        a, b = derivs[p], derivs[q]
        # a * conj(b), each real product error-free
        rr = [two_prod(a.real, b.real), two_prod(a.imag, b.imag)]
        ii = [two_prod(a.imag, b.real), two_prod(-a.real, b.imag)]
        total = ComplexDD(rr[0][0], rr[0][1], ii[0][0], ii[0][1]) + ComplexDD(rr[1][0], rr[1][1], ii[1][0], ii[1][1])
        s = total.sum(axis=-1)
        f = float(factorial(p) * factorial(q))
        return s.div_real(np.full(s.rh.shape, f), np.zeros(s.rh.shape))

    c = [[None] * n for _ in range(n)]
    for p in range(n):
        for q in range(p, n):
            c[p][q] = pair(p, q)
            if q != p:
                c[q][p] = c[p][q].conj()
    c0h, c0l = c[0][0].rh, c[0][0].rl
    x = [[None if (i, j) == (0, 0) else c[i][j].div_real(c0h, c0l) for j in range(n)] for i in range(n)]

    acc = [[None] * n for _ in range(n)]
    power = x
    for k in range(1, 2 * (n - 1) + 1):
        sign = 1.0 if k % 2 else -1.0
        for i in range(n):
            for j in range(n):
                t = power[i][j]
                if t is None:
                    continue
                rh, rl = dd_div(sign * t.rh, sign * t.rl, float(k), 0.0)
                ih, il = dd_div(sign * t.ih, sign * t.il, float(k), 0.0)
                term = ComplexDD(rh, rl, ih, il)
                acc[i][j] = term if acc[i][j] is None else acc[i][j] + term
        power = _dd_box_mul(power, x, n)

    shape = derivs.shape[1:-1]
    coeffs = np.zeros(shape + (n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            if acc[i][j] is not None:
                coeffs[..., i, j] = acc[i][j].to_complex()
    coeffs[..., 0, 0] = np.log(c0h + c0l)
    return Jet(coeffs)
