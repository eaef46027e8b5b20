"""Vectorized double-double arithmetic and a Hermitian Cholesky built on it.

A double-double value is an unevaluated sum ``hi + lo`` with
``|lo| <= ulp(hi)/2`` (about 32 significant digits).  Error-free
transformations follow Dekker and Knuth; numpy has no fused multiply-add,
so products use Dekker splitting.
"""

from __future__ import annotations

import numpy as np

from .exceptions import CholeskyBreakdownError

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ahi, alo = split(a)
    bhi, blo = split(b)
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


def dd_add(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    t, f = two_sum(al, bl)
    e = e + t
    s, e = quick_two_sum(s, e)
    e = e + f
    return quick_two_sum(s, e)


def dd_neg(ah, al):
    return -ah, -al


def dd_mul(ah, al, bh, bl):
    p, e = two_prod(ah, bh)
    e = e + (ah * bl + al * bh)
    return quick_two_sum(p, e)


def dd_div(ah, al, bh, bl):
    q1 = ah / bh
    ph, pl = dd_mul(bh, bl, q1, 0.0)
    rh, rl = dd_add(ah, al, -ph, -pl)
    q2 = rh / bh
    ph, pl = dd_mul(bh, bl, q2, 0.0)
    rh, rl = dd_add(rh, rl, -ph, -pl)
    q3 = rh / bh
    q1, q2 = quick_two_sum(q1, q2)
    return dd_add(q1, q2, q3, 0.0)


def dd_sqrt(ah, al):
    if np.any(ah <= 0):
        raise ValueError("dd_sqrt of a non-positive value")
    x = np.sqrt(ah)
    sh, sl = two_prod(x, x)
    rh, rl = dd_add(ah, al, -sh, -sl)
    return quick_two_sum(x, rh / (2.0 * x))


def dd_sum(h, l, axis=-1):
    """Tree reduction of double-double arrays along ``axis``."""
    h = np.moveaxis(np.asarray(h, dtype=float), axis, -1)
    l = np.moveaxis(np.asarray(l, dtype=float), axis, -1)
    if h.shape[-1] == 0:
        return np.zeros(h.shape[:-1]), np.zeros(h.shape[:-1])
    while h.shape[-1] > 1:
        if h.shape[-1] % 2:
            pad = [(0, 0)] * (h.ndim - 1) + [(0, 1)]
            h = np.pad(h, pad)
            l = np.pad(l, pad)
        h, l = dd_add(h[..., 0::2], l[..., 0::2], h[..., 1::2], l[..., 1::2])
    return h[..., 0], l[..., 0]


class ComplexDD:
    """Array of complex double-doubles stored as four float arrays."""

    __slots__ = ("rh", "rl", "ih", "il")

    def __init__(self, rh, rl, ih, il):
        self.rh, self.rl, self.ih, self.il = rh, rl, ih, il

    @classmethod
    def from_complex(cls, a):
        a = np.asarray(a, dtype=complex)
        zero = np.zeros(a.shape)
        return cls(a.real.copy(), zero, a.imag.copy(), zero.copy())

    @classmethod
    def zeros(cls, shape):
        return cls(*(np.zeros(shape) for _ in range(4)))

    def to_complex(self):
        return (self.rh + self.rl) + 1j * (self.ih + self.il)

    def __getitem__(self, idx):
        return ComplexDD(self.rh[idx], self.rl[idx], self.ih[idx], self.il[idx])

    def __setitem__(self, idx, value):
        self.rh[idx], self.rl[idx], self.ih[idx], self.il[idx] = value.rh, value.rl, value.ih, value.il

    def conj(self):
        return ComplexDD(self.rh, self.rl, -self.ih, -self.il)

    def __add__(self, o):
        rh, rl = dd_add(self.rh, self.rl, o.rh, o.rl)
        ih, il = dd_add(self.ih, self.il, o.ih, o.il)
        return ComplexDD(rh, rl, ih, il)

    def __sub__(self, o):
        rh, rl = dd_add(self.rh, self.rl, -o.rh, -o.rl)
        ih, il = dd_add(self.ih, self.il, -o.ih, -o.il)
        return ComplexDD(rh, rl, ih, il)

    def __mul__(self, o):
        ah, al = dd_mul(self.rh, self.rl, o.rh, o.rl)
        bh, bl = dd_mul(self.ih, self.il, o.ih, o.il)
        ch, cl = dd_mul(self.rh, self.rl, o.ih, o.il)
        eh, el = dd_mul(self.ih, self.il, o.rh, o.rl)
        rh, rl = dd_add(ah, al, -bh, -bl)
        ih, il = dd_add(ch, cl, eh, el)
        return ComplexDD(rh, rl, ih, il)

    def abs2(self):
        ah, al = dd_mul(self.rh, self.rl, self.rh, self.rl)
        bh, bl = dd_mul(self.ih, self.il, self.ih, self.il)
        return dd_add(ah, al, bh, bl)

    def div_real(self, h, l):
        rh, rl = dd_div(self.rh, self.rl, h, l)
        ih, il = dd_div(self.ih, self.il, h, l)
        return ComplexDD(rh, rl, ih, il)

    def sum(self, axis=-1):
        rh, rl = dd_sum(self.rh, self.rl, axis)
        ih, il = dd_sum(self.ih, self.il, axis)
        return ComplexDD(rh, rl, ih, il)


def cholesky_dd(A):
    """Lower Cholesky factor of a Hermitian PD matrix in double-double.

    Returns the factor as :class:`ComplexDD`.  Raises
    :class:`CholeskyBreakdownError` with the 1-based failing minor.
    """
    A = ComplexDD.from_complex(A)
    n = A.rh.shape[0]
    L = ComplexDD.zeros((n, n))
    for j in range(n):
        row = L[j, :j]
        dh, dl = row.abs2()
        sh, sl = dd_sum(dh, dl)
        dh, dl = dd_add(A.rh[j, j], A.rl[j, j], -sh, -sl)
        if not dh > 0:
            raise CholeskyBreakdownError(j + 1)
        ljh, ljl = dd_sqrt(np.array(dh), np.array(dl))
        L.rh[j, j], L.rl[j, j] = ljh, ljl
        if j + 1 < n:
            below = L[j + 1 :, :j]
            prod = (below * ComplexDD(*(np.broadcast_to(a, below.rh.shape) for a in (row.rh, row.rl, -row.ih, -row.il)))).sum(axis=-1)
            col = (A[j + 1 :, j] - prod).div_real(ljh, ljl)
            L[j + 1 :, j] = col
    return L


def lower_inverse_dd(L):
    """Inverse of a lower-triangular :class:`ComplexDD` matrix by forward substitution."""
    n = L.rh.shape[0]
    X = ComplexDD.zeros((n, n))
    for i in range(n):
        rhs = ComplexDD.zeros((n,))
        rhs.rh[i] = 1.0
        if i:
            li = L[i, :i]
            Xk = X[:i, :]
            b = ComplexDD(*(np.broadcast_to(a[:, None], Xk.rh.shape) for a in (li.rh, li.rl, li.ih, li.il)))
            rhs = rhs - (b * Xk).sum(axis=0)
        X[i, :] = _div_complex(rhs, L[i, i])
    return X


def _div_complex(a, b):
    # b is a scalar ComplexDD; Cholesky diagonals are real so only that case is needed
    if np.any(b.ih != 0):
        raise ValueError("only real diagonal pivots are supported")
    return a.div_real(b.rh, b.rl)


def hermitian_inverse_factor_dd(A):
    """``B = L^{-H}`` with ``A = L L^H``, computed in double-double.

    Returns ``(B, L)`` rounded to complex128.
    """
    L = cholesky_dd(A)
    X = lower_inverse_dd(L)
    return X.to_complex().conj().T, L.to_complex()
