import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bergmanlab.jets import Jet, kernel_jet, log_kernel_jet


def _jet_of(f_coeffs):
    return Jet(np.asarray(f_coeffs, dtype=complex))


def test_product_of_variables():
    z0 = 0.3 + 0.4j
    s = Jet.variable_z(z0, 3) * Jet.variable_zeta(z0, 3)
    # F = z zeta: value |z0|², ∂F = conj(z0), ∂∂̄F = 1
    assert s.derivative(0, 0) == pytest.approx(abs(z0) ** 2)
    assert s.derivative(1, 0) == pytest.approx(np.conj(z0))
    assert s.derivative(1, 1) == 1
    assert s.derivative(2, 1) == 0


def test_log_of_fubini_study_weight():
    # ∂∂̄ log(1 + |z|²) = (1 + |z|²)^-2
    z0 = np.array([0.0, 0.5 - 0.2j, 2.0])
    r = np.abs(z0) ** 2
    jet = (Jet.variable_z(z0, 3) * Jet.variable_zeta(z0, 3) + 1.0).log()
    np.testing.assert_allclose(jet.derivative(1, 1), (1 + r) ** -2, rtol=1e-14)
    # ∂²∂̄ log(1 + |z|²) = -2 conj(z) (1 + |z|²)^-3
    np.testing.assert_allclose(jet.derivative(2, 1), -2 * np.conj(z0) * (1 + r) ** -3, rtol=1e-13, atol=1e-16)


def test_exp_reciprocal_roundtrip():
    z0 = np.array([0.2 + 0.1j])
    s = Jet.variable_z(z0, 4) * Jet.variable_zeta(z0, 4) + 2.0
    np.testing.assert_allclose((s * s.reciprocal()).coeffs, Jet.constant(np.ones(1), 4).coeffs, atol=1e-14)
    np.testing.assert_allclose(s.log().exp().coeffs, s.coeffs, atol=1e-13)
    np.testing.assert_allclose((s**3).coeffs, (s * s * s).coeffs, atol=1e-13)


def test_mixed_partial():
    z0 = np.array([0.7 - 0.3j])
    jet = (Jet.variable_z(z0, 4) * Jet.variable_zeta(z0, 4) + 1.0).log()
    m = jet.mixed_partial()
    assert m.order == 3
    for p in range(3):
        for q in range(3):
            np.testing.assert_allclose(m.derivative(p, q), jet.derivative(p + 1, q + 1), rtol=1e-13)
    with pytest.raises(ValueError):
        Jet.constant(1.0, 0).mixed_partial()


def test_derivative_beyond_order():
    with pytest.raises(ValueError):
        Jet.constant(1.0, 2).derivative(3, 0)
    with pytest.raises(ValueError):
        Jet(np.zeros((2, 3)))


def _random_derivs(rng, order, dim, scale=1.0):
    return (rng.normal(size=(order + 1, 3, dim)) + 1j * rng.normal(size=(order + 1, 3, dim))) * scale


@given(seed=st.integers(0, 2**31), order=st.integers(1, 4), dim=st.integers(1, 12))
def test_log_kernel_jet_agrees_with_double_precision(seed, order, dim):
    rng = np.random.default_rng(seed)
    D = _random_derivs(rng, order, dim)
    D[0] += 3.0  # keep K(0, 0) away from zero
    ref = kernel_jet(D).log().coeffs
    got = log_kernel_jet(D).coeffs
    np.testing.assert_allclose(got, ref, rtol=1e-9, atol=1e-9)


def test_log_kernel_jet_against_mpmath():
    import mpmath

    mpmath.mp.dps = 40
    rng = np.random.default_rng(5)
    # large derivative ratios mimic the level-N kernel (coefficients ~ N^{p+q})
    D = _random_derivs(rng, 2, 20) * (60.0 ** np.arange(3))[:, None, None]
    D[0] += 2.0
    L = log_kernel_jet(D)
    for pt in range(3):
        g = [[mpmath.mpc(complex(D[p, pt, i])) for i in range(20)] for p in range(3)]
        K11 = sum(g[1][i] * mpmath.conj(g[1][i]) for i in range(20))
        K10 = sum(g[1][i] * mpmath.conj(g[0][i]) for i in range(20))
        K00 = sum(g[0][i] * mpmath.conj(g[0][i]) for i in range(20))
        ref = (K11 * K00 - K10 * mpmath.conj(K10)) / K00**2  # ∂∂̄ log K
        assert complex(L.derivative(1, 1)[pt]) == pytest.approx(complex(ref), rel=1e-14)
