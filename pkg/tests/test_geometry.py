import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bergmanlab import (
    BackgroundMetric,
    ChartPoint,
    DegenerateMetricError,
    DomainError,
    FlatTorus,
    PositivityError,
    SpherePerturbed,
    kahler_density,
    potential,
    quadrature_rule,
    relative_eigenvalues,
)
from bergmanlab.geometry import default_order, defining_function, minimum_order

def _chart0(rule):
    return np.where(rule.charts == 0, rule.nodes, 1 / rule.nodes)


SHIPPED = [SpherePerturbed(0.0), SpherePerturbed(0.1), SpherePerturbed(0.2), FlatTorus(1j), FlatTorus(0.3 + 1.2j)]


def test_potential_values():
    assert potential(SpherePerturbed(0.0), 0j) == 0.0
    assert potential(SpherePerturbed(0.0), 1.0) == pytest.approx(np.log(2.0), abs=1e-15)
    T = FlatTorus(1j)
    z = np.array([0.1 + 0.2j, 0.7 + 0.9j])
    np.testing.assert_allclose(potential(T, z), 2 * np.pi * z.imag**2, rtol=1e-15)


def test_potential_accepts_chart_points_and_real_pairs():
    S = SpherePerturbed(0.1)
    a = potential(S, ChartPoint(1, 0.3 - 0.2j))
    b = potential(S, np.array([[0.3, -0.2, 1]]))[0]
    assert a == b


def test_kahler_density_values():
    assert kahler_density(SpherePerturbed(0.0), 0j) == pytest.approx(1 / np.pi, rel=1e-15)
    np.testing.assert_allclose(kahler_density(FlatTorus(1j), [0.2 + 0.3j, 0.9 + 0.1j]), 1.0, rtol=1e-15)


def test_torus_potential_laplacian_matches_finite_differences():
    # φ_zz̄ = (φ_xx + φ_yy)/4 = π / Im τ
    T = FlatTorus(0.2 + 1.5j)
    z, h = 0.4 + 0.6j, 1e-4
    lap = sum(potential(T, z + d) for d in (h, -h, 1j * h, -1j * h)) - 4 * potential(T, z)
    assert lap / (4 * h * h) == pytest.approx(np.pi / 1.5, rel=1e-6)


@pytest.mark.parametrize("model", SHIPPED)
def test_total_volume_is_one(model):
    rule = quadrature_rule(model, 64 if model.kind == "sphere" else 32)
    assert rule.integrate(np.ones(len(rule))) == pytest.approx(1.0, abs=1e-12)
    assert np.all(rule.weights > 0)


def test_sphere_volume_by_radial_integration():
    from scipy.integrate import quad

    S = SpherePerturbed(0.1)
    val, _ = quad(lambda r: 2 * np.pi * r * kahler_density(S, r + 0j), 0, np.inf, epsabs=1e-13)
    assert val == pytest.approx(1.0, abs=1e-10)


def test_second_moment_at_level_two():
    # ⟨z, z⟩ at N = 2 is 1!1!/3! = 1/6
    S = SpherePerturbed(0.0)
    rule = quadrature_rule(S, 64)
    z = _chart0(rule)
    integrand = np.abs(z) ** 2 / (1 + np.abs(z) ** 2) ** 2
    assert rule.integrate(integrand) == pytest.approx(1 / 6, abs=1e-10)


def test_quadrature_convergence_with_order():
    # smooth non-polynomial integrand in u; doubling the order gains >= 10^2
    S = SpherePerturbed(0.2)
    f = lambda z: np.cos(3 * np.abs(z) ** 2 / (1 + np.abs(z) ** 2)) * (1 + 0.1 * np.real(z))

    def integral(m):
        rule = quadrature_rule(S, m)
        return rule.integrate(f(_chart0(rule)))

    ref = integral(128)
    errors = [abs(integral(m) - ref) for m in (4, 8, 16, 32)]
    floor = 1e-14
    for a, b in zip(errors, errors[1:]):
        assert b <= max(a / 100, floor)


def test_relative_eigenvalues():
    S0, S1 = SpherePerturbed(0.0), SpherePerturbed(0.1)
    np.testing.assert_array_equal(relative_eigenvalues(S0, BackgroundMetric.same_as_kahler(), 0.4j), [1.0])
    np.testing.assert_array_equal(relative_eigenvalues(S0, BackgroundMetric.scaled(2.0), 0.4j), [0.5])
    np.testing.assert_array_equal(relative_eigenvalues(S1, BackgroundMetric(), 0.3), [1.0])
    assert relative_eigenvalues(FlatTorus(), BackgroundMetric(), [0.1, 0.2]).shape == (2, 1)


def test_degenerate_background_rejected():
    for bad in (0.0, -1.0, np.nan):
        with pytest.raises(DegenerateMetricError):
            BackgroundMetric(bad)


@pytest.mark.parametrize("model", SHIPPED)
def test_positivity_on_sampling_grid(model):
    g = np.linspace(-4, 4, 100) if model.kind == "sphere" else np.linspace(0, 1, 100, endpoint=False)
    X, Y = np.meshgrid(g, g)
    z = (X + 1j * Y).ravel() if model.kind == "sphere" else (X + Y * model.tau).ravel()
    assert np.all(model.laplacian(z) > 0)
    assert np.all(kahler_density(model, z) > 0)


def test_positivity_violation():
    S = SpherePerturbed(3.0)
    with pytest.raises(PositivityError):
        kahler_density(S, np.array([1.0 + 0j]))


def test_domain_errors():
    with pytest.raises(DomainError):
        potential(SpherePerturbed(), ChartPoint(2, 0.1))
    with pytest.raises(DomainError):
        potential(FlatTorus(1j), 1.5 + 0.2j)
    with pytest.raises(ValueError):
        potential(SpherePerturbed(), np.nan)


@given(
    r=st.floats(0.5, 2.0),
    t=st.floats(0.0, 2 * np.pi),
    eps=st.sampled_from([0.0, 0.1, 0.2]),
)
def test_chart_consistency_on_overlap(r, t, eps):
    # the volume form transforms with |dw/dz|² = |z|^-4
    S = SpherePerturbed(eps)
    z = r * np.exp(1j * t)
    d0 = kahler_density(S, ChartPoint(0, z))
    d1 = kahler_density(S, ChartPoint(1, 1 / z))
    assert d0 == pytest.approx(d1 * abs(z) ** -4, rel=1e-10)
    # the frame changes by z: φ₀ = φ₁ + log|z|²
    assert potential(S, ChartPoint(0, z)) == pytest.approx(potential(S, ChartPoint(1, 1 / z)) + np.log(r * r), abs=1e-12)


def test_defining_function_zero_exactly_on_circle_bundle():
    S = SpherePerturbed(0.1)
    z = np.array([0.3 + 0.1j, -1.2j])
    lam = np.exp(-0.5 * potential(S, z)) * np.exp(0.7j)
    np.testing.assert_allclose(defining_function(S, z, lam), 0.0, atol=1e-15)
    assert defining_function(S, 0j, 0.5) < 0


def test_order_policies():
    S = SpherePerturbed()
    assert default_order(S, 10) == (36, 28)
    assert minimum_order(S, 10) == (6, 11)
    m, _ = default_order(FlatTorus(1j), 96)
    assert m >= 6 * np.sqrt(96)
    with pytest.raises(ValueError):
        quadrature_rule(S, 2)
