import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import unitary_group

from bergmanlab import (
    BackgroundMetric,
    ChartPoint,
    CirclePoint,
    FlatTorus,
    SpherePerturbed,
    convergence_rate,
    fit_expansion,
    density,
    distortion,
    fs_pullback,
    kahler_density,
    kernel,
)
from bergmanlab.kernel_ops import (
    ck_error_norm,
    density_profile,
    evaluation_grid,
    log_density_laplacian,
    pullback_derivatives,
    pullback_form,
)

from oracles import pullback_error_limit, sphere_kernel, torus_density

S0, S1 = SpherePerturbed(0.0), SpherePerturbed(0.1)
T = FlatTorus(1j)


def cx(z, t=0.0, chart=0):
    return CirclePoint(ChartPoint(chart, z), t)


def test_density_examples(transform):
    *_, onb = transform(S0, 2)
    np.testing.assert_allclose(density(onb, S0, 2, np.array([0, 1 + 1j, -3j])), 3.0, rtol=1e-13)
    *_, onb = transform(S0, 16)
    assert density(onb, S0, 16, 0.7 + 0.2j) == pytest.approx(17.0, rel=1e-8)


def test_torus_density_against_theta_series(transform):
    *_, onb = transform(T, 8)
    z = np.array([0.0, 0.3 + 0.2j, 0.5 + 0.5j, 0.9 + 0.7j])
    rho = density(onb, T, 8, z)
    ref = np.array([torus_density(1j, 8, p) for p in z])
    np.testing.assert_allclose(rho, ref, rtol=1e-12)
    assert np.max(np.abs(rho / 8 - 1)) < 1e-4


def test_level_mismatch_rejected(transform):
    *_, onb = transform(S0, 4)
    with pytest.raises(ValueError):
        density(onb, S0, 5, 0.1)


def test_kernel_examples(transform):
    *_, onb = transform(S0, 4)
    assert kernel(onb, S0, 4, cx(0.0), cx(1.0)) == pytest.approx(5 / 4, rel=1e-13)
    x = cx(0.4 - 0.3j, 1.3)
    diag = kernel(onb, S0, 4, x, x)
    assert diag.imag == pytest.approx(0, abs=1e-13)
    assert diag.real == pytest.approx(density(onb, S0, 4, 0.4 - 0.3j), rel=1e-13)


def test_kernel_phase_equivariance(transform):
    *_, onb = transform(S1, 6)
    x, y = cx(0.2 + 0.1j, 0.3), cx(-0.5j, 1.0)
    k = kernel(onb, S1, 6, x, y)
    assert kernel(onb, S1, 6, cx(0.2 + 0.1j, 0.8), y) == pytest.approx(np.exp(6j * 0.5) * k, rel=1e-12)


@given(
    a=st.complex_numbers(max_magnitude=2.5),
    b=st.complex_numbers(max_magnitude=2.5),
    ta=st.floats(0, 6.28),
    tb=st.floats(0, 6.28),
    m=st.sampled_from([0, 1]),
)
def test_kernel_cauchy_schwarz(a, b, ta, tb, m):
    from conftest import cached_transform

    model = [S0, S1][m]
    *_, onb = cached_transform(model, 8)
    x, y = cx(a, ta), cx(b, tb)
    kxy = kernel(onb, model, 8, x, y)
    bound = kernel(onb, model, 8, x, x).real * kernel(onb, model, 8, y, y).real
    assert abs(kxy) ** 2 <= bound * (1 + 1e-12)


@pytest.mark.parametrize("N", [1, 4, 16, 64])
def test_pullback_is_fubini_study_when_unperturbed(N, transform):
    *_, onb = transform(S0, N)
    z = np.array([0, 0.5 + 0.5j, 2.0, -1.5j])
    np.testing.assert_allclose(fs_pullback(onb, S0, N, z), (1 + np.abs(z) ** 2) ** -2 / np.pi, rtol=1e-10)


def test_torus_pullback_becomes_flat(transform):
    errors = {}
    z, charts = evaluation_grid(T)
    for N in (8, 12, 16, 24):
        *_, onb = transform(T, N)
        errors[N] = float(np.max(np.abs(fs_pullback(onb, T, N, z, charts) - 1)))
    assert errors[8] < 1e-3
    assert all(errors[N] < 1e-6 for N in (12, 16, 24))


def test_perturbed_pullback_within_one_over_N(transform):
    *_, onb = transform(S1, 32)
    assert abs(fs_pullback(onb, S1, 32, 0.5) - kahler_density(S1, 0.5)) < 1 / 32


def test_distortion_examples(transform):
    for N in (3, 10):
        *_, onb = transform(S0, N)
        np.testing.assert_allclose(distortion(onb, S0, N, np.array([0.1, 1j])), 1 / (N + 1), rtol=1e-12)
        for lam in (0.5, 2.0, 3.0):
            *_, onb_l = transform(S0, N, BackgroundMetric.scaled(lam))
            np.testing.assert_allclose(distortion(onb_l, S0, N, np.array([0.1, 1j])), lam / (N + 1), rtol=1e-12)


def test_N_distortion_has_finite_limit(transform):
    values = {}
    for N in (16, 24, 32, 48, 64):
        *_, onb = transform(S1, N)
        values[N] = N * distortion(onb, S1, N, 0.0)
    # N·distortion = 1 - a₁/N + O(N^-2): extrapolate in 1/N
    fit = fit_expansion(values, n=0, R=3)
    assert fit.a0 == pytest.approx(1.0, abs=1e-3)
    assert abs(values[64] - 1) < abs(values[16] - 1)


@pytest.mark.parametrize("model", [S0, S1, T])
def test_basis_change_invariance(model, transform):
    *_, onb = transform(model, 12)
    V = onb.with_unitary(unitary_group.rvs(onb.matrix.shape[0], random_state=11))
    z = np.array([0.1 + 0.1j, 0.6 + 0.3j, 0.95 + 0.9j])
    np.testing.assert_allclose(density(V, model, 12, z), density(onb, model, 12, z), rtol=1e-12)
    x = [cx(0.1 + 0.1j, 0.2), cx(0.6 + 0.3j, 2.0)]
    y = [cx(0.95 + 0.9j, 1.0), cx(0.3 + 0.3j, 0.0)]
    np.testing.assert_allclose(kernel(V, model, 12, x, y), kernel(onb, model, 12, x, y), rtol=1e-12)
    np.testing.assert_allclose(fs_pullback(V, model, 12, z), fs_pullback(onb, model, 12, z), rtol=1e-11)


@given(r=st.floats(0.5, 2.0), t=st.floats(0, 2 * np.pi), m=st.sampled_from([0, 1]), N=st.sampled_from([4, 16, 48]))
def test_chart_invariance_on_overlap(r, t, m, N):
    from conftest import cached_transform

    model = [S0, S1][m]
    *_, onb = cached_transform(model, N)
    z = r * np.exp(1j * t)
    a = density(onb, model, N, ChartPoint(0, z))
    b = density(onb, model, N, ChartPoint(1, 1 / z))
    assert a == pytest.approx(b, rel=1e-9)
    # the pullback is a density, transforming like dV_g
    pa = fs_pullback(onb, model, N, ChartPoint(0, z))
    pb = fs_pullback(onb, model, N, ChartPoint(1, 1 / z))
    assert pa == pytest.approx(pb * r**-4, rel=1e-9)


def test_off_diagonal_decay(transform):
    z, w = 0.3 + 0.2j, -0.8 + 1.1j
    c = abs(1 + z * np.conj(w)) / np.sqrt((1 + abs(z) ** 2) * (1 + abs(w) ** 2))
    levels = [8, 12, 16, 24, 32, 48, 64]
    logs = []
    for N in levels:
        *_, onb = transform(S0, N)
        k = kernel(onb, S0, N, cx(z), cx(w))
        assert k == pytest.approx(sphere_kernel(N, z, w), rel=1e-10)
        logs.append(np.log(abs(k) / (N + 1)))
    slope = np.polyfit(levels, logs, 1)[0]
    assert slope < 0
    assert slope == pytest.approx(np.log(c), rel=0.05)


@pytest.mark.parametrize("model", [S0, S1, SpherePerturbed(0.2), T])
@pytest.mark.parametrize("N", [2, 8, 32])
def test_pullback_positive_on_grid(model, N, transform):
    *_, onb = transform(model, N)
    z, charts = evaluation_grid(model)
    assert np.all(fs_pullback(onb, model, N, z, charts) > 0)


def test_pullback_derivatives_match_finite_differences(transform):
    *_, onb = transform(S1, 12)
    z0, h = np.array([0.4 + 0.3j]), 1e-4
    d = pullback_derivatives(onb, S1, 12, z0, 0, k=1)
    f = lambda z: fs_pullback(onb, S1, 12, z)
    dx = (f(z0 + h) - f(z0 - h)) / (2 * h)
    dy = (f(z0 + 1j * h) - f(z0 - 1j * h)) / (2 * h)
    assert d[(0, 0)][0] == pytest.approx(f(z0)[0], rel=1e-12)
    assert d[(1, 0)][0] == pytest.approx(0.5 * (dx - 1j * dy)[0], rel=1e-6)
    assert d[(0, 1)][0] == pytest.approx(0.5 * (dx + 1j * dy)[0], rel=1e-6)


def test_pullback_error_is_order_N_minus_two(transform):
    # N² (pullback - ω_g) approaches ∂∂̄a₁/π, the curvature-coefficient oracle
    z = np.array([0, 0.3 + 0.2j, 0.8, -1.1 + 0.5j, 2j])
    limit = pullback_error_limit(S1, z)
    gaps = {}
    for N in (32, 96):
        *_, onb = transform(S1, N)
        scaled = N**2 * (fs_pullback(onb, S1, N, z) - kahler_density(S1, z))
        gaps[N] = float(np.max(np.abs(scaled - limit)))
    assert gaps[96] < gaps[32]
    assert gaps[96] < 0.015


LADDER = (16, 24, 32, 48, 64, 96)


@pytest.fixture(scope="module")
def perturbed_ck_errors():
    from conftest import cached_transform

    z, charts = evaluation_grid(S1)
    out = {k: {} for k in (0, 1, 2)}
    for N in LADDER:
        *_, onb = cached_transform(S1, N)
        for k in out:
            out[k][N] = ck_error_norm(onb, S1, N, z, charts, k=k)
    return out


@pytest.mark.parametrize("k", [0, 1, 2])
def test_ck_errors_decay_at_least_like_one_over_N(perturbed_ck_errors, k):
    assert convergence_rate(perturbed_ck_errors[k]) <= -0.85


def test_log_density_laplacian_c2_norm_bounded(perturbed_ck_errors):
    # π N ‖pullback - ω_g‖_{C²} is the C² norm of ∂∂̄ log ρ_N
    scaled = {N: np.pi * N * e for N, e in perturbed_ck_errors[2].items()}
    assert max(scaled.values()) <= 1.5 * scaled[16]


def test_log_density_laplacian_consistent_with_pullback(transform):
    *_, onb = transform(S1, 24)
    z = np.array([0.2, 1 + 1j])
    lap = log_density_laplacian(onb, S1, 24, z)
    np.testing.assert_allclose(fs_pullback(onb, S1, 24, z) - kahler_density(S1, z), lap / (np.pi * 24), atol=1e-13)


def test_c3_norm_runs(transform):
    *_, onb = transform(S1, 16)
    z, charts = evaluation_grid(S1, points=9)
    c2 = ck_error_norm(onb, S1, 16, z, charts, k=2)
    c3 = ck_error_norm(onb, S1, 16, z, charts, k=3)
    assert np.isfinite(c3) and c3 >= c2
    with pytest.raises(ValueError):
        ck_error_norm(onb, S1, 16, z, charts, k=4)


def test_exact_pullback_error_vanishes(transform):
    z, charts = evaluation_grid(S0)
    for N in (8, 96):
        *_, onb = transform(S0, N)
        assert ck_error_norm(onb, S0, N, z, charts, k=2) <= 1e-10


def test_profiles_serialize(transform):
    *_, onb = transform(S0, 3)
    z, charts = evaluation_grid(S0, points=3)
    prof = density_profile(onb, S0, 3, z, charts)
    rows = prof.to_rows()
    assert len(rows) == z.size and rows[0][0] == 3
    np.testing.assert_allclose([r[-1] for r in rows], 4.0, rtol=1e-13)
    pb = pullback_form(onb, S0, 3, z, charts).to_rows()
    assert len(pb[0]) == 5


def test_grid_shapes():
    z, charts = evaluation_grid(S0)
    assert z.size == 2 * 41 * 41 and set(charts.tolist()) == {0, 1}
    assert np.max(np.abs(z)) == pytest.approx(3 * np.sqrt(2))
    zt, _ = evaluation_grid(T)
    assert zt.size == 32 * 32
