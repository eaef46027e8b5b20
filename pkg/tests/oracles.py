"""Independent reference values used by the tests (never by the package)."""

import mpmath
import numpy as np

from bergmanlab.jets import Jet


def curvature_coefficient_jet(model, z, order=2):
    """Jet of ``a₁ = -∂∂̄ log φ_{zz̄} / (2 φ_{zz̄})``, the subleading density term.

    For curves this is half the scalar curvature of ω in units where the
    round metric of total area one has ``a₁ = 1``.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    lap = model.potential_jet(z, 0, order + 2).mixed_partial()
    low = Jet(lap.coeffs[..., : order + 1, : order + 1])
    return -lap.log().mixed_partial() / (low * 2.0)


def curvature_coefficient(model, z):
    return curvature_coefficient_jet(model, z, 0).derivative(0, 0).real


def pullback_error_limit(model, z):
    """Limit of ``N² ((1/N) φ_N^* ω_FS - ω_g)`` as a dx dy density: ``∂∂̄a₁/π``."""
    return (curvature_coefficient_jet(model, z, 1).mixed_partial().derivative(0, 0) / np.pi).real


def torus_density(tau, N, z, dps=30):
    """``ρ_N`` on ℂ/(ℤ + τℤ) straight from the theta series.

    ``Σ_j |θ_j(z)|² e^{-Nφ(z)} / ‖θ_j‖²`` with the closed-form norms
    ``‖θ_j‖² = (2 N Im τ)^{-1/2}``; no quadrature or factorization involved.
    """
    mpmath.mp.dps = dps
    tau, z = mpmath.mpc(tau), mpmath.mpc(z)
    t = tau.imag
    total = mpmath.mpf(0)
    for j in range(N):
        theta = mpmath.nsum(
            lambda m: mpmath.exp(mpmath.pi * 1j * tau * (N * m + j) ** 2 / N + 2j * mpmath.pi * (N * m + j) * z),
            [-mpmath.inf, mpmath.inf],
        )
        total += abs(theta) ** 2
    weight = mpmath.exp(-2 * mpmath.pi * N * z.imag**2 / t)
    return float(total * weight * mpmath.sqrt(2 * N * t))


def sphere_kernel(N, z, w):
    """Closed form ``Π_N`` for ε = 0 at θ = θ' = 0, both points in chart 0."""
    return (N + 1) * (1 + z * np.conj(w)) ** N / ((1 + abs(z) ** 2) * (1 + abs(w) ** 2)) ** (N / 2)
