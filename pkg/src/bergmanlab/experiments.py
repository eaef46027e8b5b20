"""Level-sweep experiments driven by :mod:`bergmanlab.cli`.

Every experiment is a pure function of its :class:`ExperimentSpec` and
returns a :class:`~bergmanlab.reports.ReportRecord` plus the text of its
data files; nothing is written here, so experiments can run in any order or
in parallel while the caller serializes the output.
"""

from __future__ import annotations

import json
import time
import warnings
from math import comb

import numpy as np

from . import kernel_ops, szego_models
from .asymptotics import convergence_rate, fit_expansion
from .exceptions import FourierMismatchWarning
from .geometry import (
    BackgroundMetric,
    FlatTorus,
    SpherePerturbed,
    default_order,
    defining_function,
    quadrature_rule,
)
from .inner_product import gram, orthonormalize
from .reports import Metric, ReportRecord, format_csv
from .sections import CirclePoint, ChartPoint, basis

__all__ = ["build_transform", "run_experiment", "REGISTRY", "ROUNDOFF_FLOOR"]

# Residuals below ROUNDOFF_FLOOR · N carry no rate information.
ROUNDOFF_FLOOR = 1e-10
_SEED = 20240917


def build_transform(model, N, background=None, quadrature=None, prescale=True):
    """Basis, rule, Gram matrix and orthonormal transform at level ``N``."""
    G = BackgroundMetric() if background is None else background
    order = default_order(model, N) if quadrature is None else quadrature
    B = basis(model, N, prescaled=prescale) if isinstance(model, SpherePerturbed) else basis(model, N)
    rule = quadrature_rule(model, *order)
    M = gram(B, model, G, rule)
    return B, rule, M, orthonormalize(M, B)


def _grid(spec):
    return kernel_ops.evaluation_grid(spec.model, **spec.grid)


def _rows(N, z, charts, values):
    return [(N, int(c), float(p.real), float(p.imag), float(v)) for c, p, v in zip(charts, z, values)]


def _slope(levels, values):
    slope, _ = np.polyfit(np.log(np.asarray(levels, float)), np.log(np.asarray(values, float)), 1)
    return float(slope)


def density_sweep(spec):
    model, tol = spec.model, spec.tolerances
    z, charts = _grid(spec)
    samples, rows, trace_err = {}, [], {}
    for N in spec.levels:
        _, rule, _, onb = build_transform(model, N, spec.background, spec.quadrature)
        rho = kernel_ops.density(onb, model, N, z, charts)
        samples[N] = rho
        rows.extend(_rows(N, z, charts, rho))
        dim = model.section_count(N)
        total = spec.background.scale * rule.integrate(kernel_ops.density(onb, model, N, rule.nodes, rule.charts))
        trace_err[N] = abs(total - dim) / dim

    metrics = [Metric("trace_identity_max", max(trace_err.values()), tol["trace"])]
    details = {"trace_error": trace_err}
    if isinstance(model, SpherePerturbed) and model.epsilon == 0.0:
        exact = max(float(np.max(np.abs(samples[N] / (N + 1) - 1.0))) for N in spec.levels)
        metrics.append(Metric("exact_density_max_rel_error", exact, tol["exact"]))
    if isinstance(model, FlatTorus):
        big = [N for N in spec.levels if N >= 8]
        if big:
            dev = {N: float(np.max(np.abs(samples[N] / N - 1.0))) for N in big}
            metrics.append(Metric("torus_max_deviation", max(dev.values()), tol["torus_deviation"]))
            details["torus_deviation"] = dev

    files = {"density_sweep.csv": format_csv("grid_values", rows)}
    R = int(spec.options.get("R", 3))
    # the lowest levels are still pre-asymptotic for an R-term fit
    fit_levels = [N for N in spec.levels if N >= int(spec.options.get("fit_min_level", 16))]
    if len(fit_levels) >= R + 2 and fit_levels[-1] >= 4 * R:
        fit = fit_expansion({N: samples[N] for N in fit_levels}, n=1, R=R)
        a = fit.coefficients
        a0_err = np.abs(a[0] - 1.0)
        metrics.append(Metric("a0_fraction_within_tol", float(np.mean(a0_err <= tol["a0"])), tol["a0_fraction"], "min"))
        two_term = {N: float(np.max(np.abs(samples[N] - a[0] * N - a[1]))) for N in fit_levels}
        if all(two_term[N] < ROUNDOFF_FLOOR * N for N in fit_levels):
            slope = float("-inf")
        else:
            slope = convergence_rate(two_term)
        metrics.append(Metric("residual_slope", slope, tol["residual_slope"]))
        details.update(
            a0_max_abs_error=float(np.max(a0_err)),
            a0_mean=float(np.mean(a[0])),
            a1_mean=float(np.mean(a[1])),
            residual_max=fit.residual_max,
            two_term_residual=two_term,
        )
        per_point_res = np.max(np.abs(fit.residuals), axis=0)
        eps = getattr(model, "epsilon", None)
        fits = [
            {
                "model": model.kind,
                "epsilon": eps,
                "z": [float(p.real), float(p.imag)],
                "chart": int(c),
                "n": 1,
                "R": R,
                "a": [float(v) for v in a[:, i]],
                "residual_max": float(per_point_res[i]),
                "N_range": [fit_levels[0], fit_levels[-1]],
            }
            for i, (p, c) in enumerate(zip(z, charts))
        ]
        files["density_sweep_fits.json"] = json.dumps(fits, indent=1) + "\n"
    else:
        details["fit"] = f"skipped: needs at least {R + 2} levels >= the fit minimum, the largest >= {4 * R}"
    return metrics, details, files


def pullback_convergence(spec):
    model, tol = spec.model, spec.tolerances
    z, charts = _grid(spec)
    c0, c2, rows = {}, {}, []
    for N in spec.levels:
        *_, onb = build_transform(model, N, spec.background, spec.quadrature)
        c0[N] = kernel_ops.ck_error_norm(onb, model, N, z, charts, k=0)
        c2[N] = kernel_ops.ck_error_norm(onb, model, N, z, charts, k=2)
        rows.append((N, "C0", c0[N]))
        rows.append((N, "C2", c2[N]))
    details = {"C0": c0, "C2": c2}
    exact = isinstance(model, SpherePerturbed) and model.epsilon == 0.0
    if exact:
        metrics = [Metric("exact_max_error", max(max(c0.values()), max(c2.values())), tol["exact"])]
    else:
        s0, s2 = convergence_rate(c0), convergence_rate(c2)
        details.update(slope_C0=s0, slope_C2=s2)
        if isinstance(model, FlatTorus):
            # errors decay exponentially: only the O(1/N) upper bound is meaningful
            bound = tol["slope_target"] + tol["slope"]
            metrics = [Metric("slope_C0", s0, bound), Metric("slope_C2", s2, bound)]
        else:
            metrics = [
                Metric("slope_C0", s0, tol["slope"], "band", tol["slope_target"]),
                Metric("slope_C2", s2, tol["slope"], "band", tol["slope_target"]),
            ]
    return metrics, details, {"pullback_convergence.csv": format_csv("level_metrics", rows)}


def distortion(spec):
    model, tol = spec.model, spec.tolerances
    scales = [float(s) for s in spec.options.get("scales", [0.5, 2.0])]
    z, charts = _grid(spec)
    rows, scaling, n_dist = [], {}, {}
    for N in spec.levels:
        *_, onb = build_transform(model, N, None, spec.quadrature)
        base = kernel_ops.distortion(onb, model, N, z, charts)
        rows.extend((N, 1.0, *r[1:]) for r in _rows(N, z, charts, base))
        n_dist[N] = float(np.mean(N * base))
        for lam in scales:
            *_, onb_l = build_transform(model, N, BackgroundMetric.scaled(lam), spec.quadrature)
            d = kernel_ops.distortion(onb_l, model, N, z, charts)
            rows.extend((N, lam, *r[1:]) for r in _rows(N, z, charts, d))
            err = float(np.max(np.abs(d - lam * base) / np.abs(lam * base)))
            scaling[N] = max(scaling.get(N, 0.0), err)
    metrics = [Metric("scaling_max_rel_error", max(scaling.values()), tol["scaling"])]
    details = {"scaling_error": scaling, "mean_N_distortion": n_dist}
    if len(spec.levels) >= 2:
        slope = _slope(spec.levels, list(n_dist.values()))
        metrics.append(Metric("N_distortion_slope", slope, tol["slope"], "band", tol["slope_target"]))
    return metrics, details, {"distortion.csv": format_csv("scaled_grid_values", rows)}


def _unit_pairs(rng, count, max_overlap=0.9):
    """Circle points on S³ in chart 0 whose pairings satisfy ``|⟨Z, W⟩| <= max_overlap``."""
    pairs = []
    while len(pairs) < count:
        z, w = rng.normal(size=2) @ [1, 1j] * 1.5, rng.normal(size=2) @ [1, 1j] * 1.5
        t1, t2 = rng.uniform(0, 2 * np.pi, 2)
        Z = np.exp(1j * t1) * np.array([1.0, z]) / np.sqrt(1 + abs(z) ** 2)
        W = np.exp(1j * t2) * np.array([1.0, w]) / np.sqrt(1 + abs(w) ** 2)
        if abs(np.vdot(W, Z)) <= max_overlap:
            pairs.append(((z, t1, Z), (w, t2, W)))
    return pairs


def ball_checks(spec):
    tol = spec.tolerances
    rows, fourier_err, mismatches = [], 0.0, 0
    for n in (1, 2):
        for s in (0.2, 0.5, 0.8):
            v = np.zeros(n + 1)
            v[0] = np.sqrt(s)
            for N in range(31):
                with warnings.catch_warnings(record=True) as caught:
                    warnings.simplefilter("always", FourierMismatchWarning)
                    val = szego_models.ball_fourier(N, n, v, v)
                mismatches += len(caught)
                ref = comb(N + n, n) * s**N
                err = abs(val - ref)
                fourier_err = max(fourier_err, err)
                rows.append((f"fourier:n={n}:s={s}:N={N}", val.real, ref, err))
    metrics = [Metric("fourier_max_error", fourier_err, tol["fourier"])]

    rng = np.random.default_rng(_SEED)
    pairs = _unit_pairs(rng, int(spec.options.get("pairs", 8)))
    model = SpherePerturbed(0.0)
    constant, bridge = None, 0.0
    for N in spec.levels:
        *_, onb = build_transform(model, N, None, spec.quadrature)
        x = [CirclePoint(ChartPoint(0, z), t1) for (z, t1, _), _ in pairs]
        y = [CirclePoint(ChartPoint(0, w), t2) for _, (w, t2, _) in pairs]
        pi_n = kernel_ops.kernel(onb, model, N, x, y)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", FourierMismatchWarning)
            ball = np.array([szego_models.ball_fourier(N, 1, Z, W) for (_, _, Z), (_, _, W) in pairs])
        if constant is None:
            # one least-squares constant from the first level, then frozen
            constant = complex(np.vdot(pi_n, ball) / np.vdot(pi_n, pi_n))
        dev = np.abs(ball - constant * pi_n) / (N + 1)
        bridge = max(bridge, float(np.max(dev)))
        rows.extend((f"bridge:N={N}:pair={i}", abs(pi_n[i]), abs(ball[i]), dev[i]) for i in range(len(pairs)))
    metrics.append(Metric("bridge_max_deviation", bridge, tol["bridge"]))
    details = {"global_constant": constant, "fourier_mismatch_warnings": mismatches}
    return metrics, details, {"ball_checks.csv": format_csv("checks", rows)}


def _random_base_points(model, rng, count):
    if isinstance(model, FlatTorus):
        a, b = rng.uniform(0, 1, (2, count))
        return a + b * model.tau
    return rng.normal(size=count) * 1.2 + 1j * rng.normal(size=count) * 1.2


def phase_checks(spec):
    model, tol = spec.model, spec.tolerances
    rows = []
    H = szego_models.phase_hessian()
    target = np.array([[0, 1], [1, 1j]])
    hess_err = float(np.max(np.abs(H - target)))
    for (i, j), name in np.ndenumerate(np.array([["tt", "tθ"], ["θt", "θθ"]])):
        rows.append((f"hessian:{name}", H[i, j], target[i, j], abs(H[i, j] - target[i, j])))

    rng = np.random.default_rng(_SEED)
    count = int(spec.options.get("pairs", 100))
    z = _random_base_points(model, rng, count)
    lam = rng.uniform(0.2, 1.5, count) * np.exp(1j * rng.uniform(0, 2 * np.pi, count))
    psi = np.asarray(szego_models.phase_psi(model, z, lam, z, lam).value)
    rho = defining_function(model, z, lam, np.zeros(count, dtype=np.int64))
    diag_err = float(np.max(np.abs(psi - rho / 1j)))

    w = _random_base_points(model, rng, count)
    theta = rng.uniform(0, 2 * np.pi, (2, count))
    lx = szego_models.circle_lift(model, z, theta[0])
    ly = szego_models.circle_lift(model, w, theta[1])
    pxy = np.asarray(szego_models.phase_psi(model, z, lx, w, ly).value)
    pyx = np.asarray(szego_models.phase_psi(model, w, ly, z, lx).value)
    anti_err = float(np.max(np.abs(pxy + np.conj(pyx))))
    for k in range(count):
        rows.append((f"antisymmetry:{k}", pxy[k], -np.conj(pyx[k]), abs(pxy[k] + np.conj(pyx[k]))))

    metrics = [
        Metric("hessian_max_error", hess_err, tol["hessian"]),
        Metric("diagonal_identity_max_error", diag_err, tol["diagonal"]),
        Metric("antisymmetry_max_error", anti_err, tol["antisymmetry"]),
    ]
    return metrics, {"hessian": H}, {"phase_checks.csv": format_csv("checks", rows)}


REGISTRY = {
    "density_sweep": density_sweep,
    "pullback_convergence": pullback_convergence,
    "distortion": distortion,
    "ball_checks": ball_checks,
    "phase_checks": phase_checks,
}


def run_experiment(spec):
    """``(ReportRecord, {filename: text})`` for one experiment."""
    start = time.perf_counter()
    metrics, details, files = REGISTRY[spec.name](spec)
    files = {spec.stem + key[len(spec.name):]: text for key, text in files.items()}
    record = ReportRecord(
        experiment=spec.name,
        inputs=spec.inputs(),
        metrics=metrics,
        details=details,
        wall_time=time.perf_counter() - start,
        data_file=f"{spec.stem}.csv",
    )
    return record, files
