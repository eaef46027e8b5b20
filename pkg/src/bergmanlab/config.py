"""Experiment configuration: parsing and validation of the JSON key/value tree."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import ConfigError
from .geometry import BackgroundMetric, FlatTorus, SpherePerturbed

__all__ = [
    "EXPERIMENTS",
    "DEFAULT_LEVELS",
    "DEFAULT_TOLERANCES",
    "ExperimentConfig",
    "ExperimentSpec",
    "load_config",
    "parse_config",
    "parse_model",
]

EXPERIMENTS = ("density_sweep", "pullback_convergence", "distortion", "ball_checks", "phase_checks")
DEFAULT_LEVELS = (8, 12, 16, 24, 32, 48, 64, 96)

DEFAULT_TOLERANCES = {
    "density_sweep": {
        "a0": 1e-3,  # |a0 - 1| per grid point
        "a0_fraction": 0.95,  # share of grid points within the a0 tolerance
        "residual_slope": -0.85,  # upper bound on the log-log slope of the two-term residual
        "trace": 1e-8,  # relative error of ∫ρ_N against dim H⁰
        "exact": 1e-8,  # relative error against N + 1 when ε = 0
        "torus_deviation": 1e-4,  # max |ρ_N/N - 1| for N >= 8
    },
    "pullback_convergence": {
        "slope_target": -1.0,
        "slope": 0.15,
        "exact": 1e-10,
    },
    "distortion": {
        "scaling": 1e-10,
        "slope_target": 0.0,
        "slope": 0.1,
    },
    "ball_checks": {
        "fourier": 1e-9,
        "bridge": 1e-8,
    },
    "phase_checks": {
        "hessian": 1e-6,
        "diagonal": 1e-12,
        "antisymmetry": 1e-12,
    },
}

# slope targets may be zero or negative; everything else must be positive
_SIGNED_KEYS = {"slope_target", "residual_slope"}


def parse_model(spec):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("model must be an object with a 'kind'")
    kind = spec["kind"]
    try:
        if kind == "sphere":
            eps = float(spec.get("epsilon", 0.0))
            if not eps < 2.0:
                raise ConfigError(f"sphere epsilon must be < 2 for positivity, got {eps}")
            return SpherePerturbed(eps, spec.get("perturbation", "bump"))
        if kind == "torus":
            tau = spec.get("tau", [0.0, 1.0])
            tau = complex(tau[0], tau[1]) if isinstance(tau, (list, tuple)) else complex(tau)
            return FlatTorus(tau)
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"invalid model {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown model kind {kind!r}")


def _parse_levels(levels):
    if not isinstance(levels, (list, tuple)) or not levels:
        raise ConfigError("levels must be a non-empty list")
    out = []
    for v in levels:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or v != int(v) or v < 1:
            raise ConfigError(f"levels must be positive integers, got {v!r}")
        out.append(int(v))
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ConfigError(f"levels must be strictly increasing, got {out}")
    return tuple(out)


def _parse_quadrature(spec):
    if spec in (None, "default"):
        return None
    if isinstance(spec, dict) and "order" in spec:
        try:
            r = int(spec["order"])
            a = int(spec.get("angular_order", r))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid quadrature setting {spec!r}") from exc
        if r < 4 or a < 4:
            raise ConfigError("quadrature orders must be >= 4")
        return (r, a)
    raise ConfigError(f"quadrature must be 'default' or {{'order': R, 'angular_order': A}}, got {spec!r}")


def _parse_grid(spec):
    spec = {} if spec is None else spec
    if not isinstance(spec, dict):
        raise ConfigError("grid must be an object")
    unknown = set(spec) - {"points", "radius", "mirror"}
    if unknown:
        raise ConfigError(f"unknown grid keys {sorted(unknown)}")
    grid = {}
    if "points" in spec:
        if not isinstance(spec["points"], int) or spec["points"] < 2:
            raise ConfigError("grid.points must be an integer >= 2")
        grid["points"] = spec["points"]
    if "radius" in spec:
        radius = float(spec["radius"])
        if not radius > 0:
            raise ConfigError("grid.radius must be positive")
        grid["radius"] = radius
    if "mirror" in spec:
        grid["mirror"] = bool(spec["mirror"])
    return grid


def _parse_background(spec):
    if spec is None or spec == "kahler":
        return BackgroundMetric()
    if isinstance(spec, dict):
        try:
            return BackgroundMetric(float(spec.get("scale", 1.0)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid background {spec!r}: {exc}") from exc
    raise ConfigError(f"invalid background {spec!r}")


def _parse_tolerances(spec):
    tol = copy.deepcopy(DEFAULT_TOLERANCES)
    if spec is None:
        return tol
    if not isinstance(spec, dict):
        raise ConfigError("tolerances must be an object")
    for name, values in spec.items():
        if name not in tol:
            raise ConfigError(f"tolerances given for unknown experiment {name!r}")
        if not isinstance(values, dict):
            raise ConfigError(f"tolerances.{name} must be an object")
        for key, v in values.items():
            if key not in tol[name]:
                raise ConfigError(f"unknown tolerance {name}.{key}")
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(v):
                raise ConfigError(f"tolerance {name}.{key} must be a number")
            if key not in _SIGNED_KEYS and v <= 0:
                raise ConfigError(f"tolerance {name}.{key} must be positive, got {v}")
            tol[name][key] = float(v)
    return tol


@dataclass(frozen=True)
class ExperimentSpec:
    """One requested experiment with its resolved settings."""

    name: str
    model: object
    levels: tuple
    quadrature: tuple | None
    grid: dict
    background: BackgroundMetric
    tolerances: dict
    options: dict = field(default_factory=dict)
    label: str | None = None

    @property
    def stem(self):
        """File stem of this experiment's outputs (the label, else the name)."""
        return self.label or self.name

    def inputs(self):
        return {
            **({"label": self.label} if self.label else {}),
            "model": self.model.to_config(),
            "levels": list(self.levels),
            "quadrature": "default" if self.quadrature is None else list(self.quadrature),
            "grid": dict(self.grid),
            "background": self.background.to_config(),
            **self.options,
        }


@dataclass(frozen=True)
class ExperimentConfig:
    experiments: tuple
    out: str | None = None
    raw: dict = field(default_factory=dict, compare=False)

    def names(self):
        return [e.stem for e in self.experiments]

    def only(self, name):
        """Entries whose name or label is ``name``."""
        picked = tuple(e for e in self.experiments if name in (e.name, e.label))
        if not picked:
            raise ConfigError(f"experiment {name!r} is not in the config (have {self.names()})")
        return ExperimentConfig(picked, self.out, self.raw)


_TOP_KEYS = {"model", "levels", "quadrature", "grid", "background", "experiments", "tolerances", "out"}
_ENTRY_KEYS = {"name", "label", "model", "levels", "quadrature", "grid", "background", "options"}


def parse_config(tree):
    """Validate a configuration tree and resolve per-experiment settings.

    Top-level ``model``, ``levels``, ``quadrature``, ``grid`` and
    ``background`` are defaults; an experiment entry may be a bare name or an
    object overriding any of them.  Entries sharing a name need distinct
    ``label`` values, which name their output files.
    """
    if not isinstance(tree, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(tree) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    base = {
        "model": tree.get("model", {"kind": "sphere", "epsilon": 0.0}),
        "levels": tree.get("levels", list(DEFAULT_LEVELS)),
        "quadrature": tree.get("quadrature", "default"),
        "grid": tree.get("grid"),
        "background": tree.get("background"),
    }
    tolerances = _parse_tolerances(tree.get("tolerances"))
    entries = tree.get("experiments", [])
    if not isinstance(entries, list):
        raise ConfigError("experiments must be a list")
    specs = []
    for entry in entries:
        if isinstance(entry, str):
            entry = {"name": entry}
        if not isinstance(entry, dict) or "name" not in entry:
            raise ConfigError(f"invalid experiment entry {entry!r}")
        bad = set(entry) - _ENTRY_KEYS
        if bad:
            raise ConfigError(f"unknown keys {sorted(bad)} in experiment {entry['name']!r}")
        if entry["name"] not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {entry['name']!r}; choose from {list(EXPERIMENTS)}")
        label = entry.get("label")
        if label is not None and (not isinstance(label, str) or not label or not label.replace("-", "_").isidentifier()):
            raise ConfigError(f"label must be a non-empty identifier-like string, got {label!r}")
        merged = {**base, **{k: v for k, v in entry.items() if k not in ("name", "label")}}
        options = merged.get("options") or {}
        if not isinstance(options, dict):
            raise ConfigError("options must be an object")
        specs.append(
            ExperimentSpec(
                name=entry["name"],
                model=parse_model(merged["model"]),
                levels=_parse_levels(merged["levels"]),
                quadrature=_parse_quadrature(merged["quadrature"]),
                grid=_parse_grid(merged["grid"]),
                background=_parse_background(merged["background"]),
                tolerances=tolerances[entry["name"]],
                options=dict(options),
                label=label,
            )
        )
    stems = [s.stem for s in specs]
    dupes = sorted({s for s in stems if stems.count(s) > 1})
    if dupes:
        raise ConfigError(f"experiments {dupes} appear more than once; give each a distinct 'label'")
    out = tree.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigError("out must be a path string")
    return ExperimentConfig(tuple(specs), out, tree)


def load_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        tree = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(tree)
