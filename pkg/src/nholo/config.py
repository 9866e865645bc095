"""Problem configuration files (YAML) and their validation."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .expr import Dims, ExprError, parse

__all__ = ["ConfigError", "ProblemConfig", "GeodesicRequest", "load_config", "parse_config", "DEFAULT_TOLERANCES", "OUTPUTS"]

MODES = ("lagrangian", "dmetric", "ansatz")

OUTPUTS = (
    "nconnection",
    "nconnection_curvature",
    "adapted_frames",
    "dmetric",
    "canonical_dconnection",
    "berwald_dconnection",
    "levi_civita",
    "distortion",
    "metricity",
    "torsion",
    "curvature",
    "ricci",
    "einstein",
    "einstein_residual",
    "hessian_metric",
    "semispray",
    "almost_complex",
    "charforms",
)

LAGRANGIAN_ONLY = {"hessian_metric", "semispray"}

DEFAULT_TOLERANCES = {
    "metricity": 1e-9,
    "torsion_hh_vv": 1e-12,
    "torsion_oracle": 1e-9,
    "curvature_forms_oracle": 1e-8,
    "curvature_commutator_oracle": 1e-8,
    "nijenhuis": 1e-9,
    "frame_duality": 1e-12,
    "distortion": 1e-9,
    "einstein_trace": 1e-8,
    "block_orthogonality": 1e-9,
    "almost_complex": 1e-12,
    "euler_lagrange": 1e-6,
    "energy_drift": 1e-8,
    "ch1_metric": 1e-8,
    "trace2_bruteforce": 1e-10,
}

SLIT_RADIUS = 1e-3
VV_VARIANTS = ("symmetric", "printed")


class ConfigError(ValueError):
    """All validation problems found in one pass."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class GeodesicRequest:
    x0: list[float]
    y0: list[float]
    tau_span: tuple[float, float] = (0.0, 1.0)
    steps: int = 100


@dataclass
class ProblemConfig:
    mode: str
    dims: Dims
    lagrangian: str | None = None
    g: list | None = None
    h: list | None = None
    nconnection: list | None = None
    ansatz: list | None = None
    explicit_points: list[list[float]] = field(default_factory=list)
    sample_count: int = 0
    box: list[tuple[float, float]] | None = None
    seed: int = 0
    outputs: list[str] = field(default_factory=list)
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    geodesics: list[GeodesicRequest] = field(default_factory=list)
    vv_variant: str = "symmetric"
    einstein_lambda: tuple = (0.0, 0.0)
    raw: dict = field(default_factory=dict)

    def config_hash(self) -> str:
        text = json.dumps(self.raw, sort_keys=True, default=str)
        return hashlib.sha256(text.encode()).hexdigest()

    def points(self) -> np.ndarray:
        """Explicit points followed by the seeded uniform sample."""
        pts = [np.asarray(p, dtype=float) for p in self.explicit_points]
        if self.sample_count:
            rng = np.random.default_rng(self.seed)
            lo = np.array([b[0] for b in self.box])
            hi = np.array([b[1] for b in self.box])
            n = self.dims.n
            drawn = 0
            attempts = 0
            while drawn < self.sample_count:
                attempts += 1
                if attempts > 1000 * self.sample_count:
                    raise ConfigError(["sampling box leaves no room outside the slit |y| < 1e-3"])
                p = rng.uniform(lo, hi)
                if self.mode == "lagrangian" and np.linalg.norm(p[n:]) < SLIT_RADIUS:
                    continue
                pts.append(p)
                drawn += 1
        return np.array(pts).reshape(-1, self.dims.total)

    def with_overrides(self, seed=None, points=None, tolerances=None) -> "ProblemConfig":
        errors = []
        if seed is not None:
            self.seed = int(seed)
            self.raw.setdefault("points", {}).setdefault("sample", {})["seed"] = int(seed)
        if points is not None:
            if points < 0:
                errors.append("--points must be nonnegative")
            elif self.box is not None:
                self.sample_count = points
            else:
                self.explicit_points = self.explicit_points[:points]
        for name, value in (tolerances or {}).items():
            if name not in DEFAULT_TOLERANCES:
                errors.append(f"unknown tolerance {name!r}")
            else:
                self.tolerances[name] = float(value)
        if errors:
            raise ConfigError(errors)
        return self


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads ``1e-10`` (no dot) as a float."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(
        r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
        |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
        |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
        |[-+]?\.(?:inf|Inf|INF)
        |\.(?:nan|NaN|NAN))$""",
        re.X,
    ),
    list("-+0123456789."),
)


def load_config(path) -> ProblemConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError([f"cannot read {path}: {err.strerror}"]) from err
    try:
        data = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as err:
        mark = getattr(err, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError([f"YAML parse error{where}: {getattr(err, 'problem', err)}"]) from err
    return parse_config(data)


def _matrix(value, rows: int, cols: int, name: str, errors: list[str], dims: Dims | None):
    if value is None:
        errors.append(f"{name}: missing")
        return None
    if not isinstance(value, list) or len(value) != rows or any(not isinstance(r, list) or len(r) != cols for r in value):
        errors.append(f"{name}: expected a {rows}x{cols} nested list")
        return None
    for i, row in enumerate(value):
        for j, entry in enumerate(row):
            _check_expr(entry, f"{name}[{i + 1}][{j + 1}]", errors, dims)
    return value


def _check_expr(entry, name: str, errors: list[str], dims: Dims | None):
    if isinstance(entry, bool) or not isinstance(entry, (str, int, float)):
        errors.append(f"{name}: expected an expression string or number")
        return
    if isinstance(entry, str) and dims is not None:
        try:
            parse(entry, dims)
        except ExprError as err:
            errors.append(f"{name}: {err}")


def parse_config(data) -> ProblemConfig:
    errors: list[str] = []
    if not isinstance(data, dict):
        raise ConfigError(["top level must be a mapping"])
    known = {"mode", "dims", "lagrangian", "metric", "nconnection", "ansatz", "points", "outputs", "tolerances", "geodesics", "options"}
    for key in sorted(set(data) - known):
        errors.append(f"unknown key {key!r}")

    mode = data.get("mode")
    if mode not in MODES:
        errors.append(f"mode: must be one of {', '.join(MODES)}")

    dims = None
    d = data.get("dims")
    if isinstance(d, dict) and isinstance(d.get("n"), int) and isinstance(d.get("m", d.get("n")), int):
        try:
            dims = Dims(d["n"], d.get("m", d["n"]))
        except ValueError as err:
            errors.append(f"dims: {err}")
    else:
        errors.append("dims: expected a mapping with integer n and m")
    if dims is not None and mode == "lagrangian" and dims.n != dims.m:
        errors.append("dims: lagrangian mode needs m == n")

    cfg = ProblemConfig(mode=mode or "", dims=dims or Dims(1, 1), raw=data)

    if dims is not None:
        if mode == "lagrangian":
            L = data.get("lagrangian")
            if L is None:
                errors.append("lagrangian: missing")
            else:
                _check_expr(L, "lagrangian", errors, dims)
                cfg.lagrangian = str(L)
        elif mode == "dmetric":
            metric = data.get("metric")
            if not isinstance(metric, dict):
                errors.append("metric: missing (needs g and h)")
            else:
                cfg.g = _matrix(metric.get("g"), dims.n, dims.n, "metric.g", errors, dims)
                cfg.h = _matrix(metric.get("h"), dims.m, dims.m, "metric.h", errors, dims)
            if data.get("nconnection") is not None:
                cfg.nconnection = _matrix(data["nconnection"], dims.m, dims.n, "nconnection", errors, dims)
        elif mode == "ansatz":
            cfg.ansatz = _matrix(data.get("ansatz"), dims.total, dims.total, "ansatz", errors, dims)

    _parse_points(data.get("points"), cfg, errors)

    outputs = data.get("outputs", [])
    if not isinstance(outputs, list):
        errors.append("outputs: expected a list")
        outputs = []
    seen = set()
    for name in outputs:
        if name not in OUTPUTS:
            errors.append(f"outputs: unknown object {name!r}")
        elif name in seen:
            errors.append(f"outputs: duplicate object {name!r}")
        elif name in LAGRANGIAN_ONLY and mode != "lagrangian":
            errors.append(f"outputs: {name!r} needs lagrangian mode")
        seen.add(name)
    cfg.outputs = [o for o in dict.fromkeys(outputs) if o in OUTPUTS]

    tols = data.get("tolerances") or {}
    if not isinstance(tols, dict):
        errors.append("tolerances: expected a mapping")
    else:
        for name, value in tols.items():
            if name not in DEFAULT_TOLERANCES:
                errors.append(f"tolerances: unknown check {name!r}")
            elif isinstance(value, bool) or not isinstance(value, (int, float)) or value < 0:
                errors.append(f"tolerances.{name}: expected a nonnegative number")
            else:
                cfg.tolerances[name] = float(value)

    geos = data.get("geodesics") or []
    if geos and mode != "lagrangian":
        errors.append("geodesics: only available in lagrangian mode")
    for k, req in enumerate(geos if isinstance(geos, list) else []):
        try:
            x0, y0 = [float(v) for v in req["x0"]], [float(v) for v in req["y0"]]
            span = tuple(float(v) for v in req.get("tau_span", (0.0, 1.0)))
            steps = int(req.get("steps", 100))
            if dims is not None and (len(x0) != dims.n or len(y0) != dims.n):
                raise ValueError("x0/y0 length must equal n")
            if len(span) != 2 or span[1] <= span[0] or steps < 1:
                raise ValueError("tau_span must be increasing and steps >= 1")
            cfg.geodesics.append(GeodesicRequest(x0, y0, span, steps))
        except (KeyError, TypeError, ValueError) as err:
            errors.append(f"geodesics[{k}]: {err}")

    options = data.get("options") or {}
    variant = options.get("vv_connection_variant", "symmetric")
    if variant not in VV_VARIANTS:
        errors.append(f"options.vv_connection_variant: must be one of {', '.join(VV_VARIANTS)}")
    cfg.vv_variant = variant
    lam = options.get("einstein_lambda", [0.0, 0.0])
    if not isinstance(lam, list) or len(lam) != 2:
        errors.append("options.einstein_lambda: expected [lambda_h, lambda_v]")
    else:
        for k, entry in enumerate(lam):
            _check_expr(entry, f"options.einstein_lambda[{k}]", errors, dims)
        cfg.einstein_lambda = tuple(lam)

    if errors:
        raise ConfigError(errors)
    return cfg


def _parse_points(spec, cfg: ProblemConfig, errors: list[str]):
    if spec is None:
        errors.append("points: missing")
        return
    if not isinstance(spec, dict):
        errors.append("points: expected a mapping with explicit and/or sample")
        return
    total = cfg.dims.total
    sample = spec.get("sample")
    if sample is not None:
        if not isinstance(sample, dict):
            errors.append("points.sample: expected a mapping")
        else:
            count, box, seed = sample.get("count"), sample.get("box"), sample.get("seed", 0)
            if not isinstance(count, int) or count < 0:
                errors.append("points.sample.count: expected a nonnegative integer")
            else:
                cfg.sample_count = count
            if not isinstance(seed, int):
                errors.append("points.sample.seed: expected an integer")
            else:
                cfg.seed = seed
            cfg.box = _parse_box(box, total, errors)
    explicit = spec.get("explicit") or []
    for k, p in enumerate(explicit):
        try:
            p = [float(v) for v in p]
        except (TypeError, ValueError):
            errors.append(f"points.explicit[{k}]: expected a list of numbers")
            continue
        if len(p) != total:
            errors.append(f"points.explicit[{k}]: expected {total} coordinates")
            continue
        if cfg.box is not None and any(not lo <= v <= hi for v, (lo, hi) in zip(p, cfg.box)):
            errors.append(f"points.explicit[{k}]: outside the declared box")
        cfg.explicit_points.append(p)
    if not explicit and sample is None:
        errors.append("points: need explicit points or a sample section")


def _parse_box(box, total: int, errors: list[str]):
    try:
        arr = np.asarray(box, dtype=float)
    except (TypeError, ValueError):
        arr = None
    if arr is not None and arr.shape == (2,):
        arr = np.tile(arr, (total, 1))
    if arr is None or arr.shape != (total, 2) or np.any(arr[:, 0] >= arr[:, 1]):
        errors.append(f"points.sample.box: expected [lo, hi] or {total} pairs with lo < hi")
        return None
    return [tuple(r) for r in arr.tolist()]
