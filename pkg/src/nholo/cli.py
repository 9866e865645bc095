"""Command line entry: ``compute``, ``verify`` and ``geodesic`` over a config file.

Exit codes: 0 success, 1 usage/config error, 2 verification failure,
3 numeric or domain error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import metadata

import numpy as np

from .charforms import a_hat_degree4, assemble_curvature_form, brute_force_trace2, chern_character, trace_powers
from .config import ConfigError, ProblemConfig, load_config
from .curvature import (
    curvature_commutator_oracle,
    curvature_via_forms_oracle,
    dcurvature,
    dtorsion,
    einstein_residual,
    ricci_scalar_einstein,
    torsion_via_forms_oracle,
)
from .dconn import berwald_dconnection, canonical_dconnection, distortion, levi_civita_adapted, metricity_residual
from .dmetric import AnsatzMetric, DMetric, block_orthogonality_residual
from .expr import ExprError
from .geometry import PointGeometry
from .lagrange import (
    LagrangeProblem,
    StepSizeUnderflowError,
    almost_complex,
    canonical_nconnection,
    geodesic_integrate,
    hessian_metric,
    sasaki_lift,
    semispray,
)
from .nconn import NConnection, adapted_frames, nconnection_curvature, nijenhuis_curvature_oracle

__all__ = ["main", "run_compute", "run_verify", "run_geodesic", "Report", "build_problem"]

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_NUMERIC = 0, 1, 2, 3
NUMERIC_ERRORS = (ExprError, ArithmeticError, np.linalg.LinAlgError)


@dataclass
class Problem:
    config: ProblemConfig
    metric: DMetric
    nconn: NConnection
    lagrangian: LagrangeProblem | None = None
    ansatz: AnsatzMetric | None = None


def build_problem(cfg: ProblemConfig) -> Problem:
    dims = cfg.dims
    if cfg.mode == "lagrangian":
        P = LagrangeProblem(cfg.lagrangian, dims.n)
        return Problem(cfg, sasaki_lift(P), canonical_nconnection(P), lagrangian=P)
    if cfg.mode == "dmetric":
        N = NConnection(cfg.nconnection, dims) if cfg.nconnection is not None else NConnection.zero(dims)
        return Problem(cfg, DMetric(cfg.g, cfg.h, dims), N)
    ansatz = AnsatzMetric(cfg.ansatz, dims)
    metric, N = ansatz.split()
    return Problem(cfg, metric, N, ansatz=ansatz)


def _tolist(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, dict):
        return {k: _tolist(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_tolist(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


class Report:
    def __init__(self, command: str, cfg: ProblemConfig):
        self.command = command
        self.cfg = cfg
        self.points: list[list[float]] = []
        self.results: list[dict] = []
        self.checks: list[dict] = []
        self.geodesics: list[dict] = []
        self.errors: list[dict] = []
        self.started = time.perf_counter()

    def add_check(self, name: str, residual: float, point_index=None, tolerance=None):
        tol = self.cfg.tolerances[name] if tolerance is None else tolerance
        self.checks.append(
            {
                "name": name,
                "point_index": point_index,
                "residual": float(residual),
                "tolerance": tol,
                "passed": bool(np.isfinite(residual) and residual <= tol),
            }
        )

    @property
    def failed_checks(self) -> list[dict]:
        return [c for c in self.checks if not c["passed"]]

    def payload(self) -> dict:
        checks = sorted(self.checks, key=lambda c: (-1 if c["point_index"] is None else c["point_index"], c["name"]))
        return {
            "command": self.command,
            "mode": self.cfg.mode,
            "dims": {"n": self.cfg.dims.n, "m": self.cfg.dims.m},
            "points": self.points,
            "results": self.results,
            "checks": checks,
            "geodesics": self.geodesics,
            "errors": self.errors,
            "summary": {
                "checks": len(self.checks),
                "failed": len(self.failed_checks),
                "errors": len(self.errors),
            },
        }

    def to_dict(self) -> dict:
        return {
            "metadata": {
                "tool": "nholo",
                "version": _version(),
                "config_hash": self.cfg.config_hash(),
                "wall_time_s": round(time.perf_counter() - self.started, 6),
            },
            "payload": self.payload(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=True)


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("NHOLO_THREADS", "1")))
    except ValueError:
        return 1


def _map_points(fn, points):
    """Order-stable map over points, in parallel when NHOLO_THREADS > 1."""
    threads = _threads()
    if threads == 1 or len(points) < 2:
        return [fn(i, p) for i, p in enumerate(points)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(len(points)), points))


# -- per-point evaluation --------------------------------------------------------


def _compute_objects(prob: Problem, point, names) -> dict:
    cfg = prob.config
    geo = PointGeometry.from_fields(prob.metric, prob.nconn, point)
    out = {}
    canon = None

    def canonical():
        nonlocal canon
        if canon is None:
            canon = canonical_dconnection(geo, vv_variant=cfg.vv_variant)
        return canon

    for name in sorted(names):
        if name == "nconnection":
            out[name] = geo.N.value
        elif name == "nconnection_curvature":
            out[name] = nconnection_curvature(prob.nconn, point)
        elif name == "adapted_frames":
            fr = adapted_frames(prob.nconn, point)
            out[name] = {"frame": fr.frame, "coframe": fr.coframe, "anholonomy": fr.anholonomy}
        elif name == "dmetric":
            out[name] = {"g": geo.g.value, "h": geo.h.value}
        elif name == "canonical_dconnection":
            out[name] = canonical().blocks()
        elif name == "berwald_dconnection":
            out[name] = berwald_dconnection(geo).blocks()
        elif name == "levi_civita":
            out[name] = levi_civita_adapted(geo).coefficients
        elif name == "distortion":
            dist = distortion(geo)
            out[name] = {"P_L_h": dist.P_L_h, "P_L_v": dist.P_L_v, "P_C_h": dist.P_C_h, "P_C_v": dist.P_C_v, "residual": dist.residual}
        elif name == "metricity":
            out[name] = metricity_residual(canonical(), geo).as_dict()
        elif name == "torsion":
            out[name] = dtorsion(canonical(), geo).as_dict()
        elif name == "curvature":
            out[name] = dcurvature(canonical(), geo).as_dict()
        elif name in ("ricci", "einstein"):
            ric = ricci_scalar_einstein(dcurvature(canonical(), geo), geo)
            if name == "ricci":
                out[name] = {"R_hh": ric.R_hh, "R_hv": ric.R_hv, "R_vh": ric.R_vh, "R_vv": ric.R_vv, "scalar": ric.scalar}
            else:
                out[name] = ric.einstein
        elif name == "einstein_residual":
            res = einstein_residual(prob.metric, prob.nconn, *cfg.einstein_lambda, point)
            out[name] = {"h_block": res.h_block, "v_block": res.v_block, "mixed": res.mixed, "max": res.max}
        elif name == "hessian_metric":
            g, ginv = hessian_metric(prob.lagrangian, point)
            out[name] = {"g": g, "g_inv": ginv}
        elif name == "semispray":
            out[name] = semispray(prob.lagrangian, point)
        elif name == "almost_complex":
            out[name] = _almost_complex(prob, point)
        elif name == "charforms":
            R = assemble_curvature_form(dcurvature(canonical(), geo), cfg.dims)
            ch = chern_character(R, cfg.dims)
            out[name] = {
                "ch": [c.as_dict() for c in ch.components],
                "a_hat_4": a_hat_degree4(R).as_dict(),
            }
    return _tolist(out)


def _almost_complex(prob: Problem, point) -> dict:
    if prob.config.dims.n != prob.config.dims.m:
        raise ValueError("almost_complex needs n == m")
    return {
        "adapted": almost_complex(prob.nconn, point),
        "coordinate": almost_complex(prob.nconn, point, basis="coordinate"),
    }


def _verify_point(prob: Problem, point) -> list[tuple[str, float]]:
    """Named residuals of every applicable invariant at one point."""
    cfg = prob.config
    dims = cfg.dims
    geo = PointGeometry.from_fields(prob.metric, prob.nconn, point)
    out = []
    canon = canonical_dconnection(geo, vv_variant=cfg.vv_variant)

    out.append(("metricity", metricity_residual(canon, geo).max()))
    tors = dtorsion(canon, geo)
    out.append(("torsion_hh_vv", max(np.abs(tors.hhh).max(initial=0.0), np.abs(tors.vvv).max(initial=0.0))))
    out.append(("torsion_oracle", tors.max_difference(torsion_via_forms_oracle(canon, geo))))
    curv = dcurvature(canon, geo)
    out.append(("curvature_forms_oracle", curv.max_difference(curvature_via_forms_oracle(canon, geo))))
    out.append(("curvature_commutator_oracle", curv.max_difference(curvature_commutator_oracle(canon, geo))))

    omega = nconnection_curvature(prob.nconn, point)
    nij = 0.0
    for i in range(dims.n):
        for j in range(dims.n):
            nij = max(nij, float(np.abs(nijenhuis_curvature_oracle(prob.nconn, i, j, point) - omega[:, i, j]).max()))
    out.append(("nijenhuis", nij))
    out.append(("frame_duality", adapted_frames(prob.nconn, point).duality_residual))
    out.append(("distortion", distortion(geo).residual))

    ric = ricci_scalar_einstein(curv, geo)
    trace = float(np.einsum("ab,ab->", np.linalg.inv(geo.metric.value), ric.einstein))
    out.append(("einstein_trace", abs(trace - ric.scalar * (1 - dims.total / 2))))

    if prob.ansatz is not None:
        out.append(("block_orthogonality", block_orthogonality_residual(prob.ansatz, prob.nconn, point)))
    if dims.n == dims.m:
        F = _almost_complex(prob, point)
        I = np.eye(dims.total)
        out.append(("almost_complex", max(np.abs(F["adapted"] @ F["adapted"] + I).max(), np.abs(F["coordinate"] @ F["coordinate"] + I).max())))

    R = assemble_curvature_form(curv, dims)
    out.append(("ch1_metric", float(np.abs(trace_powers(R, 1).coef).max(initial=0.0))))
    if dims.total >= 4:
        out.append(("trace2_bruteforce", float(np.abs(trace_powers(R, 2).coef - brute_force_trace2(R).coef).max(initial=0.0))))
    return out


def _guarded(report: Report, fn, index, point):
    try:
        return fn(point)
    except NUMERIC_ERRORS as err:
        report.errors.append({"point_index": index, "type": type(err).__name__, "message": str(err)})
        return None


# -- commands -------------------------------------------------------------------


def run_compute(cfg: ProblemConfig) -> tuple[Report, int]:
    report = Report("compute", cfg)
    prob = build_problem(cfg)
    points = cfg.points()
    report.points = points.tolist()
    results = _map_points(lambda i, p: _guarded(report, lambda q: _compute_objects(prob, q, cfg.outputs), i, p), list(points))
    for i, objs in enumerate(results):
        if objs is not None:
            report.results.append({"point_index": i, "objects": objs})
    report.errors.sort(key=lambda e: e["point_index"])
    return report, EXIT_NUMERIC if report.errors else EXIT_OK


def run_verify(cfg: ProblemConfig) -> tuple[Report, int]:
    report = Report("verify", cfg)
    prob = build_problem(cfg)
    points = cfg.points()
    report.points = points.tolist()
    results = _map_points(lambda i, p: _guarded(report, lambda q: _verify_point(prob, q), i, p), list(points))
    for i, checks in enumerate(results):
        for name, residual in checks or []:
            report.add_check(name, residual, i)
    if prob.lagrangian is not None:
        _geodesic_checks(report, prob)
    report.errors.sort(key=lambda e: e["point_index"] if e["point_index"] is not None else -1)
    if report.errors:
        return report, EXIT_NUMERIC
    return report, EXIT_VERIFY if report.failed_checks else EXIT_OK


def _geodesic_checks(report: Report, prob: Problem):
    for k, req in enumerate(prob.config.geodesics):
        try:
            res = geodesic_integrate(prob.lagrangian, req.x0, req.y0, req.tau_span, req.steps)
        except (*NUMERIC_ERRORS, StepSizeUnderflowError) as err:
            report.errors.append({"point_index": None, "geodesic": k, "type": type(err).__name__, "message": str(err)})
            continue
        entry = res.as_dict()
        entry["index"] = k
        report.geodesics.append(entry)
        report.add_check("euler_lagrange", res.el_residual)
        report.checks[-1]["geodesic"] = k
        # drift is bounded per unit parameter length
        span = req.tau_span[1] - req.tau_span[0]
        report.add_check("energy_drift", res.energy_drift / max(span, 1.0))
        report.checks[-1]["geodesic"] = k


def run_geodesic(cfg: ProblemConfig) -> tuple[Report, int]:
    report = Report("geodesic", cfg)
    if cfg.mode != "lagrangian":
        raise ConfigError(["geodesic needs lagrangian mode"])
    if not cfg.geodesics:
        raise ConfigError(["geodesics: no requests in config"])
    _geodesic_checks(report, build_problem(cfg))
    if report.errors:
        return report, EXIT_NUMERIC
    return report, EXIT_VERIFY if report.failed_checks else EXIT_OK


COMMANDS = {"compute": run_compute, "verify": run_verify, "geodesic": run_geodesic}


def _parse_tol(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"bad tolerance value in {text!r}") from err


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nholo", description="Nonholonomic geometry computations over a config file.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config")
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--seed", type=int, help="override the sampling seed")
        p.add_argument("--tol", type=_parse_tol, action="append", default=[], metavar="NAME=VALUE")
        p.add_argument("--points", type=int, help="number of sampled points")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = load_config(args.config).with_overrides(args.seed, args.points, dict(args.tol))
        report, code = COMMANDS[args.command](cfg)
    except ConfigError as err:
        for line in err.errors:
            print(f"config error: {line}", file=sys.stderr)
        return EXIT_CONFIG
    text = report.dumps()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    for c in report.failed_checks:
        print(f"FAIL {c['name']} point={c['point_index']} residual={c['residual']:.3e} tol={c['tolerance']:.1e}", file=sys.stderr)
    for e in report.errors:
        print(f"ERROR {e['type']}: {e['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
