"""Regular Lagrangians on a tangent bundle and their canonical geometry.

From ``L(x, y)`` we build the Hessian metric ``g_ij = 1/2 d2L/dy^i dy^j``,
the semispray coefficients ``G^i``, the canonical N-connection
``N^i_j = dG^i/dy^j``, the Sasaki-type d-metric ``(g, g)`` and the almost
complex structure. All of them are derived fields: asking for a jet of
order ``K`` evaluates ``L`` at order ``K + 2`` (metric) or ``K + 3`` (N).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.integrate

from .dmetric import DMetric, NONDEGENERACY_EPS, DegenerateMetricError, checked_inverse
from .expr import Dims, Expression, evaluate_jet, parse
from .fields import check_point
from .jets import Jet
from . import jets
from .nconn import NConnection, coframe_matrix, frame_matrix

__all__ = [
    "LagrangeProblem",
    "DegenerateHessianError",
    "StepSizeUnderflowError",
    "GeodesicResult",
    "hessian_metric",
    "semispray",
    "canonical_nconnection",
    "sasaki_lift",
    "almost_complex",
    "geodesic_integrate",
    "energy",
]


# the embedded pair's error control is relative; at rtol 1e-8 the energy
# drift over a unit interval reaches a few 1e-8, so the default is tighter
DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-10


class DegenerateHessianError(DegenerateMetricError):
    def __init__(self, point, det: float, last_state=None):
        self.point = np.asarray(point, dtype=float)
        self.det = det
        self.last_state = last_state
        super().__init__(f"Hessian of L is degenerate at {self.point.tolist()} (det {det:.3e})")


class StepSizeUnderflowError(ArithmeticError):
    def __init__(self, message: str, last_state=None):
        self.last_state = last_state
        super().__init__(message)


class LagrangeProblem:
    """A Lagrangian ``L(x, y)`` on ``n`` base coordinates (``m = n``)."""

    def __init__(self, L, n: int, tolerance: float = NONDEGENERACY_EPS):
        self.dims = Dims(n, n)
        self.n = n
        self.tolerance = tolerance
        self.source = L if isinstance(L, str) else None
        self.node: Expression = parse(L, self.dims) if isinstance(L, str) else L
        self._jet = lru_cache(maxsize=64)(self._jet_uncached)

    def _jet_uncached(self, key: tuple, order: int) -> Jet:
        return evaluate_jet(self.node, np.array(key), order)

    def jet(self, point, order: int) -> Jet:
        point = check_point(point, self.dims)
        return self._jet(tuple(point.tolist()), order)

    def value(self, point) -> float:
        return float(self.jet(point, 0).value)

    # jets of derived objects -----------------------------------------------------

    def hessian_jet(self, point, order: int) -> Jet:
        n = self.n
        d2 = self.jet(point, order + 2).grad().grad()
        g = 0.5 * d2[n:, n:]
        self._check_regular(point, g.value)
        return g

    def semispray_jet(self, point, order: int) -> Jet:
        """``G^i`` with ``2 G^i = 1/2 g^{ij} (d2L/dy^j dx^k y^k - dL/dx^j)``."""
        n = self.n
        point = check_point(point, self.dims)
        dL = self.jet(point, order + 2).grad()
        d2 = dL.grad()
        g = 0.5 * d2[n:, n:]
        self._check_regular(point, g.value)
        y = Jet.coordinates(point, order)[n:]
        rhs = jets.einsum("jk,k->j", d2[n:, :n], y) - dL.truncate(order)[:n]
        return 0.25 * jets.einsum("ij,j->i", jets.inv(g), rhs)

    def nconnection_jet(self, point, order: int) -> Jet:
        G = self.semispray_jet(point, order + 1)
        return G.grad()[:, self.n :]  # [i, j] = dG^i / dy^j

    def _check_regular(self, point, g: np.ndarray):
        det = float(np.linalg.det(g))
        if abs(det) <= self.tolerance:
            raise DegenerateHessianError(point, det)
        checked_inverse(g, "Hessian of L", self.tolerance)


@dataclass
class _DerivedField:
    problem: LagrangeProblem
    which: str
    dims: Dims = field(init=False)
    shape: tuple = field(init=False)

    def __post_init__(self):
        self.dims = self.problem.dims
        n = self.problem.n
        self.shape = (n, n)

    def jet(self, point, order: int) -> Jet:
        if self.which == "hessian":
            return self.problem.hessian_jet(point, order)
        return self.problem.nconnection_jet(point, order)


def hessian_metric(P: LagrangeProblem, point) -> tuple[np.ndarray, np.ndarray]:
    g = P.hessian_jet(point, 0).value
    return g, np.linalg.inv(g)


def semispray(P: LagrangeProblem, point) -> np.ndarray:
    return P.semispray_jet(point, 0).value


def canonical_nconnection(P: LagrangeProblem) -> NConnection:
    return NConnection(_DerivedField(P, "nconnection"), P.dims)


def sasaki_lift(P: LagrangeProblem) -> DMetric:
    g = _DerivedField(P, "hessian")
    return DMetric(g, g, P.dims)


def almost_complex(source, point=None, basis: str = "adapted") -> np.ndarray:
    """Matrix of ``F`` with ``F(e_i) = e_{n+i}`` and ``F(e_{n+i}) = -e_i``.

    ``source`` is a :class:`LagrangeProblem`, an :class:`NConnection` or an
    int ``n``. In the coordinate basis the frame change is applied, which
    needs the N-connection at ``point``.
    """
    if isinstance(source, LagrangeProblem):
        n, N = source.n, canonical_nconnection(source)
    elif isinstance(source, NConnection):
        if source.dims.n != source.dims.m:
            raise ValueError("an almost complex structure needs n == m")
        n, N = source.dims.n, source
    else:
        n, N = int(source), None
    F = np.zeros((2 * n, 2 * n))
    F[n:, :n] = np.eye(n)
    F[:n, n:] = -np.eye(n)
    if basis == "adapted":
        return F
    if basis != "coordinate":
        raise ValueError(f"unknown basis {basis!r}")
    if N is None or point is None:
        raise ValueError("the coordinate basis needs an N-connection and a point")
    Nv = N.jet(point, 0).value
    # coordinate components of a vector: E^T times its frame components
    return frame_matrix(Nv).T @ F @ coframe_matrix(Nv).T


# -- geodesics ------------------------------------------------------------------


def energy(P: LagrangeProblem, x, y) -> float:
    """``E = y^i dL/dy^i - L``."""
    point = np.concatenate([x, y])
    J = P.jet(point, 1)
    return float(np.dot(y, J.grad().value[P.n :]) - J.value)


def euler_lagrange_residual(P: LagrangeProblem, x, y, ydot) -> np.ndarray:
    """``d/dt dL/dy - dL/dx`` along a curve with ``x' = y``, ``y' = ydot``."""
    n = P.n
    J = P.jet(np.concatenate([x, y]), 2)
    dL = J.grad()
    d2 = dL.grad().value
    return d2[n:, :n] @ y + d2[n:, n:] @ ydot - dL.value[:n]


@dataclass
class GeodesicResult:
    tau: np.ndarray
    x: np.ndarray  # (samples, n)
    y: np.ndarray
    el_residual: float
    energy_drift: float
    constraint_residual: float
    nfev: int

    def as_dict(self) -> dict:
        return {
            "tau": self.tau.tolist(),
            "x": self.x.tolist(),
            "y": self.y.tolist(),
            "el_residual": self.el_residual,
            "energy_drift": self.energy_drift,
            "constraint_residual": self.constraint_residual,
            "nfev": self.nfev,
        }


def geodesic_integrate(
    P: LagrangeProblem,
    x0,
    y0,
    tau_span=(0.0, 1.0),
    steps: int = 100,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> GeodesicResult:
    """Integrate ``x'' + 2 G(x, x') = 0`` with an adaptive 4(5) Runge-Kutta pair.

    Degeneracy of the Hessian anywhere along the path raises
    :class:`DegenerateHessianError` carrying the last regular state.
    """
    n = P.n
    x0, y0 = np.asarray(x0, float), np.asarray(y0, float)
    last = {"t": tau_span[0], "state": np.concatenate([x0, y0])}

    def rhs(t, s):
        try:
            G = P.semispray_jet(s, 0).value
        except DegenerateHessianError as err:
            err.last_state = (last["t"], last["state"].copy())
            raise
        last["t"], last["state"] = t, s.copy()
        return np.concatenate([s[n:], -2.0 * G])

    t_eval = np.linspace(tau_span[0], tau_span[1], steps + 1)
    sol = scipy.integrate.solve_ivp(
        rhs, tau_span, last["state"], method="RK45", rtol=rtol, atol=atol, t_eval=t_eval, dense_output=True
    )
    if sol.status != 0:
        t, state = last["t"], last["state"]
        raise StepSizeUnderflowError(f"integration stopped near tau={t:.6g}: {sol.message}", (t, state.copy()))
    xs, ys = sol.y[:n].T, sol.y[n:].T

    # x' and y' of the numeric path from its dense interpolant (fourth-order
    # central differences), so the EL residual does not reuse the semispray
    h = 1e-3 * (tau_span[1] - tau_span[0])
    inner = t_eval[(t_eval - 2 * h >= tau_span[0]) & (t_eval + 2 * h <= tau_span[1])]
    E0 = energy(P, x0, y0)
    drift = max(abs(energy(P, x, y) - E0) for x, y in zip(xs, ys))
    el = constraint = 0.0
    if inner.size:
        S = [sol.sol(inner + k * h) for k in (-2, -1, 1, 2)]
        deriv = (S[0] - 8 * S[1] + 8 * S[2] - S[3]) / (12 * h)
        mid = sol.sol(inner)
        constraint = float(np.abs(deriv[:n] - mid[n:]).max())
        for j in range(inner.size):
            res = euler_lagrange_residual(P, mid[:n, j], mid[n:, j], deriv[n:, j])
            el = max(el, float(np.abs(res).max()))
    return GeodesicResult(sol.t, xs, ys, el, drift, constraint, int(sol.nfev))
