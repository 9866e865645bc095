"""Seeded random regular instances (DSL text) for property checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dmetric import DMetric
from .expr import Dims
from .lagrange import LagrangeProblem
from .nconn import NConnection

__all__ = ["RandomInstance", "random_instance", "random_lagrangian", "coordinate_names", "sample_point"]


def coordinate_names(dims: Dims) -> list[str]:
    return [f"x{i + 1}" for i in range(dims.n)] + [f"y{a + 1}" for a in range(dims.m)]


def _num(c: float) -> str:
    return f"({c:.6f})"


def _term(rng: np.random.Generator, names: list[str]) -> str:
    u = rng.choice(names)
    w = rng.choice(names)
    a = rng.uniform(-1.0, 1.0)
    kind = rng.integers(5)
    if kind == 0:
        return f"{u}*{w}"
    if kind == 1:
        return f"sin({_num(a)}*{u})"
    if kind == 2:
        return f"exp({_num(0.5 * a)}*{u})"
    if kind == 3:
        return f"{u}^2"
    return f"cos({_num(a)}*{u}+{w})"


def random_scalar(rng: np.random.Generator, names: list[str], scale: float, base: float = 0.0, terms: int = 2) -> str:
    parts = [_num(base)] if base else []
    for _ in range(terms):
        parts.append(f"{_num(scale * rng.uniform(-1.0, 1.0))}*{_term(rng, names)}")
    return " + ".join(parts) if parts else "0"


def random_symmetric(rng, names, k: int, diag: float, scale: float) -> list[list[str]]:
    M = [[""] * k for _ in range(k)]
    for i in range(k):
        M[i][i] = random_scalar(rng, names, scale, base=diag + rng.uniform(0.0, 1.0))
        for j in range(i + 1, k):
            M[i][j] = M[j][i] = random_scalar(rng, names, scale)
    return M


@dataclass
class RandomInstance:
    dims: Dims
    g: list
    h: list
    N: list
    point: np.ndarray

    @property
    def metric(self) -> DMetric:
        return DMetric(self.g, self.h, self.dims)

    @property
    def nconnection(self) -> NConnection:
        return NConnection(self.N, self.dims)


def sample_point(rng: np.random.Generator, dims: Dims, half_width: float = 0.5) -> np.ndarray:
    return rng.uniform(-half_width, half_width, dims.total)


def random_instance(seed: int, dims: Dims | None = None) -> RandomInstance:
    """Diagonally dominant g, h (definite on the sampling box) and a smooth N."""
    rng = np.random.default_rng(seed)
    if dims is None:
        dims = Dims(int(rng.integers(1, 4)), int(rng.integers(1, 4)))
    names = coordinate_names(dims)
    width = 0.3 / max(dims.n, dims.m)
    g = random_symmetric(rng, names, dims.n, 2.0, width)
    h = random_symmetric(rng, names, dims.m, 2.0, width)
    N = [[random_scalar(rng, names, 0.8) for _ in range(dims.n)] for _ in range(dims.m)]
    return RandomInstance(dims, g, h, N, sample_point(rng, dims))


def random_lagrangian(seed: int, n: int | None = None) -> tuple[LagrangeProblem, np.ndarray, np.ndarray]:
    """A regular Lagrangian with quadratic and quartic velocity terms.

    Returns the problem plus an initial position and velocity.
    """
    rng = np.random.default_rng(seed)
    if n is None:
        n = int(rng.integers(1, 4))
    dims = Dims(n, n)
    xnames = [f"x{i + 1}" for i in range(n)]
    A = random_symmetric(rng, xnames, n, 1.5, 0.2 / n)
    quad = " + ".join(
        f"({A[i][j]})*y{i + 1}*y{j + 1}" if i == j else f"2*({A[i][j]})*y{i + 1}*y{j + 1}"
        for i in range(n)
        for j in range(i, n)
    )
    norm2 = " + ".join(f"y{i + 1}^2" for i in range(n))
    eps = rng.uniform(0.02, 0.1)
    L = f"0.5*({quad}) + {_num(eps)}*({norm2})^2"
    x0 = rng.uniform(-0.5, 0.5, n)
    y0 = rng.uniform(0.3, 1.0, n) * rng.choice([-1.0, 1.0], n)
    return LagrangeProblem(L, n), x0, y0
