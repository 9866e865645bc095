"""Independent reference computations used by the tests.

Nothing here imports the package's derivative machinery: symbolic work goes
through sympy and numeric differentiation through mpmath.
"""

from __future__ import annotations

import itertools
import random

import mpmath
import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

_TRANSFORMS = standard_transformations + (convert_xor,)


def coordinate_symbols(n: int, m: int):
    xs = sp.symbols(" ".join(f"x{i + 1}" for i in range(n)), seq=True)
    ys = sp.symbols(" ".join(f"y{a + 1}" for a in range(m)), seq=True)
    return list(xs), list(ys)


def to_sympy(text: str, n: int, m: int):
    xs, ys = coordinate_symbols(n, m)
    local = {str(s): s for s in xs + ys}
    return parse_expr(str(text), local_dict=local, transformations=_TRANSFORMS)


# -- derivatives by high-precision finite differences ---------------------------


def mp_function(text: str, n: int, m: int):
    xs, ys = coordinate_symbols(n, m)
    return sp.lambdify(xs + ys, to_sympy(text, n, m), modules="mpmath")


def fd_partial(f, point, kappa, h=mpmath.mpf("1e-4")):
    """Nested central differences for the multi-index ``kappa``, one Richardson step."""

    def central(step):
        total = mpmath.mpf(0)
        axes = [v for v, k in enumerate(kappa) for _ in range(k)]
        for signs in itertools.product((1, -1), repeat=len(axes)):
            p = [mpmath.mpf(c) for c in point]
            for v, s in zip(axes, signs):
                p[v] += s * step
            total += np.prod(signs) * f(*p)
        return total / (2 * step) ** len(axes)

    with mpmath.workdps(40):
        coarse, fine = central(h), central(h / 2)
        return float((4 * fine - coarse) / 3)


_SAFE_UNARY = [
    "sin({})",
    "cos({})",
    "exp(0.5*{})",
    "atan({})",
    "sinh(0.5*{})",
    "cosh(0.5*{})",
    "tan(0.3*{})",
    "log(2+({})^2)",
    "sqrt(1+({})^2)",
]


def random_expression(rng: random.Random, names: list[str], depth: int = 3) -> str:
    """Random DSL text that is smooth on the box [-0.5, 0.5]^d."""
    if depth == 0 or rng.random() < 0.2:
        if rng.random() < 0.75:
            return rng.choice(names)
        return f"{rng.uniform(-2, 2):.3f}"
    kind = rng.random()
    a = random_expression(rng, names, depth - 1)
    if kind < 0.3:
        return rng.choice(_SAFE_UNARY).format(a)
    b = random_expression(rng, names, depth - 1)
    if kind < 0.5:
        return f"({a}) + ({b})"
    if kind < 0.65:
        return f"({a}) - ({b})"
    if kind < 0.85:
        return f"({a})*({b})"
    if kind < 0.93:
        return f"({a})/(2+cos({b}))"
    return f"({a})^{rng.randint(2, 3)}"


# -- coordinate Riemannian geometry -----------------------------------------------


def christoffel(metric: sp.Matrix, coords) -> list:
    """``gamma[i][j][k] = Gamma^i_{jk}`` of a coordinate metric."""
    d = len(coords)
    inv = metric.inv()
    return [
        [
            [
                sp.simplify(
                    sum(
                        inv[i, l] * (sp.diff(metric[l, j], coords[k]) + sp.diff(metric[l, k], coords[j]) - sp.diff(metric[j, k], coords[l]))
                        for l in range(d)
                    )
                    / 2
                )
                for k in range(d)
            ]
            for j in range(d)
        ]
        for i in range(d)
    ]


def scalar_curvature(metric: sp.Matrix, coords):
    d = len(coords)
    G = christoffel(metric, coords)
    inv = metric.inv()

    def riemann(a, b, c, e):  # R^a_{bce}
        expr = sp.diff(G[a][b][e], coords[c]) - sp.diff(G[a][b][c], coords[e])
        expr += sum(G[a][c][l] * G[l][b][e] - G[a][e][l] * G[l][b][c] for l in range(d))
        return expr

    ricci = sp.Matrix(d, d, lambda b, e: sum(riemann(a, b, a, e) for a in range(d)))
    return sp.simplify(sum(inv[i, j] * ricci[i, j] for i in range(d) for j in range(d)))


def block_metric(g_text, h_text, n: int, m: int) -> sp.Matrix:
    G = sp.zeros(n + m, n + m)
    for i in range(n):
        for j in range(n):
            G[i, j] = to_sympy(g_text[i][j], n, m)
    for a in range(m):
        for b in range(m):
            G[n + a, n + b] = to_sympy(h_text[a][b], n, m)
    return G


# -- characteristic-form series ---------------------------------------------------


def a_hat_log_coefficient() -> float:
    """Coefficient of ``z^2`` in ``log((z/2)/sinh(z/2))``."""
    z = sp.symbols("z")
    series = sp.series(sp.log((z / 2) / sp.sinh(z / 2)), z, 0, 4).removeO()
    return float(series.coeff(z, 2))


def a_hat_eigen_series(eigenvalues, omega_wedge_omega: float) -> float:
    """Degree-4 coefficient of ``det^(1/2) f(A w)`` via eigenvalues of ``A / 2 pi``.

    ``f(z) = (z/2)/sinh(z/2)``, so ``det^(1/2) f = exp(1/2 sum log f(mu w))``
    and the 4-form part is ``1/2 c2 sum mu^2 (w ^ w)``.
    """
    c2 = a_hat_log_coefficient()
    mus = np.asarray(eigenvalues) / (2 * np.pi)
    return float(np.real(0.5 * c2 * np.sum(mus**2) * omega_wedge_omega))
