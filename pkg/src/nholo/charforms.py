"""Curvature 2-forms in the adapted coframe and low-degree characteristic forms.

A matrix-valued 2-form stores ``R^a_b = sum_{mu<nu} c[a, b, p] e^mu ^ e^nu``
with ``p`` enumerating increasing pairs. Forms of degree ``2k`` are stored
the same way over increasing ``2k``-tuples. Only degrees up to 4 are built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .curvature import CurvatureBlocks
from .expr import Dims

__all__ = [
    "MatrixTwoForm",
    "FormComponent",
    "FormPolynomial",
    "assemble_curvature_form",
    "blocks_from_form",
    "wedge_trace",
    "trace_powers",
    "chern_character",
    "a_hat_degree4",
    "brute_force_trace2",
]

# (2,2)-shuffles of (0,1,2,3) with their signs
_SHUFFLES = [
    ((0, 1), (2, 3), 1.0),
    ((0, 2), (1, 3), -1.0),
    ((0, 3), (1, 2), 1.0),
    ((1, 2), (0, 3), 1.0),
    ((1, 3), (0, 2), -1.0),
    ((2, 3), (0, 1), 1.0),
]


def increasing_tuples(d: int, k: int) -> list[tuple[int, ...]]:
    return list(combinations(range(d), k))


@dataclass(frozen=True)
class MatrixTwoForm:
    coef: np.ndarray  # (d, d, len(pairs))
    pairs: tuple[tuple[int, int], ...]

    @property
    def d(self) -> int:
        return self.coef.shape[0]

    @classmethod
    def from_components(cls, R: np.ndarray) -> "MatrixTwoForm":
        """From ``R[a, b, mu, nu] = R(e_mu, e_nu)^a_b`` (antisymmetric in ``mu, nu``)."""
        pairs = tuple(increasing_tuples(R.shape[0], 2))
        coef = np.stack([R[:, :, i, j] for i, j in pairs], axis=-1) if pairs else np.zeros(R.shape[:2] + (0,))
        return cls(coef, pairs)

    def components(self) -> np.ndarray:
        d = self.d
        R = np.zeros((d, d, d, d))
        for p, (i, j) in enumerate(self.pairs):
            R[:, :, i, j] = self.coef[:, :, p]
            R[:, :, j, i] = -self.coef[:, :, p]
        return R

    def conjugate(self, P: np.ndarray) -> "MatrixTwoForm":
        """``P R P^-1`` on the endomorphism indices."""
        return MatrixTwoForm(np.einsum("ab,bcp,cd->adp", P, self.coef, np.linalg.inv(P)), self.pairs)

    def scaled(self, c: float) -> "MatrixTwoForm":
        return MatrixTwoForm(c * self.coef, self.pairs)


@dataclass(frozen=True)
class FormComponent:
    """Homogeneous real form; the true value is ``phase * coef``."""

    degree: int
    coef: np.ndarray
    indices: tuple[tuple[int, ...], ...]
    phase: complex = 1.0
    beyond_dimension: bool = False

    def max_abs(self) -> float:
        return float(np.abs(self.coef).max()) if self.coef.size else 0.0

    def as_dict(self) -> dict:
        return {
            "degree": self.degree,
            "coef": self.coef.tolist(),
            "indices": [list(t) for t in self.indices],
            "phase": [float(np.real(self.phase)), float(np.imag(self.phase))],
            "beyond_dimension": self.beyond_dimension,
        }


@dataclass(frozen=True)
class FormPolynomial:
    components: tuple[FormComponent, ...]

    def degree(self, k: int) -> FormComponent:
        for c in self.components:
            if c.degree == k:
                return c
        raise KeyError(k)


def assemble_curvature_form(curv: CurvatureBlocks, dims: Dims | None = None) -> MatrixTwoForm:
    """Place the six blocks into the full matrix 2-form; other slots are zero."""
    if dims is not None and (dims.n, dims.m) != (curv.n, curv.m):
        raise ValueError("dimensions disagree with the curvature blocks")
    # block order R^a_{b c d} is (R(e_d, e_c) e_b)^a
    return MatrixTwoForm.from_components(curv.to_full().transpose(0, 1, 3, 2))


def blocks_from_form(R: MatrixTwoForm, n: int) -> CurvatureBlocks:
    return CurvatureBlocks.from_full(R.components().transpose(0, 1, 3, 2), n)


def wedge_trace(A: MatrixTwoForm, B: MatrixTwoForm) -> FormComponent:
    """``tr(A ^ B)`` as a 4-form by shuffle sums over increasing quadruples."""
    d = A.d
    quads = increasing_tuples(d, 4)
    pos = {pair: p for p, pair in enumerate(A.pairs)}
    # tr(A_p B_q) for all pairs p, q
    T = np.einsum("abp,baq->pq", A.coef, B.coef)
    out = np.zeros(len(quads))
    for k, quad in enumerate(quads):
        for left, right, sign in _SHUFFLES:
            p = pos[(quad[left[0]], quad[left[1]])]
            q = pos[(quad[right[0]], quad[right[1]])]
            out[k] += sign * T[p, q]
    return FormComponent(4, out, tuple(quads))


def trace_powers(R: MatrixTwoForm, k: int) -> FormComponent:
    """``tr R`` (k = 1) or ``tr(R ^ R)`` (k = 2)."""
    if k not in (1, 2):
        raise ValueError("only k = 1 and k = 2 are supported")
    if 2 * k > R.d:
        return FormComponent(2 * k, np.zeros(0), (), beyond_dimension=True)
    if k == 1:
        return FormComponent(2, np.einsum("aap->p", R.coef), R.pairs)
    return wedge_trace(R, R)


def brute_force_trace2(R: MatrixTwoForm) -> FormComponent:
    """``tr(R ^ R)`` from the fully antisymmetrized quadruple sum."""
    from itertools import permutations

    comps = R.components()
    quads = increasing_tuples(R.d, 4)
    out = np.zeros(len(quads))
    for k, quad in enumerate(quads):
        total = 0.0
        for perm in permutations(range(4)):
            s = _perm_sign(perm)
            a, b, c, e = (quad[i] for i in perm)
            total += s * np.einsum("ab,ba->", comps[:, :, a, b], comps[:, :, c, e])
        out[k] = total / 4.0
    return FormComponent(4, out, tuple(quads))


def _perm_sign(perm) -> float:
    perm = list(perm)
    sign = 1.0
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def chern_character(R: MatrixTwoForm, dims: Dims | None = None) -> FormPolynomial:
    """``ch_k = tr(R^k) / (k! (2 pi)^k)`` with phase ``(-i)^k`` kept apart."""
    d = R.d if dims is None else dims.total
    parts = [FormComponent(0, np.array([float(d)]), ((),))]
    for k in (1, 2):
        tr = trace_powers(R, k)
        scale = 1.0 / (math.factorial(k) * (2 * math.pi) ** k)
        parts.append(FormComponent(2 * k, scale * tr.coef, tr.indices, (-1j) ** k, tr.beyond_dimension))
    return FormPolynomial(tuple(parts))


A_HAT_SIGN = -1.0


def a_hat_degree4(R: MatrixTwoForm) -> FormComponent:
    """Degree-4 part of ``det^(1/2)((R~/2) / sinh(R~/2))`` with ``R~ = R / 2 pi``.

    ``log((z/2)/sinh(z/2)) = -z^2/24 + ...`` so the 4-form is
    ``-tr(R~ ^ R~) / 48``.
    """
    tr = trace_powers(R, 2)
    return FormComponent(4, A_HAT_SIGN * tr.coef / (48.0 * (2 * math.pi) ** 2), tr.indices, 1.0, tr.beyond_dimension)
