"""N-connections: curvature, adapted frames, anholonomy, frame derivatives.

Index layout used throughout the package: a point is ``u = (x^1..x^n,
y^1..y^m)`` and a full frame index runs over ``0..n+m-1`` with the h-block
first. The N-connection coefficients are stored as ``N[a, i] = N^a_i``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .expr import Dims, evaluate_jet
from .fields import as_field, check_point
from .jets import Jet

__all__ = [
    "NConnection",
    "AdaptedFramePoint",
    "nconnection_curvature",
    "nijenhuis_curvature_oracle",
    "adapted_frames",
    "frame_derivative",
    "frame_grad",
    "curvature_from_jet",
    "anholonomy_from_jet",
    "frame_matrix",
    "coframe_matrix",
    "lie_bracket",
]


class NConnection:
    """Coefficients ``N^a_i(u)`` as an ``m x n`` field."""

    def __init__(self, coefficients, dims: Dims):
        self.dims = dims
        self.field = as_field(coefficients, dims, (dims.m, dims.n))

    @classmethod
    def zero(cls, dims: Dims) -> "NConnection":
        return cls([[0.0] * dims.n for _ in range(dims.m)], dims)

    def jet(self, point, order: int) -> Jet:
        return self.field.jet(check_point(point, self.dims), order)

    def __repr__(self):
        return f"NConnection(n={self.dims.n}, m={self.dims.m})"


@dataclass(frozen=True)
class AdaptedFramePoint:
    """N-adapted frame data at one point.

    ``frame[nu]`` holds the coordinate components of ``e_nu`` (rows are
    vectors) and ``coframe[:, mu]`` those of ``e^mu`` (columns are
    covectors). Both are block upper-triangular and ``frame @ coframe`` is
    the identity. ``anholonomy[g, a, b] = W^g_{ab}`` with
    ``[e_a, e_b] = W^g_{ab} e_g``.
    """

    point: np.ndarray
    frame: np.ndarray
    coframe: np.ndarray
    anholonomy: np.ndarray

    @property
    def duality_residual(self) -> float:
        return float(np.abs(self.frame @ self.coframe - np.eye(len(self.point))).max())


# -- jet-level kernels ----------------------------------------------------------


def _last(jet: Jet, sl) -> Jet:
    return jet._wrap(jet.coef[..., sl, :])


def frame_grad(F: Jet, N: Jet, n: int) -> Jet:
    """``e_mu F`` for every frame direction ``mu``, on a new last tensor axis.

    ``e_i = d_i - N^a_i d_a`` and ``e_a = d_a``; the result has order
    ``F.order - 1``.
    """
    grad = F.grad()
    Nt = N.truncate(grad.order)
    vertical = _last(grad, slice(n, None))
    horizontal = _last(grad, slice(0, n)) - jets.einsum("...a,ai->...i", vertical, Nt)
    return jets.concatenate([horizontal, vertical], axis=-1)


def curvature_from_jet(N: Jet, n: int) -> Jet:
    """``Omega[a, i, j] = d_j N^a_i - d_i N^a_j + N^b_i d_b N^a_j - N^b_j d_b N^a_i``."""
    dN = N.grad()  # dN[a, i, mu] = d_mu N^a_i
    Nt = N.truncate(dN.order)
    dh = _last(dN, slice(0, n))
    dv = _last(dN, slice(n, None))
    A = dh + jets.einsum("bi,ajb->aij", Nt, dv)
    return A - A.transpose(0, 2, 1)  # exactly antisymmetric


def anholonomy_from_jet(N: Jet, n: int) -> Jet:
    """Structure functions ``W[g, a, b]`` of the adapted frame.

    Nonzero blocks: ``[e_i, e_a] = (d_a N^b_i) e_b`` and
    ``[e_i, e_j] = Omega^a_{ij} e_a``.
    """
    m = N.shape[0]
    d = n + m
    dNv = _last(N.grad(), slice(n, None))  # dNv[b, i, a] = d_a N^b_i
    omega = curvature_from_jet(N, n)
    W = np.zeros((d, d, d) + dNv.coef.shape[-1:])
    W[n:, :n, n:] = dNv.coef
    W[n:, n:, :n] = -dNv.coef.transpose(0, 2, 1, 3)
    W[n:, :n, :n] = omega.coef
    return dNv._wrap(W)


def frame_matrix(N: np.ndarray) -> np.ndarray:
    """Rows are the adapted frame vectors in coordinate components."""
    m, n = N.shape
    E = np.eye(n + m)
    E[:n, n:] = -N.T
    return E


def coframe_matrix(N: np.ndarray) -> np.ndarray:
    """Columns are the adapted coframe covectors in coordinate components."""
    m, n = N.shape
    C = np.eye(n + m)
    C[:n, n:] = N.T
    return C


def lie_bracket(X: Jet, Y: Jet) -> Jet:
    """Coordinate bracket ``[X, Y]^mu = X^nu d_nu Y^mu - Y^nu d_nu X^mu``."""
    dX, dY = X.grad(), Y.grad()
    return jets.einsum("n,mn->m", X, dY) - jets.einsum("n,mn->m", Y, dX)


def frame_vector_fields(N: Jet, n: int) -> Jet:
    """Coordinate components of ``e_nu`` as jets, ``E[nu, mu]``."""
    m = N.shape[0]
    E = Jet.constant(np.eye(n + m), N.dim, N.order)
    E.coef[:n, n:] = -N.coef.transpose(1, 0, 2)
    return E


def coframe_forms(N: Jet, n: int) -> Jet:
    """Coordinate components of ``e^alpha`` as jets, ``C[alpha, mu]``."""
    m = N.shape[0]
    C = Jet.constant(np.eye(n + m), N.dim, N.order)
    C.coef[n:, :n] = N.coef
    return C


# -- public operations ----------------------------------------------------------


def nconnection_curvature(N: NConnection, point) -> np.ndarray:
    """``Omega^a_{ij}`` at ``point`` as an ``(m, n, n)`` array."""
    Nj = N.jet(point, 1)
    return curvature_from_jet(Nj, N.dims.n).value


def _vertical_part(V: Jet, N: Jet, n: int) -> Jet:
    """Coordinate components of the v-projection of ``V``."""
    m = N.shape[0]
    comps = _last(V, slice(n, None)) + jets.einsum("ai,i->a", N, _last(V, slice(0, n)))
    zeros = jets.zeros((n,), V.dim, comps.order)
    return jets.concatenate([zeros, comps], axis=-1)


def nijenhuis_curvature_oracle(N: NConnection, i: int, j: int, point) -> np.ndarray:
    """``Omega(e_i, e_j)`` from the bracket definition of the Nijenhuis tensor.

    ``Omega(X, Y) = [vX, vY] + v[X, Y] - v[vX, Y] - v[X, vY]`` with coordinate
    Lie brackets taken on jets. ``i`` and ``j`` are 0-based h-indices; the
    result holds the ``m`` vertical components.
    """
    n = N.dims.n
    Nj = N.jet(point, 2)
    E = frame_vector_fields(Nj, n)
    X, Y = E[i], E[j]
    vX, vY = _vertical_part(X, Nj, n), _vertical_part(Y, Nj, n)
    Nt = Nj.truncate(1)
    omega = (
        lie_bracket(vX, vY)
        + _vertical_part(lie_bracket(X, Y), Nt, n)
        - _vertical_part(lie_bracket(vX, Y), Nt, n)
        - _vertical_part(lie_bracket(X, vY), Nt, n)
    )
    # a vertical vector: coordinate and adapted v-components coincide
    return omega.value[n:]


def adapted_frames(N: NConnection, point) -> AdaptedFramePoint:
    point = check_point(point, N.dims)
    Nj = N.jet(point, 1)
    n = N.dims.n
    return AdaptedFramePoint(
        point=point,
        frame=frame_matrix(Nj.value),
        coframe=coframe_matrix(Nj.value),
        anholonomy=anholonomy_from_jet(Nj, n).value,
    )


def frame_derivative(f, N: NConnection, point) -> np.ndarray:
    """Covector ``e_alpha(f)`` of length ``n + m``.

    ``f`` is an expression tree or DSL text.
    """
    point = check_point(point, N.dims)
    if isinstance(f, str):
        from .expr import parse

        f = parse(f, N.dims)
    F = evaluate_jet(f, point, 1)
    return frame_grad(F, N.jet(point, 1), N.dims.n).value
