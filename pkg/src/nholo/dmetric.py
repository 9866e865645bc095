"""d-metrics, the off-diagonal coordinate ansatz, and N-connection extraction."""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

from . import jets
from .expr import Dims
from .fields import ConstantField, as_field, check_point
from .jets import Jet
from .nconn import NConnection, coframe_matrix, frame_matrix

__all__ = [
    "DegenerateMetricError",
    "DMetric",
    "AnsatzMetric",
    "eta_dmetric",
    "to_ansatz",
    "extract_nconnection",
    "block_orthogonality_residual",
    "checked_inverse",
    "NONDEGENERACY_EPS",
]

NONDEGENERACY_EPS = 1e-10


class DegenerateMetricError(ArithmeticError):
    pass


def checked_inverse(matrix: np.ndarray, what: str = "metric block", eps: float = NONDEGENERACY_EPS):
    """Inverse via LU with partial pivoting; small pivots count as degenerate."""
    matrix = np.asarray(matrix, dtype=float)
    with warnings.catch_warnings():
        # exact zero pivots are reported below as a degeneracy error
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(matrix, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= eps or abs(np.prod(np.diag(lu))) <= eps:
        raise DegenerateMetricError(f"{what} is degenerate (smallest pivot {pivots.min():.3e})")
    return scipy.linalg.lu_solve((lu, piv), np.eye(len(matrix)))


def checked_inverse_jet(matrix: Jet, what: str = "metric block") -> Jet:
    checked_inverse(matrix.value, what)
    return jets.inv(matrix)


def _check_symmetric(field, name):
    sources = getattr(field, "nodes", None)
    if sources is None:
        return
    k = field.shape[0]
    for i in range(k):
        for j in range(i + 1, k):
            if sources[i, j] != sources[j, i]:
                raise ValueError(f"{name} is not symmetric: entries ({i + 1},{j + 1}) and ({j + 1},{i + 1}) differ")


class DMetric:
    """Block pair ``(g_ij, h_ab)`` adapted to an ``(n, m)`` splitting."""

    def __init__(self, g, h, dims: Dims, signature=None):
        self.dims = dims
        self.g = as_field(g, dims, (dims.n, dims.n))
        self.h = as_field(h, dims, (dims.m, dims.m))
        _check_symmetric(self.g, "g")
        _check_symmetric(self.h, "h")
        self.signature = None if signature is None else tuple(int(s) for s in signature)

    def blocks(self, point, order: int) -> tuple[Jet, Jet]:
        point = check_point(point, self.dims)
        g = self.g.jet(point, order)
        h = self.h.jet(point, order)
        checked_inverse(g.value, "h-block g_ij")
        checked_inverse(h.value, "v-block h_ab")
        return g, h

    def at(self, point) -> tuple[np.ndarray, np.ndarray]:
        g, h = self.blocks(point, 0)
        return g.value, h.value

    def __repr__(self):
        return f"DMetric(n={self.dims.n}, m={self.dims.m})"


def eta_dmetric(signature, dims: Dims) -> DMetric:
    """Constant (pseudo-)Euclidean d-metric from a list of +-1 entries."""
    signature = [int(s) for s in signature]
    if len(signature) != dims.total or any(s not in (-1, 1) for s in signature):
        raise ValueError(f"signature must be {dims.total} entries of +1/-1")
    g = ConstantField(np.diag(signature[: dims.n]).astype(float), dims)
    h = ConstantField(np.diag(signature[dims.n :]).astype(float), dims)
    return DMetric(g, h, dims, signature=signature)


class AnsatzMetric:
    """Full ``(n+m) x (n+m)`` metric in the coordinate basis."""

    def __init__(self, entries, dims: Dims):
        self.dims = dims
        self.field = as_field(entries, dims, (dims.total, dims.total))
        _check_symmetric(self.field, "ansatz metric")

    def jet(self, point, order: int) -> Jet:
        return self.field.jet(check_point(point, self.dims), order)

    def at(self, point) -> np.ndarray:
        return self.jet(point, 0).value

    def split(self) -> tuple[DMetric, NConnection]:
        """The d-metric and N-connection encoded by this ansatz, as fields."""
        dims = self.dims
        return (
            DMetric(_AnsatzPart(self, "g"), _AnsatzPart(self, "h"), dims),
            NConnection(_AnsatzPart(self, "N"), dims),
        )


class _AnsatzPart:
    """Derived field: one piece of the algebraic split of an ansatz."""

    def __init__(self, ansatz: AnsatzMetric, part: str):
        self.ansatz = ansatz
        self.dims = ansatz.dims
        self.part = part
        n, m = self.dims.n, self.dims.m
        self.shape = {"g": (n, n), "h": (m, m), "N": (m, n)}[part]

    def jet(self, point, order: int) -> Jet:
        G = self.ansatz.jet(point, order)
        return split_jet(G, self.dims.n)[{"N": 0, "g": 1, "h": 2}[self.part]]


def split_jet(G: Jet, n: int) -> tuple[Jet, Jet, Jet]:
    """``(N, g, h)`` jets from a coordinate-basis metric jet."""
    h = G[n:, n:]
    hinv = checked_inverse_jet(h, "v-block of the ansatz")
    N = jets.einsum("ba,ia->bi", hinv, G[:n, n:])
    g = G[:n, :n] - jets.einsum("ai,aj->ij", N, jets.einsum("ab,bj->aj", h, N))
    return N, g, h


def to_ansatz(g: DMetric, N: NConnection, point) -> np.ndarray:
    """Coordinate metric ``[[g + N^T h N, N^T h], [h N, h]]`` at ``point``."""
    if g.dims != N.dims:
        raise ValueError("metric and N-connection dimensions disagree")
    gv, hv = g.at(point)
    Nv = N.jet(point, 0).value
    C = coframe_matrix(Nv)
    G = np.zeros((g.dims.total,) * 2)
    G[: g.dims.n, : g.dims.n] = gv
    G[g.dims.n :, g.dims.n :] = hv
    return C @ G @ C.T


def extract_nconnection(ansatz, point, dims: Dims | None = None):
    """``(N, g, h)`` values with ``N^b_i = h^{ab} g_ia`` from a coordinate metric.

    ``ansatz`` is an :class:`AnsatzMetric` or an explicit matrix (then
    ``dims`` is required).
    """
    if isinstance(ansatz, AnsatzMetric):
        G = ansatz.at(point)
        dims = ansatz.dims
    else:
        G = np.asarray(ansatz, dtype=float)
        if dims is None:
            raise ValueError("dims required for a bare matrix")
    n = dims.n
    h = G[n:, n:]
    hinv = checked_inverse(h, "v-block of the ansatz")
    N = hinv @ G[n:, :n]  # N[b, i] = h^{ba} g_{ai}
    g = G[:n, :n] - N.T @ h @ N
    return N, g, h


def block_orthogonality_residual(ansatz, N: NConnection, point) -> float:
    """``max |g(e_i, d_a)|``; zero iff ``N`` is the metric's own N-connection."""
    G = ansatz.at(point) if isinstance(ansatz, AnsatzMetric) else np.asarray(ansatz, float)
    n = N.dims.n
    E = frame_matrix(N.jet(point, 0).value)
    mixed = E[:n] @ G[:, n:]
    return float(np.abs(mixed).max())
