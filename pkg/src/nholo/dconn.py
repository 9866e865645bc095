"""d-connections: canonical, Berwald, Levi-Civita in the adapted frame.

Connections are stored as full-frame coefficient jets
``gamma[a, b, c] = (D_{e_c} e_b)^a``: the last index is the direction of
differentiation. The four d-connection blocks are slices of it::

    L^i_jk = gamma[h, h, h]    L^a_bk = gamma[v, v, h]
    C^i_jc = gamma[h, h, v]    C^a_bc = gamma[v, v, v]
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .dmetric import DMetric
from .geometry import PointGeometry
from .jets import Jet
from .nconn import NConnection

__all__ = [
    "FrameConnection",
    "DConnection",
    "FullFrameConnection",
    "MetricityResidual",
    "Distortion",
    "canonical_dconnection",
    "berwald_dconnection",
    "levi_civita_adapted",
    "distortion",
    "metricity_residual",
    "canonical_gamma",
    "berwald_gamma",
    "levi_civita_gamma",
    "custom_dconnection",
]


@dataclass(frozen=True)
class FrameConnection:
    """Connection coefficients in the N-adapted frame, as jets."""

    n: int
    m: int
    gamma: Jet
    kind: str

    @property
    def coefficients(self) -> np.ndarray:
        return self.gamma.value

    def _block(self, up, low, direction):
        n = self.n
        sl = {"h": slice(0, n), "v": slice(n, None)}
        return self.gamma.value[sl[up], sl[low], sl[direction]]

    @property
    def L_h(self) -> np.ndarray:
        """``L^i_jk``, shape ``(n, n, n)``."""
        return self._block("h", "h", "h")

    @property
    def L_v(self) -> np.ndarray:
        """``L^a_bk``, shape ``(m, m, n)``."""
        return self._block("v", "v", "h")

    @property
    def C_h(self) -> np.ndarray:
        """``C^i_jc``, shape ``(n, n, m)``."""
        return self._block("h", "h", "v")

    @property
    def C_v(self) -> np.ndarray:
        """``C^a_bc``, shape ``(m, m, m)``."""
        return self._block("v", "v", "v")

    def blocks(self) -> dict[str, np.ndarray]:
        return {"L_h": self.L_h, "L_v": self.L_v, "C_h": self.C_h, "C_v": self.C_v}


class DConnection(FrameConnection):
    """A connection preserving the h/v splitting (mixed coefficients vanish)."""


class FullFrameConnection(FrameConnection):
    """A general linear connection written in the adapted frame."""


def _assemble(n: int, m: int, L_h: Jet, L_v: Jet, C_h: Jet, C_v: Jet) -> Jet:
    order = min(x.order for x in (L_h, L_v, C_h, C_v))
    dim = L_h.dim
    gamma = jets.zeros((n + m,) * 3, dim, order)
    gamma.coef[:n, :n, :n] = L_h.truncate(order).coef
    gamma.coef[n:, n:, :n] = L_v.truncate(order).coef
    gamma.coef[:n, :n, n:] = C_h.truncate(order).coef
    gamma.coef[n:, n:, n:] = C_v.truncate(order).coef
    return gamma


def _h_directions(jet: Jet, n: int) -> Jet:
    return jet._wrap(jet.coef[..., :n, :])


def _v_directions(jet: Jet, n: int) -> Jet:
    return jet._wrap(jet.coef[..., n:, :])


def _christoffel_like(inverse: Jet, A: Jet) -> Jet:
    """``1/2 inv^{ir} (A[j,r,k] + A[k,r,j] - A[j,k,r])`` for ``A[j,r,k] = e_k g_jr``."""
    combo = A + A.transpose(2, 1, 0) - A.transpose(0, 2, 1)
    return 0.5 * jets.einsum("ir,jrk->ijk", inverse, combo)


def canonical_blocks(geo: PointGeometry, vv_variant: str = "symmetric"):
    """The four canonical blocks as jets.

    ``vv_variant="printed"`` reproduces the vertical formula with the middle
    term ``e_c h_cd`` (free index ``c``) instead of ``e_b h_cd``; it is kept
    only to demonstrate that it breaks vertical metricity.
    """
    n = geo.n
    A_h = _h_directions(geo.eg, n)  # A_h[j, r, k] = e_k g_jr
    L_h = _christoffel_like(geo.g_inv, A_h)

    dNv = geo.dN_vertical  # dNv[a, k, b] = e_b N^a_k
    eh_h = _h_directions(geo.eh, n)  # eh_h[b, c, k] = e_k h_bc
    h = geo.h
    inner = (
        eh_h
        - jets.einsum("dc,dkb->bck", h, dNv)
        - jets.einsum("db,dkc->bck", h, dNv)
    )
    L_v = dNv.transpose(0, 2, 1) + 0.5 * jets.einsum("ac,bck->abk", geo.h_inv, inner)

    C_h = 0.5 * jets.einsum("ik,jkc->ijc", geo.g_inv, _v_directions(geo.eg, n))

    A_v = _v_directions(geo.eh, n)  # A_v[b, d, c] = e_c h_bd
    if vv_variant == "symmetric":
        C_v = _christoffel_like(geo.h_inv, A_v)
    elif vv_variant == "printed":
        # e_c h_cd with c free: diagonal of A_v in its first and last slot
        diag = np.einsum("cdcz->dcz", A_v.coef)
        middle = A_v._wrap(np.broadcast_to(diag, A_v.coef.shape).copy())
        combo = A_v + middle - A_v.transpose(0, 2, 1)
        C_v = 0.5 * jets.einsum("ad,bdc->abc", geo.h_inv, combo)
    else:
        raise ValueError(f"unknown vv_variant {vv_variant!r}")
    return L_h, L_v, C_h, C_v


def canonical_gamma(geo: PointGeometry, vv_variant: str = "symmetric") -> Jet:
    return _assemble(geo.n, geo.m, *canonical_blocks(geo, vv_variant))


def berwald_gamma(geo: PointGeometry) -> Jet:
    L_h, _, C_h, C_v = canonical_blocks(geo)
    L_v = geo.dN_vertical.transpose(0, 2, 1)
    return _assemble(geo.n, geo.m, L_h, L_v, 0.0 * C_h, C_v)


def levi_civita_gamma(geo: PointGeometry) -> Jet:
    """Koszul formula in the anholonomic frame, all ``(n+m)^3`` coefficients."""
    G = geo.metric
    A = geo.e(G)  # A[p, q, r] = e_r G_pq
    W = geo.anholonomy.truncate(A.order)
    Wl = jets.einsum("lab,lr->rab", W, G)  # lowered: Wl[r, a, b] = W^l_ab G_lr
    low = 0.5 * (
        A.transpose(1, 0, 2)
        + A.transpose(1, 2, 0)
        - A.transpose(2, 1, 0)
        + Wl.transpose(0, 2, 1)
        - Wl.transpose(2, 1, 0)
        + Wl.transpose(1, 0, 2)
    )  # low[g, b, a] = g(nabla_a e_b, e_g)
    return jets.einsum("mg,gba->mba", geo.metric_inv, low)


def _geometry(g, N, point) -> PointGeometry:
    if isinstance(g, PointGeometry):
        return g
    return PointGeometry.from_fields(g, N, point)


def canonical_dconnection(g: DMetric, N: NConnection = None, point=None, vv_variant: str = "symmetric") -> DConnection:
    """Unique metric d-connection with vanishing h(hh)- and v(vv)-torsion.

    ``g`` may also be a prepared :class:`PointGeometry`, in which case
    ``N`` and ``point`` are ignored.
    """
    geo = _geometry(g, N, point)
    kind = "canonical" if vv_variant == "symmetric" else f"canonical[{vv_variant}]"
    return DConnection(geo.n, geo.m, canonical_gamma(geo, vv_variant), kind)


def berwald_dconnection(g: DMetric, N: NConnection = None, point=None) -> DConnection:
    geo = _geometry(g, N, point)
    return DConnection(geo.n, geo.m, berwald_gamma(geo), "berwald")


def levi_civita_adapted(g: DMetric, N: NConnection = None, point=None) -> FullFrameConnection:
    geo = _geometry(g, N, point)
    return FullFrameConnection(geo.n, geo.m, levi_civita_gamma(geo), "levi-civita")


def custom_dconnection(n: int, m: int, L_h, L_v, C_h, C_v, dim: int, order: int = 1) -> DConnection:
    """A d-connection with constant frame coefficients."""
    parts = [Jet.constant(np.asarray(x, float), dim, order) for x in (L_h, L_v, C_h, C_v)]
    return DConnection(n, m, _assemble(n, m, *parts), "custom")


# -- residuals ------------------------------------------------------------------


@dataclass(frozen=True)
class MetricityResidual:
    """Max-abs entries of ``D g`` split by metric block and direction.

    ``hh``: ``D_h g``, ``hv``: ``D_v g``, ``vh``: ``D_h h``, ``vv``: ``D_v h``;
    ``mixed`` covers the off-diagonal metric slots (zero for d-connections).
    """

    hh: float
    hv: float
    vh: float
    vv: float
    mixed: float

    def max(self) -> float:
        return max(self.hh, self.hv, self.vh, self.vv, self.mixed)

    def as_dict(self) -> dict[str, float]:
        return {"hh": self.hh, "hv": self.hv, "vh": self.vh, "vv": self.vv, "mixed": self.mixed}


def covariant_metric(gamma: np.ndarray, G: np.ndarray, eG: np.ndarray) -> np.ndarray:
    """``DG[a, b, c] = e_c G_ab - gamma^l_{ac} G_lb - gamma^l_{bc} G_al``."""
    return (
        eG
        - np.einsum("lac,lb->abc", gamma, G)
        - np.einsum("lbc,al->abc", gamma, G)
    )


def metricity_residual(D: FrameConnection, g: DMetric, N: NConnection = None, point=None) -> MetricityResidual:
    geo = _geometry(g, N, point)
    n = geo.n
    DG = np.abs(covariant_metric(D.gamma.value, geo.metric.value, geo.e(geo.metric).value))
    h, v = slice(0, n), slice(n, None)

    def block(a, b, c):
        sub = DG[a, b, c]
        return float(sub.max()) if sub.size else 0.0

    return MetricityResidual(
        hh=block(h, h, h),
        hv=block(h, h, v),
        vh=block(v, v, h),
        vv=block(v, v, v),
        mixed=max(block(h, v, slice(None)), block(v, h, slice(None))),
    )


@dataclass(frozen=True)
class Distortion:
    """Deformation tensor blocks and the check ``canonical = nabla + P``.

    ``P_L_v[a, b, k]`` is ``e_b N^a_k``. In the identity each canonical block
    ``(D_{e_c} e_b)^a`` is matched with ``(nabla_{e_b} e_c)^a``; the two
    orderings differ exactly by the frame bracket ``[e_b, e_c]``.
    """

    P_L_h: np.ndarray
    P_L_v: np.ndarray
    P_C_h: np.ndarray
    P_C_v: np.ndarray
    residual: float


def distortion(g: DMetric, N: NConnection = None, point=None) -> Distortion:
    geo = _geometry(g, N, point)
    n, m = geo.n, geo.m
    hinv_g = geo.g_inv.value
    omega = geo.omega.value  # omega[a, k, j]
    hv = geo.h.value
    P_L_h = np.zeros((n, n, n))
    P_L_v = geo.dN_vertical.value.transpose(0, 2, 1)
    P_C_h = -0.5 * np.einsum("ik,akj,ca->ijc", hinv_g, omega, hv)
    P_C_v = np.zeros((m, m, m))

    canon = canonical_dconnection(geo)
    # the deformation tensor is written against nabla_{e_b} e_c, i.e. the
    # Levi-Civita coefficient with its two lower slots exchanged
    lc = FullFrameConnection(n, m, levi_civita_gamma(geo).transpose(0, 2, 1), "levi-civita[swapped]")
    diffs = [
        canon.L_h - (lc.L_h + P_L_h),
        canon.L_v - (lc.L_v + P_L_v),
        canon.C_h - (lc.C_h + P_C_h),
        canon.C_v - (lc.C_v + P_C_v),
    ]
    residual = max(float(np.abs(x).max()) if x.size else 0.0 for x in diffs)
    return Distortion(P_L_h, P_L_v, P_C_h, P_C_v, residual)
