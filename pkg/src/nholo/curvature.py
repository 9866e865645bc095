"""d-torsions, d-curvatures, Ricci/scalar/Einstein tensors and their oracles.

Component formulas work on the d-connection blocks directly. Two
independent routes reproduce them:

* structure equations ``T = de + w ^ e`` and ``R = dw + w ^ w`` evaluated
  with coordinate exterior derivatives of the coframe and connection forms;
* the operator definition ``R(X,Y) = D_X D_Y - D_Y D_X - D_[X,Y]`` with the
  bracket taken as a coordinate Lie bracket of the frame fields.

Slot conventions: the block ``R^a_{b c d}`` equals the frame component
``(R(e_d, e_c) e_b)^a``. The torsion blocks follow the same reversed order
except ``T^a_bi``, which is ``T(e_b, e_i)^a``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .dconn import FrameConnection, canonical_dconnection
from .dmetric import DMetric
from .geometry import PointGeometry
from .jets import Jet
from .nconn import NConnection, coframe_forms, frame_vector_fields, lie_bracket

__all__ = [
    "TorsionBlocks",
    "CurvatureBlocks",
    "RicciBlocks",
    "EinsteinResidual",
    "dtorsion",
    "torsion_via_forms_oracle",
    "dcurvature",
    "curvature_via_forms_oracle",
    "curvature_commutator_oracle",
    "ricci_scalar_einstein",
    "einstein_residual",
    "full_torsion_forms",
]


def _geo(N, point, D: FrameConnection | None = None, order: int = 2) -> PointGeometry:
    """Frame data only (metric blocks are placeholders when not supplied)."""
    if isinstance(N, PointGeometry):
        return N
    if isinstance(N, NConnection):
        Nj = N.jet(point, order)
        dims = N.dims
    else:
        raise TypeError("expected an NConnection or PointGeometry")
    one = Jet.constant(np.eye(dims.n), Nj.dim, Nj.order)
    onev = Jet.constant(np.eye(dims.m), Nj.dim, Nj.order)
    return PointGeometry(dims, Nj, one, onev, point)


def _max(*arrays) -> float:
    return max((float(np.abs(a).max()) if a.size else 0.0) for a in arrays)


# -- torsion --------------------------------------------------------------------


@dataclass(frozen=True)
class TorsionBlocks:
    """``T^i_jk [i,j,k]``, ``T^i_ja [i,j,a]``, ``T^a_ji [a,j,i]``,
    ``T^a_bi [a,b,i]``, ``T^a_bc [a,b,c]``."""

    hhh: np.ndarray
    hhv: np.ndarray
    vhh: np.ndarray
    vvh: np.ndarray
    vvv: np.ndarray

    def as_dict(self) -> dict[str, np.ndarray]:
        return {"T_hhh": self.hhh, "T_hhv": self.hhv, "T_vhh": self.vhh, "T_vvh": self.vvh, "T_vvv": self.vvv}

    def max_difference(self, other: "TorsionBlocks") -> float:
        return _max(*(a - b for a, b in zip(self.as_dict().values(), other.as_dict().values())))

    @classmethod
    def from_full(cls, Tf: np.ndarray, n: int) -> "TorsionBlocks":
        """Blocks from ``Tf[a, r, s] = T(e_r, e_s)^a``."""
        h, v = slice(0, n), slice(n, None)
        return cls(
            hhh=Tf[h, h, h].transpose(0, 2, 1),
            hhv=Tf[h, v, h].transpose(0, 2, 1),
            vhh=Tf[v, h, h].transpose(0, 2, 1),
            vvh=Tf[v, v, h],
            vvv=Tf[v, v, v].transpose(0, 2, 1),
        )


def dtorsion(D: FrameConnection, N, point=None) -> TorsionBlocks:
    """Five d-torsion blocks from the component formulas."""
    geo = _geo(N, point)
    omega = geo.omega.value
    dNv = geo.dN_vertical.value  # [a, i, b] = d N^a_i / d y^b
    return TorsionBlocks(
        hhh=D.L_h - D.L_h.transpose(0, 2, 1),
        hhv=D.C_h.copy(),
        vhh=omega.copy(),
        vvh=dNv.transpose(0, 2, 1) - D.L_v,
        vvv=D.C_v - D.C_v.transpose(0, 2, 1),
    )


def full_torsion_forms(gamma: np.ndarray, N: Jet, n: int) -> np.ndarray:
    """``T(e_r, e_s)^a`` from ``T = de + w ^ e`` in coordinates."""
    C = coframe_forms(N, n)  # C[a, mu] components of e^a
    E = frame_vector_fields(N, n).value  # E[r, mu] components of e_r
    dC = C.grad().value  # dC[a, mu, nu] = d_nu C[a, mu]
    de = dC.transpose(0, 2, 1) - dC  # de[a, mu, nu] = d_mu C_nu - d_nu C_mu
    Cv = C.value
    w = np.einsum("abg,gm->abm", gamma, Cv)  # w[a, b, mu]
    wedge = np.einsum("abm,bn->amn", w, Cv) - np.einsum("abn,bm->amn", w, Cv)
    T = de + wedge
    return np.einsum("amn,rm,sn->ars", T, E, E)


def torsion_via_forms_oracle(D: FrameConnection, N, point=None) -> TorsionBlocks:
    geo = _geo(N, point)
    Tf = full_torsion_forms(D.gamma.value, geo.N, geo.n)
    return TorsionBlocks.from_full(Tf, geo.n)


# -- curvature ------------------------------------------------------------------


@dataclass(frozen=True)
class CurvatureBlocks:
    """Six d-curvature blocks, index order as written:
    ``R^i_hjk``, ``R^a_bjk``, ``R^i_jka``, ``R^c_bka``, ``R^i_jbc``, ``R^a_bcd``."""

    hhhh: np.ndarray
    vvhh: np.ndarray
    hhhv: np.ndarray
    vvhv: np.ndarray
    hhvv: np.ndarray
    vvvv: np.ndarray

    NAMES = ("R_hhhh", "R_vvhh", "R_hhhv", "R_vvhv", "R_hhvv", "R_vvvv")

    @property
    def n(self) -> int:
        return self.hhhh.shape[0]

    @property
    def m(self) -> int:
        return self.vvvv.shape[0]

    def as_dict(self) -> dict[str, np.ndarray]:
        return dict(zip(self.NAMES, (self.hhhh, self.vvhh, self.hhhv, self.vvhv, self.hhvv, self.vvvv)))

    def max_difference(self, other: "CurvatureBlocks") -> float:
        return _max(*(a - b for a, b in zip(self.as_dict().values(), other.as_dict().values())))

    def scaled(self, factor: float) -> "CurvatureBlocks":
        return CurvatureBlocks(*(factor * a for a in self.as_dict().values()))

    @classmethod
    def from_full(cls, R: np.ndarray, n: int) -> "CurvatureBlocks":
        """Blocks from ``R[a, b, c, d]`` in block index order (``(R(e_d, e_c) e_b)^a``)."""
        h, v = slice(0, n), slice(n, None)
        return cls(
            hhhh=R[h, h, h, h].copy(),
            vvhh=R[v, v, h, h].copy(),
            hhhv=R[h, h, h, v].copy(),
            vvhv=R[v, v, h, v].copy(),
            hhvv=R[h, h, v, v].copy(),
            vvvv=R[v, v, v, v].copy(),
        )

    def to_full(self) -> np.ndarray:
        """Full tensor in block index order, antisymmetric in the last pair."""
        n, m = self.n, self.m
        h, v = slice(0, n), slice(n, None)
        R = np.zeros((n + m,) * 4)
        R[h, h, h, h] = self.hhhh
        R[v, v, h, h] = self.vvhh
        R[h, h, h, v] = self.hhhv
        R[h, h, v, h] = -self.hhhv.transpose(0, 1, 3, 2)
        R[v, v, h, v] = self.vvhv
        R[v, v, v, h] = -self.vvhv.transpose(0, 1, 3, 2)
        R[h, h, v, v] = self.hhvv
        R[v, v, v, v] = self.vvvv
        return R


def dcurvature(D: FrameConnection, N, point=None) -> CurvatureBlocks:
    """Six d-curvature blocks from the component formulas.

    ``D.gamma`` must be a jet of order >= 1 (connection coefficients as
    differentiable fields).
    """
    geo = _geo(N, point)
    n = geo.n
    if D.gamma.order < 1:
        raise ValueError("curvature needs connection jets of order >= 1")
    eG = geo.e(D.gamma).value  # eG[a, b, c, mu] = e_mu gamma^a_bc
    h, v = slice(0, n), slice(n, None)
    L, Lv, C, Cv = D.L_h, D.L_v, D.C_h, D.C_v
    omega = geo.omega.value  # omega[a, k, j]
    dNv = geo.dN_vertical.value  # dNv[b, k, a] = d_a N^b_k
    T_vvh = dNv - Lv.transpose(0, 2, 1)  # T^b_ka stored [b, k, a]

    eL = eG[h, h, h, :]  # eL[i, h, j, mu] = e_mu L^i_hj
    eLv = eG[v, v, h, :]
    eC = eG[h, h, v, :]
    eCv = eG[v, v, v, :]

    R1 = (
        eL[:, :, :, h]  # e_k L^i_hj at [i,h,j,k]
        - eL[:, :, :, h].transpose(0, 1, 3, 2)
        + np.einsum("mhj,imk->ihjk", L, L)
        - np.einsum("mhk,imj->ihjk", L, L)
        - np.einsum("iha,akj->ihjk", C, omega)
    )
    R2 = (
        eLv[:, :, :, h]
        - eLv[:, :, :, h].transpose(0, 1, 3, 2)
        + np.einsum("cbj,ack->abjk", Lv, Lv)
        - np.einsum("cbk,acj->abjk", Lv, Lv)
        - np.einsum("abc,ckj->abjk", Cv, omega)
    )
    # D_k C^i_ja = e_k C^i_ja + L^i_lk C^l_ja - L^l_jk C^i_la - L^b_ak C^i_jb
    DkC = (
        eC[:, :, :, h].transpose(0, 1, 3, 2)  # [i, j, k, a]
        + np.einsum("ilk,lja->ijka", L, C)
        - np.einsum("ljk,ila->ijka", L, C)
        - np.einsum("bak,ijb->ijka", Lv, C)
    )
    R3 = (
        eL[:, :, :, v]  # e_a L^i_jk -> [i, j, k, a]
        - DkC
        + np.einsum("ijb,bka->ijka", C, T_vvh)
    )
    DkCv = (
        eCv[:, :, :, h].transpose(0, 1, 3, 2)  # [c, b, k, a]
        + np.einsum("cdk,dba->cbka", Lv, Cv)
        - np.einsum("dbk,cda->cbka", Lv, Cv)
        - np.einsum("dak,cbd->cbka", Lv, Cv)
    )
    R4 = eLv[:, :, :, v] - DkCv + np.einsum("cbd,dka->cbka", Cv, T_vvh)
    R5 = (
        eC[:, :, :, v]  # e_c C^i_jb at [i, j, b, c]
        - eC[:, :, :, v].transpose(0, 1, 3, 2)
        + np.einsum("hjb,ihc->ijbc", C, C)
        - np.einsum("hjc,ihb->ijbc", C, C)
    )
    R6 = (
        eCv[:, :, :, v]
        - eCv[:, :, :, v].transpose(0, 1, 3, 2)
        + np.einsum("ebc,aed->abcd", Cv, Cv)
        - np.einsum("ebd,aec->abcd", Cv, Cv)
    )
    return CurvatureBlocks(R1, R2, R3, R4, R5, R6)


def full_curvature_forms(gamma: Jet, N: Jet, n: int) -> np.ndarray:
    """``R(e_r, e_s)^a_b`` from ``R = dw - w^g_b ^ w^a_g`` in coordinates."""
    C = coframe_forms(N, n)
    E = frame_vector_fields(N, n).value
    w = jets.einsum("abg,gm->abm", gamma, C)  # coordinate connection 1-forms
    dw = w.grad().value  # dw[a, b, mu, nu] = d_nu w[a, b, mu]
    dw = dw.transpose(0, 1, 3, 2) - dw
    wv = w.value
    wedge = np.einsum("gbm,agn->abmn", wv, wv) - np.einsum("gbn,agm->abmn", wv, wv)
    R = dw - wedge
    return np.einsum("abmn,rm,sn->abrs", R, E, E)


def curvature_via_forms_oracle(D: FrameConnection, N, point=None) -> CurvatureBlocks:
    geo = _geo(N, point)
    Rf = full_curvature_forms(D.gamma, geo.N, geo.n)  # Rf[a, b, r, s] = R(e_r, e_s)
    return CurvatureBlocks.from_full(Rf.transpose(0, 1, 3, 2), geo.n)


def full_curvature_commutator(gamma: Jet, N: Jet, n: int) -> np.ndarray:
    """``(D_r D_s e_b - D_s D_r e_b - D_[e_r, e_s] e_b)^a`` as ``[a, b, r, s]``."""
    Efield = frame_vector_fields(N, n)  # E[r, mu]
    Cfield = coframe_forms(N, n)
    E = Efield.value
    # D_s e_b has frame components gamma[:, b, s]; differentiate along e_r
    e_gamma = np.einsum("rk,absk->absr", E, gamma.grad().value)
    G = gamma.value
    DD = e_gamma + np.einsum("alr,lbs->absr", G, G)  # (D_r D_s e_b)^a as [a,b,s,r]
    d = E.shape[0]
    brackets = np.zeros((d, d, d))  # brackets[g, r, s] frame components of [e_r, e_s]
    for r in range(d):
        for s in range(d):
            B = lie_bracket(Efield[r], Efield[s]).value
            brackets[:, r, s] = Cfield.value @ B
    return DD.transpose(0, 1, 3, 2) - DD - np.einsum("grs,abg->abrs", brackets, G)


def curvature_commutator_oracle(D: FrameConnection, N, point=None) -> CurvatureBlocks:
    geo = _geo(N, point)
    Rf = full_curvature_commutator(D.gamma, geo.N, geo.n)
    return CurvatureBlocks.from_full(Rf.transpose(0, 1, 3, 2), geo.n)


# -- Ricci / Einstein -----------------------------------------------------------


@dataclass(frozen=True)
class RicciBlocks:
    R_hh: np.ndarray
    R_hv: np.ndarray
    R_vh: np.ndarray
    R_vv: np.ndarray
    scalar: float
    einstein: np.ndarray

    @property
    def ricci(self) -> np.ndarray:
        return np.block([[self.R_hh, self.R_hv], [self.R_vh, self.R_vv]])


def ricci_scalar_einstein(curv: CurvatureBlocks, g, point=None) -> RicciBlocks:
    """Ricci blocks, scalar curvature and Einstein tensor.

    ``g`` is a :class:`DMetric` (with ``point``), a :class:`PointGeometry`,
    or a pair of block values ``(g_ij, h_ab)``.
    """
    if isinstance(g, PointGeometry):
        gv, hv = g.g.value, g.h.value
    elif isinstance(g, DMetric):
        gv, hv = g.at(point)
    else:
        gv, hv = (np.asarray(x, float) for x in g)
    R_hh = np.einsum("kijk->ij", curv.hhhh)
    R_hv = -np.einsum("kika->ia", curv.hhhv)
    R_vh = np.einsum("baib->ai", curv.vvhv)
    R_vv = np.einsum("cabc->ab", curv.vvvv)
    scalar = float(np.einsum("ij,ij->", np.linalg.inv(gv), R_hh) + np.einsum("ab,ab->", np.linalg.inv(hv), R_vv))
    ricci = np.block([[R_hh, R_hv], [R_vh, R_vv]])
    n, m = gv.shape[0], hv.shape[0]
    G = np.zeros((n + m, n + m))
    G[:n, :n], G[n:, n:] = gv, hv
    return RicciBlocks(R_hh, R_hv, R_vh, R_vv, scalar, ricci - 0.5 * G * scalar)


@dataclass(frozen=True)
class EinsteinResidual:
    h_block: float
    v_block: float
    mixed: float

    @property
    def max(self) -> float:
        return max(self.h_block, self.v_block, self.mixed)


def einstein_residual(g: DMetric, N: NConnection, lambda_h, lambda_v, point) -> EinsteinResidual:
    """Residual of ``En(canonical) - diag(lambda_h g, lambda_v h)``.

    ``lambda_h`` and ``lambda_v`` are numbers or scalar fields (DSL text
    or expression trees), evaluated at ``point``.
    """
    geo = PointGeometry.from_fields(g, N, point)
    D = canonical_dconnection(geo)
    curv = dcurvature(D, geo)
    ric = ricci_scalar_einstein(curv, geo)
    lh, lv = (_scalar_value(lam, g, geo.point) for lam in (lambda_h, lambda_v))
    n = geo.n
    E = ric.einstein
    res_h = E[:n, :n] - lh * geo.g.value
    res_v = E[n:, n:] - lv * geo.h.value
    return EinsteinResidual(_max(res_h), _max(res_v), _max(E[:n, n:], E[n:, :n]))


def _scalar_value(lam, g: DMetric, point) -> float:
    if isinstance(lam, (int, float, np.floating)):
        return float(lam)
    from .fields import as_field

    return float(as_field([lam], g.dims).jet(point, 0).value[0])
