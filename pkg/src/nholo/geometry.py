"""Jets of ``(N, g, h)`` at one point, plus the frame quantities built on them."""

from __future__ import annotations

from functools import cached_property

import numpy as np

from . import jets
from .dmetric import DMetric, checked_inverse_jet
from .expr import Dims
from .fields import check_point
from .jets import Jet
from .nconn import NConnection, anholonomy_from_jet, curvature_from_jet, frame_grad

__all__ = ["PointGeometry"]

# curvature needs first derivatives of connection coefficients, which need
# second derivatives of g, h and N
DEFAULT_ORDER = 2


class PointGeometry:
    """Everything the connection/curvature kernels need at a point.

    ``N``, ``g`` and ``h`` are jets of one common order ``K``; derived
    quantities carry the order they can support (``K - 1`` for anything
    involving a frame derivative).
    """

    def __init__(self, dims: Dims, N: Jet, g: Jet, h: Jet, point=None):
        order = min(N.order, g.order, h.order)
        self.dims = dims
        self.N = N.truncate(order)
        self.g = g.truncate(order)
        self.h = h.truncate(order)
        self.order = order
        self.point = None if point is None else np.asarray(point, dtype=float)

    @classmethod
    def from_fields(cls, metric: DMetric, nconn: NConnection, point, order: int = DEFAULT_ORDER):
        if metric.dims != nconn.dims:
            raise ValueError("metric and N-connection dimensions disagree")
        point = check_point(point, metric.dims)
        g, h = metric.blocks(point, order)
        return cls(metric.dims, nconn.jet(point, order), g, h, point)

    @property
    def n(self) -> int:
        return self.dims.n

    @property
    def m(self) -> int:
        return self.dims.m

    @cached_property
    def g_inv(self) -> Jet:
        return checked_inverse_jet(self.g, "h-block g_ij")

    @cached_property
    def h_inv(self) -> Jet:
        return checked_inverse_jet(self.h, "v-block h_ab")

    @cached_property
    def metric(self) -> Jet:
        """Block-diagonal frame metric ``diag(g, h)``."""
        n, d = self.n, self.dims.total
        G = jets.zeros((d, d), self.g.dim, self.order)
        G.coef[:n, :n] = self.g.coef
        G.coef[n:, n:] = self.h.coef
        return G

    @cached_property
    def metric_inv(self) -> Jet:
        n, d = self.n, self.dims.total
        G = jets.zeros((d, d), self.g.dim, self.order)
        G.coef[:n, :n] = self.g_inv.coef
        G.coef[n:, n:] = self.h_inv.coef
        return G

    def e(self, F: Jet) -> Jet:
        """Frame derivatives ``e_mu F`` on a new trailing axis."""
        return frame_grad(F, self.N, self.n)

    @cached_property
    def eg(self) -> Jet:
        return self.e(self.g)

    @cached_property
    def eh(self) -> Jet:
        return self.e(self.h)

    @cached_property
    def dN_vertical(self) -> Jet:
        """``dNv[a, k, b] = d N^a_k / d y^b`` (equal to ``e_b N^a_k``)."""
        return self.N.grad()._wrap(self.N.grad().coef[..., self.n :, :])

    @cached_property
    def omega(self) -> Jet:
        return curvature_from_jet(self.N, self.n)

    @cached_property
    def anholonomy(self) -> Jet:
        return anholonomy_from_jet(self.N, self.n)
