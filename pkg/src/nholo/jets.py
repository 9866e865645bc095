"""Truncated multivariate jets.

A :class:`Jet` carries the value and every raw partial derivative
``d^k f / dx^kappa`` with ``|kappa| <= order`` at a fixed base point.
Coefficients live on the last array axis, in graded-lexicographic order of
the multi-indices; any leading axes are batch/tensor axes, so a whole
metric or connection can be stored as one jet array.

Because the multi-index list is graded, the jets of order ``k`` are a
prefix of the jets of order ``K > k``: truncation is a slice.
"""

from __future__ import annotations

import itertools
import math
import string
from functools import lru_cache

import numpy as np

__all__ = [
    "Jet",
    "MultiIndexSet",
    "multi_indices",
    "einsum",
    "stack",
    "concatenate",
    "zeros",
    "inv",
    "compose",
]


class MultiIndexSet:
    """All multi-indices of ``dim`` variables with total degree ``<= order``."""

    def __init__(self, dim: int, order: int):
        if dim < 1 or order < 0:
            raise ValueError(f"bad jet layout dim={dim} order={order}")
        self.dim = dim
        self.order = order
        indices = []
        for degree in range(order + 1):
            for combo in itertools.combinations_with_replacement(range(dim), degree):
                kappa = [0] * dim
                for v in combo:
                    kappa[v] += 1
                indices.append(tuple(kappa))
        self.indices = indices
        self.position = {kappa: p for p, kappa in enumerate(indices)}
        self.size = len(indices)
        self.degree = np.array([sum(k) for k in indices])
        self._product_table()
        self._shift_table()

    def _product_table(self):
        # d^kappa(fg) = sum_{lambda <= kappa} binom(kappa, lambda) d^lambda f d^(kappa-lambda) g
        left, right, weight, target = [], [], [], []
        for p, kappa in enumerate(self.indices):
            for lam in itertools.product(*(range(k + 1) for k in kappa)):
                rest = tuple(k - l for k, l in zip(kappa, lam))
                w = 1
                for k, l in zip(kappa, lam):
                    w *= math.comb(k, l)
                left.append(self.position[lam])
                right.append(self.position[rest])
                weight.append(float(w))
                target.append(p)
        self.left = np.array(left)
        self.right = np.array(right)
        self.weight = np.array(weight)
        # target is already sorted because we looped over kappa in order
        target = np.array(target)
        self.starts = np.searchsorted(target, np.arange(self.size))

    def _shift_table(self):
        # shift[v][p] = index of kappa_p + e_v, for kappa_p of degree <= order-1
        if self.order == 0:
            self.shift = None
            return
        lower = multi_indices(self.dim, self.order - 1)
        shift = np.empty((self.dim, lower.size), dtype=int)
        for v in range(self.dim):
            for p, kappa in enumerate(lower.indices):
                bumped = list(kappa)
                bumped[v] += 1
                shift[v, p] = self.position[tuple(bumped)]
        self.shift = shift

    def unit(self, v: int) -> int:
        kappa = [0] * self.dim
        kappa[v] = 1
        return self.position[tuple(kappa)]


@lru_cache(maxsize=None)
def multi_indices(dim: int, order: int) -> MultiIndexSet:
    return MultiIndexSet(dim, order)


def _size(dim: int, order: int) -> int:
    return math.comb(dim + order, order)


class Jet:
    """Array of truncated jets sharing one base point.

    Parameters
    ----------
    coef : ndarray, shape ``(..., P)``
        Raw partial derivatives; ``coef[..., 0]`` is the value.
    dim : int
        Number of independent variables.
    order : int
        Truncation order.
    """

    __slots__ = ("coef", "dim", "order")
    __array_priority__ = 100

    def __init__(self, coef, dim: int, order: int):
        coef = np.asarray(coef, dtype=float)
        if coef.shape[-1:] != (_size(dim, order),):
            raise ValueError(
                f"coefficient axis {coef.shape[-1:]} does not match dim={dim} order={order}"
            )
        self.coef = coef
        self.dim = dim
        self.order = order

    # -- construction -------------------------------------------------------

    @classmethod
    def constant(cls, value, dim: int, order: int) -> "Jet":
        value = np.asarray(value, dtype=float)
        coef = np.zeros(value.shape + (_size(dim, order),))
        coef[..., 0] = value
        return cls(coef, dim, order)

    @classmethod
    def variable(cls, value: float, index: int, dim: int, order: int) -> "Jet":
        """The coordinate function ``u^index`` seeded at ``value``."""
        jet = cls.constant(value, dim, order)
        if order >= 1:
            jet.coef[multi_indices(dim, order).unit(index)] = 1.0
        return jet

    @classmethod
    def coordinates(cls, point, order: int) -> "Jet":
        """Jet array of shape ``(dim,)`` holding every coordinate function."""
        point = np.asarray(point, dtype=float)
        dim = point.size
        coef = np.zeros((dim, _size(dim, order)))
        coef[:, 0] = point
        if order >= 1:
            mi = multi_indices(dim, order)
            for v in range(dim):
                coef[v, mi.unit(v)] = 1.0
        return cls(coef, dim, order)

    # -- inspection ---------------------------------------------------------

    @property
    def shape(self) -> tuple:
        return self.coef.shape[:-1]

    @property
    def ndim(self) -> int:
        return self.coef.ndim - 1

    @property
    def value(self) -> np.ndarray:
        return self.coef[..., 0]

    @property
    def indices(self) -> MultiIndexSet:
        return multi_indices(self.dim, self.order)

    def partial(self, kappa) -> np.ndarray:
        """Raw partial ``d^kappa f``; ``kappa`` is a count per variable."""
        kappa = tuple(kappa)
        if sum(kappa) > self.order:
            raise ValueError(f"partial {kappa} exceeds jet order {self.order}")
        return self.coef[..., self.indices.position[kappa]]

    def derivative(self, *variables: int) -> np.ndarray:
        """Partial with respect to the listed variables, in any order."""
        kappa = [0] * self.dim
        for v in variables:
            kappa[v] += 1
        return self.partial(kappa)

    def __repr__(self):
        return f"Jet(shape={self.shape}, dim={self.dim}, order={self.order})"

    # -- structural ops -----------------------------------------------------

    def _wrap(self, coef, order=None) -> "Jet":
        return Jet(coef, self.dim, self.order if order is None else order)

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError(f"cannot raise jet order {self.order} to {order}")
        if order == self.order:
            return self
        return self._wrap(self.coef[..., : _size(self.dim, order)], order)

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        if any(k is Ellipsis for k in key):
            raise IndexError("Ellipsis indexing is not supported on jets")
        return self._wrap(self.coef[key + (slice(None),)])

    def transpose(self, *axes) -> "Jet":
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        return self._wrap(self.coef.transpose(*axes, self.ndim))

    @property
    def T(self) -> "Jet":
        return self.transpose()

    def reshape(self, *shape) -> "Jet":
        return self._wrap(self.coef.reshape(*shape, self.coef.shape[-1]))

    def sum(self, axis=None) -> "Jet":
        if axis is None:
            axis = tuple(range(self.ndim))
        axes = (axis,) if isinstance(axis, int) else tuple(axis)
        axes = tuple(a % self.ndim for a in axes)
        return self._wrap(self.coef.sum(axis=axes))

    def d(self, v: int) -> "Jet":
        """Partial derivative ``d/du^v``; the result has order ``order - 1``."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        return self._wrap(self.coef[..., self.indices.shift[v]], self.order - 1)

    def grad(self) -> "Jet":
        """All first partials stacked on a new trailing tensor axis."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        shift = self.indices.shift  # (dim, P_lower)
        coef = self.coef[..., shift]  # (..., dim, P_lower)
        return self._wrap(coef, self.order - 1)

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other):
        """Return (a, b) as jets of a common order, or (self, ndarray)."""
        if isinstance(other, Jet):
            if other.dim != self.dim:
                raise ValueError("jets over different variable counts")
            order = min(self.order, other.order)
            return self.truncate(order), other.truncate(order)
        return self, np.asarray(other, dtype=float)

    def __neg__(self):
        return self._wrap(-self.coef)

    def __pos__(self):
        return self

    def __add__(self, other):
        a, b = self._coerce(other)
        if isinstance(b, Jet):
            return a._wrap(a.coef + b.coef)
        coef = np.array(np.broadcast_to(a.coef, np.broadcast_shapes(a.shape, b.shape) + a.coef.shape[-1:]))
        coef[..., 0] += b
        return a._wrap(coef)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._coerce(other)
        if isinstance(b, Jet):
            mi = a.indices
            prod = a.coef[..., mi.left] * b.coef[..., mi.right] * mi.weight
            return a._wrap(np.add.reduceat(prod, mi.starts, axis=-1))
        return a._wrap(a.coef * b[..., None])

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        x = self.value
        if np.any(x == 0.0):
            raise ZeroDivisionError("reciprocal of a jet with zero value")
        k = np.arange(self.order + 1)
        fact = np.array([math.factorial(j) for j in k], dtype=float)
        derivs = ((-1.0) ** k * fact)[:, None] / x.reshape(1, -1) ** (k[:, None] + 1)
        return compose(self, derivs.reshape((self.order + 1,) + x.shape))

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)):
            return self.ipow(int(p))
        return power(self, float(p))

    def ipow(self, p: int) -> "Jet":
        if p < 0:
            return self.ipow(-p).reciprocal()
        result = Jet.constant(np.ones(self.shape), self.dim, self.order)
        base = self
        while p:
            if p & 1:
                result = result * base
            p >>= 1
            if p:
                base = base * base
        return result


def compose(jet: Jet, derivs) -> Jet:
    """Compose a univariate function with ``jet``.

    ``derivs[k]`` is the k-th derivative of the outer function evaluated at
    ``jet.value`` (broadcastable to ``jet.shape``), for ``k = 0..order``.
    """
    derivs = np.asarray(derivs, dtype=float)
    K = jet.order
    out = np.zeros(jet.coef.shape)
    out[..., 0] = derivs[0]
    if K == 0:
        return jet._wrap(out)
    h = jet._wrap(jet.coef.copy())
    h.coef[..., 0] = 0.0
    power_k = h
    for k in range(1, K + 1):
        out += (derivs[k] / math.factorial(k))[..., None] * power_k.coef
        if k < K:
            power_k = power_k * h
    return jet._wrap(out)


def power(jet: Jet, p: float) -> Jet:
    """``jet ** p`` for real ``p``; requires a positive base."""
    x = jet.value
    if np.any(x <= 0.0):
        raise ValueError("real power of a jet with nonpositive value")
    derivs = []
    coeff = 1.0
    for k in range(jet.order + 1):
        derivs.append(coeff * x ** (p - k))
        coeff *= p - k
    return compose(jet, derivs)


_LETTERS = string.ascii_letters


def _coef_letter(subscripts: str) -> str:
    for ch in _LETTERS:
        if ch not in subscripts:
            return ch
    raise ValueError("no free einsum letter")


def einsum(subscripts: str, a, b) -> Jet:
    """Two-operand einsum where either operand may be a jet array.

    Tensor indices follow ``numpy.einsum``; the jet axis is handled as a
    Leibniz product when both operands are jets.
    """
    lhs, out = subscripts.replace(" ", "").split("->")
    sa, sb = lhs.split(",")
    z = _coef_letter(subscripts.replace("...", ""))
    if isinstance(a, Jet) and isinstance(b, Jet):
        a, b = a._coerce(b)
        mi = a.indices
        ca = a.coef[..., mi.left]
        cb = b.coef[..., mi.right] * mi.weight
        prod = np.einsum(f"{sa}{z},{sb}{z}->{out}{z}", ca, cb)
        return a._wrap(np.add.reduceat(prod, mi.starts, axis=-1))
    if isinstance(a, Jet):
        return a._wrap(np.einsum(f"{sa}{z},{sb}->{out}{z}", a.coef, np.asarray(b, float)))
    if isinstance(b, Jet):
        return b._wrap(np.einsum(f"{sa},{sb}{z}->{out}{z}", np.asarray(a, float), b.coef))
    raise TypeError("einsum needs at least one jet operand")


def stack(jets, axis: int = 0) -> Jet:
    jets = list(jets)
    order = min(j.order for j in jets)
    jets = [j.truncate(order) for j in jets]
    ndim = jets[0].ndim + 1
    axis = axis % ndim
    return jets[0]._wrap(np.stack([j.coef for j in jets], axis=axis))


def concatenate(jets, axis: int = 0) -> Jet:
    jets = list(jets)
    order = min(j.order for j in jets)
    jets = [j.truncate(order) for j in jets]
    axis = axis % jets[0].ndim
    return jets[0]._wrap(np.concatenate([j.coef for j in jets], axis=axis))


def zeros(shape, dim: int, order: int) -> Jet:
    return Jet(np.zeros(tuple(shape) + (_size(dim, order),)), dim, order)


def inv(matrix: Jet) -> Jet:
    """Inverse of a square jet matrix (trailing two tensor axes).

    Uses ``(A0 + D)^-1 = sum_k (-A0^-1 D)^k A0^-1`` with ``D`` nilpotent.
    """
    a0 = matrix.value
    a0_inv = np.linalg.inv(a0)
    delta = matrix._wrap(matrix.coef.copy())
    delta.coef[..., 0] = 0.0
    step = -einsum("...ij,...jk->...ik", a0_inv, delta)
    term = Jet.constant(a0_inv, matrix.dim, matrix.order)
    result = term
    for _ in range(matrix.order):
        term = einsum("...ij,...jk->...ik", step, term)
        result = result + term
    return result


def exp(x: Jet) -> Jet:
    v = np.exp(x.value)
    return compose(x, [v] * (x.order + 1))


def log(x: Jet) -> Jet:
    v = x.value
    if np.any(v <= 0.0):
        raise ValueError("log of a nonpositive jet value")
    derivs = [np.log(v)]
    for k in range(1, x.order + 1):
        derivs.append((-1.0) ** (k - 1) * math.factorial(k - 1) / v**k)
    return compose(x, derivs)


def sin(x: Jet) -> Jet:
    s, c = np.sin(x.value), np.cos(x.value)
    cycle = [s, c, -s, -c]
    return compose(x, [cycle[k % 4] for k in range(x.order + 1)])


def cos(x: Jet) -> Jet:
    s, c = np.sin(x.value), np.cos(x.value)
    cycle = [c, -s, -c, s]
    return compose(x, [cycle[k % 4] for k in range(x.order + 1)])


def sinh(x: Jet) -> Jet:
    s, c = np.sinh(x.value), np.cosh(x.value)
    return compose(x, [s if k % 2 == 0 else c for k in range(x.order + 1)])


def cosh(x: Jet) -> Jet:
    s, c = np.sinh(x.value), np.cosh(x.value)
    return compose(x, [c if k % 2 == 0 else s for k in range(x.order + 1)])


def tan(x: Jet) -> Jet:
    return sin(x) / cos(x)


def sqrt(x: Jet) -> Jet:
    return power(x, 0.5)


def atan(x: Jet) -> Jet:
    # atan' = 1 / (1 + t^2); expand that in one variable around each value
    v = np.asarray(x.value, dtype=float)
    derivs = [np.arctan(v)]
    if x.order >= 1:
        t = Jet(np.zeros(v.shape + (x.order,)), 1, x.order - 1)
        t.coef[..., 0] = v
        if x.order >= 2:
            t.coef[..., 1] = 1.0
        inner = (1.0 + t * t).reciprocal()
        derivs.extend(inner.coef[..., k] for k in range(x.order))
    return compose(x, derivs)
