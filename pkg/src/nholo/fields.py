"""Tensor-valued fields that can be expanded into jets at a point.

Every geometric input (metric blocks, N-connection coefficients) is a field
with a fixed ``shape`` and a ``jet(point, order)`` method. Fields built from
DSL text and fields derived from other fields (e.g. the Hessian of a
Lagrangian) are interchangeable downstream.
"""

from __future__ import annotations

from typing import Protocol

import numpy as np

from .expr import Dims, evaluate_many, parse
from .jets import Jet

__all__ = ["Field", "ExprField", "ConstantField", "as_field"]


class Field(Protocol):
    dims: Dims
    shape: tuple

    def jet(self, point, order: int) -> Jet: ...


class ExprField:
    """Array of DSL expressions (or numbers) over the coordinates ``(x, y)``."""

    def __init__(self, entries, dims: Dims):
        self.dims = dims
        arr = np.array(entries, dtype=object)
        if arr.ndim == 0:
            arr = arr.reshape(())
        self.shape = arr.shape
        self.sources = arr
        self.nodes = np.empty(arr.shape, dtype=object)
        for idx, item in np.ndenumerate(arr):
            self.nodes[idx] = _as_node(item, dims)

    def jet(self, point, order: int) -> Jet:
        return evaluate_many(self.nodes.tolist(), point, order)

    def source_matrix(self):
        return self.sources.tolist()

    def __repr__(self):
        return f"ExprField(shape={self.shape})"


class ConstantField:
    def __init__(self, values, dims: Dims):
        self.dims = dims
        self.values = np.asarray(values, dtype=float)
        self.shape = self.values.shape

    def jet(self, point, order: int) -> Jet:
        return Jet.constant(self.values, len(point), order)


def _as_node(item, dims: Dims):
    if isinstance(item, str):
        return parse(item, dims)
    if isinstance(item, (int, float, np.integer, np.floating)):
        return float(item)
    if item is None:
        raise TypeError("missing field entry")
    return item  # already an expression tree


def as_field(value, dims: Dims, shape: tuple | None = None):
    """Coerce nested lists of text/numbers, or an existing field."""
    if hasattr(value, "jet") and hasattr(value, "shape"):
        field = value
    else:
        field = ExprField(value, dims)
    if shape is not None and tuple(field.shape) != tuple(shape):
        raise ValueError(f"field has shape {field.shape}, expected {shape}")
    return field


def check_point(point, dims: Dims) -> np.ndarray:
    point = np.asarray(point, dtype=float).ravel()
    if point.size != dims.total:
        raise ValueError(f"point has {point.size} coordinates, expected {dims.total}")
    return point

