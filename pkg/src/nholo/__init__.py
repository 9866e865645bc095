"""Nonholonomic geometry on manifolds with a nonlinear connection splitting.

Jets of user expressions drive N-connections, d-metrics, d-connections,
their torsion and curvature, Lagrange-Finsler constructions and low-degree
characteristic forms.
"""

from .expr import Dims, parse, evaluate_jet
from .nconn import NConnection
from .dmetric import DMetric, AnsatzMetric
from .geometry import PointGeometry
from .lagrange import LagrangeProblem

__all__ = ["Dims", "parse", "evaluate_jet", "NConnection", "DMetric", "AnsatzMetric", "PointGeometry", "LagrangeProblem"]
