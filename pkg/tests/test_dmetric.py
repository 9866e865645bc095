import numpy as np
import pytest

from nholo.dmetric import (
    AnsatzMetric,
    DegenerateMetricError,
    DMetric,
    block_orthogonality_residual,
    checked_inverse,
    eta_dmetric,
    extract_nconnection,
    to_ansatz,
)
from nholo.expr import Dims
from nholo.instances import random_instance
from nholo.nconn import NConnection, frame_matrix

D11 = Dims(1, 1)


def test_to_ansatz_examples():
    g = DMetric([["1"]], [["1"]], D11)
    assert np.allclose(to_ansatz(g, NConnection([["0.7"]], D11), [0, 0]), [[1.49, 0.7], [0.7, 1.0]])
    gd = DMetric([["2"]], [["3+x1^2"]], D11)
    G = to_ansatz(gd, NConnection.zero(D11), [1.0, 0.0])
    assert np.array_equal(G, np.diag([2.0, 4.0]))


def test_extract_inverts_the_example():
    N, g, h = extract_nconnection([[1.49, 0.7], [0.7, 1.0]], None, D11)
    assert N[0, 0] == pytest.approx(0.7, abs=1e-15)
    assert g[0, 0] == pytest.approx(1.0, abs=1e-15)
    assert h[0, 0] == 1.0
    N, _, _ = extract_nconnection(np.diag([1.0, 2.0, 3.0]), None, Dims(2, 1))
    assert not N.any()


def test_orthogonality_residual_examples():
    G = np.array([[1.49, 0.7], [0.7, 1.0]])
    assert block_orthogonality_residual(G, NConnection.zero(D11), [0, 0]) == pytest.approx(0.7)
    assert block_orthogonality_residual(G, NConnection([["0.7"]], D11), [0, 0]) < 1e-12
    assert block_orthogonality_residual(np.diag([2.0, 5.0]), NConnection.zero(D11), [0, 0]) == 0.0


@pytest.mark.parametrize("seed", range(30))
def test_round_trip_and_frame_consistency(seed):
    inst = random_instance(seed)
    g, N, p = inst.metric, inst.nconnection, inst.point
    G = to_ansatz(g, N, p)
    gv, hv = g.at(p)
    assert np.linalg.det(G) == pytest.approx(np.linalg.det(gv) * np.linalg.det(hv), rel=1e-10)
    Nx, gx, hx = extract_nconnection(G, None, inst.dims)
    assert np.abs(Nx - N.jet(p, 0).value).max() < 1e-10
    assert np.abs(gx - gv).max() < 1e-10
    # the adapted frame diagonalizes the ansatz
    E = frame_matrix(Nx)
    n = inst.dims.n
    blocks = E @ G @ E.T
    assert np.abs(blocks[:n, :n] - gv).max() < 1e-10
    assert np.abs(blocks[n:, n:] - hv).max() < 1e-10
    assert np.abs(blocks[:n, n:]).max() < 1e-10


def test_ansatz_split_gives_fields():
    ansatz = AnsatzMetric([["2+x1^2*y1^2", "x1*y1"], ["x1*y1", "1"]], Dims(1, 1))
    metric, N = ansatz.split()
    J = N.jet([0.3, 0.5], 1)
    assert J.value[0, 0] == pytest.approx(0.15)
    assert J.derivative(1)[0, 0] == pytest.approx(0.3)
    assert metric.at([0.3, 0.5])[0][0, 0] == pytest.approx(2.0)


def test_degeneracy_and_pseudo_riemannian_signatures():
    with pytest.raises(DegenerateMetricError):
        DMetric([["x1"]], [["1"]], D11).at([0.0, 0.0])
    with pytest.raises(DegenerateMetricError):
        checked_inverse(np.array([[1.0, 1.0], [1.0, 1.0]]))
    # indefinite but regular: LU with pivoting copes
    inv = checked_inverse(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.array_equal(inv, [[0.0, 1.0], [1.0, 0.0]])
    eta = eta_dmetric([1, -1, 1], Dims(2, 1))
    gv, hv = eta.at([0, 0, 0])
    assert np.array_equal(gv, np.diag([1.0, -1.0])) and hv[0, 0] == 1.0


def test_structural_symmetry_is_enforced():
    with pytest.raises(ValueError, match="not symmetric"):
        DMetric([["1", "x1"], ["x2", "1"]], [["1"]], Dims(2, 1))
