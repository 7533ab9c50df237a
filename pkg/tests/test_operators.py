import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gcnsmooth import operators as ops
from gcnsmooth.graph import Graph
from oracles import CORPUS, dense, path, random_connected


def test_single_edge_S():
    P = ops.build(path(2), "S")
    assert np.allclose(P.toarray(), [[0.5, 0.5], [0.5, 0.5]], atol=0, rtol=1e-15)


def test_path_S_row():
    P = ops.build(path(3), "S").toarray()
    assert np.allclose(P[1], [1 / 3] * 3, atol=1e-15)


def test_path_T_entry():
    T = ops.build(path(3), "T").toarray()
    assert T[0, 1] == pytest.approx(1 / math.sqrt(6), abs=1e-15)
    assert T[0, 1] == pytest.approx(0.4082483, abs=1e-7)


def test_apply_power_examples():
    S2 = ops.build(path(2), "S")
    assert np.allclose(ops.apply_power(S2, 2, [1, 0]), [0.5, 0.5], atol=1e-15)
    S3 = ops.build(path(3), "S")
    # row 0 of S^2 on the path, dense oracle: (5/12, 5/12, 1/6)
    assert np.allclose(ops.row_of_power(S3, 2, 0), [5 / 12, 5 / 12, 1 / 6], atol=1e-15)
    v = np.array([0.3, -1.0, 2.0])
    assert np.array_equal(ops.apply_power(S3, 0, v), v)


def test_apply_power_errors():
    P = ops.build(path(3), "S")
    with pytest.raises(ValueError, match="dimension"):
        ops.apply_power(P, 1, np.ones(4))
    with pytest.raises(ValueError):
        ops.apply_power(P, -1, np.ones(3))
    with pytest.raises(ValueError):
        ops.build(path(3), "X")


def test_variance_profile_examples():
    vp = ops.variance_profile(ops.build(path(3), "S"), 1)
    assert np.allclose(vp.per_node, [1 / 2, 1 / 3, 1 / 2], atol=1e-15)
    assert vp.total == pytest.approx(4 / 3, abs=1e-15)
    vp = ops.variance_profile(ops.build(path(2), "S"), 3)
    assert np.allclose(vp.per_node, [0.5, 0.5], atol=1e-15)
    assert vp.total == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        ops.variance_profile(ops.build(path(2), "S"), 0)


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_T_L1_total_formula(name):
    g = CORPUS[name]
    d = g.degrees + 1.0
    A = g.adjacency.toarray() + np.eye(g.n)
    expected = sum(A[i, j] / (d[i] * d[j]) for i in range(g.n) for j in range(g.n))
    assert ops.frobenius_sq(ops.build(g, "T"), 1) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("name", sorted(CORPUS))
@pytest.mark.parametrize("kind", ["S", "T"])
def test_dense_oracle(name, kind):
    g = CORPUS[name]
    P = ops.build(g, kind)
    D = dense(g, kind)
    assert np.allclose(P.toarray(), D, atol=1e-15)
    for L in range(1, 6):
        DL = np.linalg.matrix_power(D, L)
        vp = ops.variance_profile(P, L)
        assert np.allclose(vp.per_node, (DL ** 2).sum(axis=1), atol=1e-10, rtol=0)
        assert vp.total == pytest.approx(vp.per_node.sum(), abs=1e-12)


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_sparsity_pattern_and_similarity(name):
    g = CORPUS[name]
    S, T = ops.build(g, "S"), ops.build(g, "T")
    pattern = (g.augmented().toarray() != 0)
    assert np.array_equal(S.toarray() != 0, pattern)
    assert np.array_equal(T.toarray() != 0, pattern)
    h = np.sqrt(g.degrees + 1.0)
    assert np.allclose(T.toarray(), (h[:, None] * S.toarray()) / h[None, :], atol=1e-12, rtol=0)
    for L in range(1, 5):
        SL = np.linalg.matrix_power(S.toarray(), L)
        sim = h[:, None] * SL / h[None, :]
        assert np.allclose(ops.variance_profile(T, L).per_node, (sim ** 2).sum(axis=1), atol=1e-10)


def test_hollow_operators():
    g = path(3)
    H = ops.build(g, "S_hollow").toarray()
    assert np.allclose(H, [[0, 1, 0], [0.5, 0, 0.5], [0, 1, 0]])
    Y = np.array([1.0, 7.0, 3.0])
    assert ops.apply_power(ops.build(g, "S_hollow"), 1, Y)[1] == pytest.approx(2.0)
    HT = ops.build(g, "T_hollow").toarray()
    assert np.allclose(HT.sum(axis=1), 1.0)
    assert np.all(np.diag(HT) == 0)
    # star center: neighbors weighted by 1/sqrt(d_j + 1)
    star_mixed = Graph(4, [(0, 1), (0, 2), (2, 3)])
    row = ops.build(star_mixed, "T_hollow").toarray()[0]
    w = np.array([0, 1 / math.sqrt(2), 1 / math.sqrt(3), 0])
    assert np.allclose(row, w / w.sum())


def test_hollow_isolated_row_is_empty():
    H = ops.build(Graph(3, [(0, 1)]), "S_hollow")
    assert np.diff(H.matrix.indptr)[2] == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 25), st.integers(1, 8))
def test_iterated_properties(seed, n, L):
    rng = np.random.default_rng(seed)
    g = random_connected(n, rng, extra=0.2)
    S, T = ops.build(g, "S"), ops.build(g, "T")
    assert np.allclose(ops.apply_power(S, L, np.ones(n)), 1.0, atol=ops.ITERATED_TOL, rtol=0)
    u, v = rng.standard_normal(n), rng.standard_normal(n)
    assert ops.apply_power(T, L, u) @ v == pytest.approx(u @ ops.apply_power(T, L, v), abs=ops.ITERATED_TOL)


def test_variance_profile_blocks_match_single_rows():
    rng = np.random.default_rng(3)
    g = random_connected(300, rng, extra=0.01)
    P = ops.build(g, "T")
    vp = ops.variance_profile(P, 3)
    for i in (0, 255, 256, 299):
        assert vp.per_node[i] == pytest.approx(ops.node_variance(P, 3, i), rel=1e-12)
