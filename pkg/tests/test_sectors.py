import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import _oracles as oracle
from gategraph import sectors
from gategraph.errors import BadWeight, BudgetExceeded
from gategraph.graph import mu, new_graph
from gategraph.sectors import (BosonBasis, HammingBasis, bose_hubbard, hardcore_restriction, is_frustration_free,
                               lambda1, theta, xy_sector)


@st.composite
def graphs(draw, max_k=6, loops=True):
    K = draw(st.integers(1, max_k))
    bits = draw(st.lists(st.booleans(), min_size=K * K, max_size=K * K))
    A = np.array(bits, dtype=int).reshape(K, K)
    A = np.triu(A, 1)
    A = A + A.T
    if loops:
        A[np.diag_indices(K)] = draw(st.lists(st.integers(0, 1), min_size=K, max_size=K))
    return new_graph(A)


# bases -------------------------------------------------------------------------


def test_hamming_basis_order():
    b = HammingBasis(4, 2)
    assert b.dim == 6
    assert [b.unrank(i) for i in range(6)] == list(itertools.combinations(range(4), 2))
    assert b.bitstrings()[0] == "1100"


def test_boson_basis_matches_p2_example():
    b = BosonBasis(2, 2)
    assert b.occupations().tolist() == [[2, 0], [1, 1], [0, 2]]


@given(st.integers(1, 9), st.integers(0, 5), st.booleans())
def test_rank_unrank_roundtrip(K, N, multiset):
    if not multiset and N > K:
        return
    b = BosonBasis(K, N) if multiset else HammingBasis(K, N)
    expected = math.comb(K + N - 1, N) if multiset else math.comb(K, N)
    assert b.dim == expected
    assert np.array_equal(b.rank(b.positions), np.arange(b.dim))
    for i in range(0, b.dim, max(1, b.dim // 7)):
        assert b.rank(np.array(b.unrank(i))) == i


def test_index_of_occupation():
    b = BosonBasis(3, 2)
    assert b.index_of_occupation([0, 1, 1]) == b.rank(np.array([1, 2]))
    with pytest.raises(BadWeight):
        b.index_of_occupation([1, 0, 0])


def test_budget_guard():
    with pytest.raises(BudgetExceeded):
        BosonBasis(200, 6, max_dim=1000)


def test_bad_weight():
    with pytest.raises(BadWeight):
        xy_sector(new_graph([[0, 1], [1, 0]]), 3)


# XY sector ---------------------------------------------------------------------


def test_xy_p2(P2):
    assert np.array_equal(xy_sector(P2, 1).toarray(), [[0, 1], [1, 0]])
    assert theta(P2, 1) == pytest.approx(-1)
    assert theta(P2, 2) == pytest.approx(0)


def test_xy_single_loop():
    assert xy_sector(new_graph([[1]]), 1).toarray().tolist() == [[1]]


def test_xy_k3(K3):
    assert np.array_equal(xy_sector(K3, 1).toarray(), K3.toarray())
    assert theta(K3, 1) == pytest.approx(-1)
    assert theta(K3, 2) == pytest.approx(-1)


@settings(max_examples=40, deadline=None)
@given(graphs(max_k=6))
def test_xy_is_block_of_full_operator(g):
    A = g.toarray()
    K = g.num_vertices
    full = oracle.full_xy(A)
    weights = np.array([bin(s).count("1") for s in range(2 ** K)])
    assert not np.any(full[weights[:, None] != weights[None, :]])
    for N in range(K + 1):
        idx = oracle.weight_sector_indices(K, N)
        assert np.array_equal(xy_sector(g, N).toarray(), full[np.ix_(idx, idx)])


def test_xy_large_k_fallback(rng):
    A = oracle.random_graph(rng, 70, p=0.05)
    g = new_graph(A)
    a = xy_sector(g, 2).to_sparse()
    b = hardcore_restriction(g, 2).to_sparse()
    assert abs(a - b).max() == 0


# Bose-Hubbard ------------------------------------------------------------------


def test_bh_p2_matrix(P2):
    r2 = math.sqrt(2)
    assert np.allclose(bose_hubbard(P2, 2).toarray(), [[2, r2, 0], [r2, 0, r2], [0, r2, 2]], atol=1e-15)


def test_bh_single_loop():
    assert bose_hubbard(new_graph([[1]]), 2).toarray().tolist() == [[4.0]]


def test_bh_n1_is_adjacency(rng):
    A = oracle.random_graph(rng, 7, loops=True)
    assert np.array_equal(bose_hubbard(new_graph(A), 1).toarray(), A)


def test_lambda1_p2(P2):
    assert lambda1(P2, 2) == pytest.approx(3 - math.sqrt(5), abs=1e-12)


def test_lambda1_k3_against_oracle(K3):
    w = np.linalg.eigvalsh(oracle.symmetrized_bh(K3.toarray(), 2))
    assert lambda1(K3, 2) == pytest.approx(w[0] - 2 * mu(K3), abs=1e-10)


def test_lambda1_n1_is_zero(rng):
    for _ in range(5):
        g = new_graph(oracle.random_graph(rng, 6, loops=True))
        assert abs(lambda1(g, 1)) < 1e-9


def test_n_zero_sector(P2):
    assert xy_sector(P2, 0).toarray().tolist() == [[0.0]]
    assert bose_hubbard(P2, 0).toarray().tolist() == [[0.0]]


@settings(max_examples=30, deadline=None)
@given(graphs(max_k=4), st.integers(1, 3))
def test_bh_matches_first_quantized(g, N):
    ref = oracle.symmetrized_bh(g.toarray(), N)
    ours = bose_hubbard(g, N).toarray()
    assert np.allclose(ours, ref, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(graphs(max_k=6), st.integers(0, 3))
def test_hardcore_equals_xy(g, N):
    if N > g.num_vertices:
        return
    diff = hardcore_restriction(g, N).toarray() - xy_sector(g, N).toarray()
    assert np.abs(diff).max(initial=0.0) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(graphs(max_k=6), st.integers(1, 3))
def test_theta_bounds_lambda(g, N):
    if N > g.num_vertices:
        return
    lam = lambda1(g, N)
    assert lam >= -1e-9
    assert theta(g, N) >= lam + N * mu(g) - 1e-9


def test_frustration_free_examples(P2, rng):
    assert is_frustration_free(P2, 1)
    assert not is_frustration_free(P2, 2)
    empty = new_graph(np.zeros((4, 4), dtype=int))
    assert all(is_frustration_free(empty, N) for N in range(1, 5))


def test_apply_matches_matrix(rng):
    g = new_graph(oracle.random_graph(rng, 8, loops=True))
    op = bose_hubbard(g, 3).shifted(0.5)
    x = rng.standard_normal(op.dim)
    assert np.allclose(op.apply(x), op.toarray() @ x)
    assert np.allclose(op.as_linear_operator() @ x, op.to_sparse() @ x)


def test_export(tmp_path, P2):
    import json

    import scipy.io
    paths = bose_hubbard(P2, 2).export(tmp_path / "bh.mtx")
    M = scipy.io.mmread(str(paths[0])).toarray()
    assert np.allclose(M, bose_hubbard(P2, 2).toarray())
    manifest = json.loads(paths[1].read_text())
    assert manifest["K"] == 2 and manifest["N"] == 2 and manifest["count"] == 3
    assert manifest["ordering"] == sectors.ORDERING


def test_lanczos_path_agrees_with_dense(rng):
    g = new_graph(oracle.random_graph(rng, 14, p=0.3, loops=True))
    op = bose_hubbard(g, 3)
    assert op.dim > 512
    dense = np.linalg.eigvalsh(op.toarray())[0]
    assert op.lowest(1e-10) == pytest.approx(dense, abs=1e-8)
