import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

import _oracles as oracle
from gategraph import certificates as cert
from gategraph.diagram import new_diagram
from gategraph.errors import EmptyNullspace, NonPositiveInput, NotOrthonormal, NotPSD
from gategraph.transforms import pipeline


def test_gamma_examples():
    r = cert.gamma_of(np.diag([0.0, 0.0, 3.0]))
    assert (r.null_dim, r.gamma) == (2, 3.0)
    r = cert.gamma_of(np.diag([1e-14, 2.0]), 1e-10)
    assert (r.null_dim, r.gamma) == (1, 2.0)


def test_gamma_rejects_negative():
    with pytest.raises(NotPSD):
        cert.gamma_of(np.diag([-1.0, 1.0]))


def test_gamma_element_ground_space(mini):
    A = mini.graph.adjacency.astype(float) - mini.ground_energy * sp.identity(8)
    r = cert.gamma_of(A)
    assert r.null_dim == 4 and r.gamma == pytest.approx(2.0)


def test_nullspace_examples():
    basis = cert.nullspace_basis(np.diag([0.0, 1.0]))
    assert len(basis) == 1 and abs(abs(basis[0][0]) - 1) < 1e-15
    assert cert.nullspace_basis(np.diag([1.0, 2.0])) == []


def test_nullspace_spans_y_space(mini):
    from scipy.linalg import subspace_angles

    from gategraph.diagram import y_space_basis
    d = new_diagram(2, ["1", "1"])
    G, *_ = pipeline(d, mini)
    F = np.column_stack(cert.nullspace_basis(G.adjacency.astype(float) + sp.identity(16)))
    Y = np.column_stack(y_space_basis(d, mini))
    assert F.shape[1] == 8
    assert subspace_angles(F.astype(complex), Y).max() < 1e-8


def test_restrict_examples(rng):
    M = rng.standard_normal((5, 5))
    M = M + M.T
    assert np.allclose(cert.restrict(M, list(np.eye(5))), M)
    assert np.allclose(cert.restrict(np.diag([1.0, 2.0, 3.0]), [np.eye(3)[0], np.eye(3)[1]]), np.diag([1.0, 2.0]))
    with pytest.raises(NotOrthonormal):
        cert.restrict(M, [np.ones(5), np.eye(5)[0]])


def test_variational_examples():
    assert cert.variational_upper(np.diag([0.0, 4.0]), np.diag([1.0, 0.0])) == pytest.approx(1.0)
    assert oracle.gap_dense(np.diag([1.0, 4.0])) == pytest.approx(1.0)
    assert cert.variational_upper(np.zeros((2, 2)), np.diag([2.0, 3.0])) == pytest.approx(2.0)
    with pytest.raises(EmptyNullspace):
        cert.variational_upper(np.eye(2), np.eye(2))


def test_npl_examples():
    assert cert.npl_lower(1, 4, 1) == pytest.approx(0.8)
    assert cert.npl_lower(1, 1e12, 1) == pytest.approx(1.0, rel=1e-11)
    assert cert.npl_lower(0.7, 3.0, 0.0) == 0.7
    with pytest.raises(NonPositiveInput):
        cert.npl_lower(0, 1, 1)
    with pytest.raises(NonPositiveInput):
        cert.npl_lower(1, -1, 1)


def test_certify_small_pair():
    c = cert.certify(np.diag([0.0, 4.0]), np.diag([1.0, 0.0]))
    assert c.lower_bound == pytest.approx(0.8)
    assert c.upper_bound == pytest.approx(1.0)
    assert c.measured_gamma == pytest.approx(1.0)
    assert c.holds()


def test_trivial_chain_returns_d():
    H_A = np.diag([0.0, 2.0, 5.0])
    chain = cert.certify_chain([cert.CertificateStep(H_A, np.zeros((3, 3)), d=2.0)])
    assert chain.final_lower_bound == 2.0
    assert chain.to_dict()["certificates"][0]["upper_bound"] is None


def _psd_vanishing_on(rng, n, null_vectors, rank):
    P = np.eye(n) - null_vectors @ null_vectors.T
    W = P @ rng.standard_normal((n, rank))
    return W @ W.T / rank


def test_two_step_chain(rng):
    n = 12
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    shared = Q[:, :2]
    H1 = _psd_vanishing_on(rng, n, Q[:, :6], 6)
    H2 = _psd_vanishing_on(rng, n, shared, 5)
    H3 = _psd_vanishing_on(rng, n, np.zeros((n, 0)), 3)
    chain = cert.certify_chain([
        cert.CertificateStep(H1, H2, name="one"),
        cert.CertificateStep(H1 + H2, H3, name="two", d="chain"),
    ])
    final = oracle.gap_dense(H1 + H2 + H3)
    assert chain.final_lower_bound <= final + 1e-9
    assert chain.certificates[1].d_source == "chain"
    assert chain.certificates[1].d == chain.certificates[0].lower_bound


def test_chain_cannot_start_with_chain():
    with pytest.raises(NonPositiveInput):
        cert.certify_chain([cert.CertificateStep(np.diag([0.0, 1.0]), np.eye(2), d="chain")])


def test_doubling_chain_norm_two(mini):
    # A(G^SL) - e split as (A(G) - e) (x) 1 plus the doubling term whose norm is 2
    d = new_diagram(1, ["1"])
    G, loopless, sl, _ = pipeline(d, mini)
    A = G.adjacency.astype(float)
    H_A = sp.kron(A - mini.ground_energy * sp.identity(8), sp.identity(2)).tocsr()
    H_B = sp.kron(loopless.projector(), np.ones((2, 2))).tocsr()
    c = cert.certify(H_A, H_B, norm_B=2.0)
    direct = oracle.gap_dense(sl.result.toarray() - mini.ground_energy * np.eye(16))
    assert c.norm_source == "given"
    assert c.lower_bound <= direct + 1e-9
    assert c.measured_gamma == pytest.approx(direct, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_bounds_bracket_gap(seed):
    H_A, H_B = cert.random_psd_pair(np.random.default_rng(seed), max_dim=20)
    c = cert.certify(H_A, H_B)
    gamma = oracle.gap_dense(H_A + H_B, c.threshold)
    assert c.lower_bound <= gamma + 1e-9
    assert gamma <= c.upper_bound + 1e-9


def test_suite_is_deterministic():
    a = cert.certificate_suite(trials=20, seed=7)
    b = cert.certificate_suite(trials=20, seed=7)
    assert a == b and a["pass"]
    assert math.isfinite(a["min_lower_slack"])
