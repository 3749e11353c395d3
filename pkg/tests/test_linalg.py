import numpy as np
import pytest
import scipy.sparse as sp

from gategraph import linalg
from gategraph.errors import SolverNoConvergence


def _random_sym(rng, n, density=0.05):
    M = sp.random(n, n, density=density, random_state=np.random.RandomState(int(rng.integers(1 << 30))))
    return (M + M.T).tocsr()


def test_lanczos_matches_dense(rng):
    M = _random_sym(rng, 700)
    val, vec, info = linalg.lanczos_smallest(M, 1e-10)
    w = np.linalg.eigvalsh(M.toarray())
    assert val == pytest.approx(w[0], abs=1e-9)
    assert info.converged and info.residual <= 1e-9
    assert np.linalg.norm(M @ vec - val * vec) <= 1e-9


def test_deflation_finds_second_eigenvalue(rng):
    M = _random_sym(rng, 600)
    w = np.linalg.eigvalsh(M.toarray())
    _, v0, _ = linalg.lanczos_smallest(M, 1e-11)
    val, _, _ = linalg.lanczos_smallest(M, 1e-10, deflate=[v0])
    assert val == pytest.approx(w[1], abs=1e-8)


def test_low_spectrum_degenerate():
    d = np.concatenate([np.zeros(3), np.linspace(1, 5, 597)])
    vals, vecs, nxt = linalg.low_spectrum(sp.diags(d).tocsr(), 1e-6)
    assert len(vals) == 3 and vecs.shape == (600, 3)
    assert nxt == pytest.approx(1.0, abs=1e-8)


def test_low_spectrum_dense_path():
    vals, _, nxt = linalg.low_spectrum(np.diag([0.0, 0.0, 3.0]), 1e-8)
    assert len(vals) == 2 and nxt == 3.0
    vals, _, nxt = linalg.low_spectrum(np.zeros((2, 2)), 1e-8)
    assert len(vals) == 2 and nxt == np.inf


def test_no_convergence_reports_diagnostics(rng):
    M = _random_sym(rng, 800)
    with pytest.raises(SolverNoConvergence) as info:
        linalg.lanczos_smallest(M, 1e-30, krylov_dim=5, max_restarts=1)
    assert info.value.diagnostics["restarts"] == 1


def test_norm_estimate_bounds_spectrum(rng):
    M = _random_sym(rng, 100, 0.2)
    assert linalg.norm_estimate(M) >= np.abs(np.linalg.eigvalsh(M.toarray())).max() - 1e-12


def test_linear_operator_input(rng):
    M = _random_sym(rng, 600)
    op = sp.linalg.aslinearoperator(M)
    assert linalg.smallest_eigenvalue(op, 1e-10) == pytest.approx(np.linalg.eigvalsh(M.toarray())[0], abs=1e-8)
